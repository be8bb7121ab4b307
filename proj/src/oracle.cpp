#include "mta/oracle.hpp"

#include <cmath>
#include <limits>

#include "mta/errors.hpp"
#include "mta/loss.hpp"

namespace mta {

std::pair<double, Vec> linear_diff_max(const Mat& weights, const Vec& bias,
                                       const Vec& x, std::size_t y,
                                       std::size_t t, double epsilon) {
  if (t == y) throw InvalidInput("linear_diff_max: target equals label");
  if (y >= weights.rows || t >= weights.rows)
    throw InvalidInput("linear_diff_max: class index out of range");
  if (x.size() != weights.cols)
    throw InvalidInput("linear_diff_max: input dimension mismatch");
  if (epsilon < 0.0) throw InvalidInput("linear_diff_max: negative epsilon");

  double value = bias[t] - bias[y];
  Vec witness(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double wd = weights.at(t, j) - weights.at(y, j);
    value += wd * x[j];
    value += epsilon * std::fabs(wd);
    witness[j] = x[j] + epsilon * (wd > 0.0 ? 1.0 : (wd < 0.0 ? -1.0 : 0.0));
  }
  return {value, witness};
}

LinearOracleReport analyze_linear(const Mat& weights, const Vec& bias,
                                  const Vec& x, std::size_t y,
                                  double epsilon) {
  if (weights.rows < 2) throw InvalidInput("analyze_linear: need >= 2 classes");
  LinearOracleReport report;
  report.optimal_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < weights.rows; ++t) {
    if (t == y) continue;
    auto [value, witness] = linear_diff_max(weights, bias, x, y, t, epsilon);
    report.per_target_max[t] = value;
    if (value > 0.0) report.confusing_classes.insert(t);
    if (value > report.optimal_margin) {
      report.optimal_margin = value;
      report.witness = std::move(witness);
    }
  }
  // Margin exactly 0 counts as correctly classified.
  report.attackable = report.optimal_margin > 0.0;
  return report;
}

LinearOracleReport analyze_linear_model(const Model& model, const Vec& x,
                                        std::size_t y, double epsilon) {
  if (!model.globally_linear())
    throw InvalidInput("analyze_linear_model: model is not globally linear");
  const Layer& l = model.layers().front();
  return analyze_linear(l.weights, l.bias, x, y, epsilon);
}

namespace {

// Grid points along [lo, hi] inclusive.
double grid_coord(double lo, double hi, std::size_t i, std::size_t n) {
  if (n == 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void grid_box_max(const Model& model, std::size_t y, const Vec& lo,
                  const Vec& hi, std::size_t resolution, double& best,
                  Vec& best_point) {
  const std::size_t dim = lo.size();
  const SurrogateLoss margin = SurrogateLoss::margin();
  auto consider = [&](const Vec& p) {
    const double m = loss_value(margin, model.forward(p), y);
    if (best_point.empty() || m > best || (m == best && p < best_point)) {
      best = m;
      best_point = p;
    }
  };
  if (dim == 1) {
    for (std::size_t i = 0; i < resolution; ++i)
      consider(Vec{grid_coord(lo[0], hi[0], i, resolution)});
    return;
  }
  for (std::size_t i = 0; i < resolution; ++i) {
    const double a = grid_coord(lo[0], hi[0], i, resolution);
    for (std::size_t j = 0; j < resolution; ++j)
      consider(Vec{a, grid_coord(lo[1], hi[1], j, resolution)});
  }
}

}  // namespace

std::pair<double, Vec> grid_oracle(const Model& model, const ThreatSet& set,
                                   std::size_t y, std::size_t resolution) {
  const std::size_t dim = set_dim(set);
  if (dim > 2) throw InvalidInput("grid_oracle: only dimensions 1 and 2");
  if (resolution < 16) throw InvalidInput("grid_oracle: resolution below 16");
  if (model.input_dim() != dim)
    throw InvalidInput("grid_oracle: model/set dimension mismatch");

  double best = -std::numeric_limits<double>::infinity();
  Vec best_point;
  if (const auto* ball = std::get_if<LinfBall>(&set)) {
    Vec lo(dim), hi(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      lo[i] = ball->lo(i);
      hi[i] = ball->hi(i);
    }
    grid_box_max(model, y, lo, hi, resolution, best, best_point);
  } else {
    for (const Box& box : std::get<BoxUnion>(set).boxes)
      grid_box_max(model, y, box.lo, box.hi, resolution, best, best_point);
  }
  return {best, best_point};
}

}  // namespace mta
