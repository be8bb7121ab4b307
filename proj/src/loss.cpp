#include "mta/loss.hpp"

#include <algorithm>
#include <cmath>

#include "mta/errors.hpp"

namespace mta {

namespace {

void check_args(const SurrogateLoss& loss, const Vec& z, std::size_t y) {
  if (z.size() < 2) throw InvalidInput("loss: need at least 2 classes");
  if (y >= z.size()) throw InvalidInput("loss: label out of range");
  if (loss.kind == LossKind::LogitDiff) {
    if (loss.target >= z.size())
      throw InvalidInput("loss: logit_diff target out of range");
    if (loss.target == y)
      throw InvalidInput("loss: logit_diff target equals label");
  }
}

// Max-shifted log-sum-exp.
double log_sum_exp(const Vec& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

std::size_t argmax_excluding(const Vec& z, std::size_t y) {
  std::size_t best = y == 0 ? 1 : 0;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (i != y && z[i] > z[best]) best = i;
  return best;
}

double loss_value(const SurrogateLoss& loss, const Vec& z, std::size_t y) {
  check_args(loss, z, y);
  switch (loss.kind) {
    case LossKind::CrossEntropy:
      return -z[y] + log_sum_exp(z);
    case LossKind::Margin:
      return -z[y] + z[argmax_excluding(z, y)];
    case LossKind::LogitDiff:
      return -z[y] + z[loss.target];
  }
  throw InvalidInput("loss: unknown kind");
}

Vec loss_logit_gradient(const SurrogateLoss& loss, const Vec& z,
                        std::size_t y) {
  check_args(loss, z, y);
  Vec g(z.size(), 0.0);
  switch (loss.kind) {
    case LossKind::CrossEntropy: {
      const double m = *std::max_element(z.begin(), z.end());
      double s = 0.0;
      for (double v : z) s += std::exp(v - m);
      for (std::size_t i = 0; i < z.size(); ++i)
        g[i] = std::exp(z[i] - m) / s;
      g[y] -= 1.0;
      return g;
    }
    case LossKind::Margin:
      g[argmax_excluding(z, y)] = 1.0;
      g[y] -= 1.0;
      return g;
    case LossKind::LogitDiff:
      g[loss.target] = 1.0;
      g[y] -= 1.0;
      return g;
  }
  throw InvalidInput("loss: unknown kind");
}

int zero_one_loss(const Vec& z, std::size_t y) {
  if (z.size() < 2) throw InvalidInput("zero_one_loss: need >= 2 classes");
  if (y >= z.size()) throw InvalidInput("zero_one_loss: label out of range");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < z.size(); ++i)
    if (z[i] > z[arg]) arg = i;
  return arg != y ? 1 : 0;
}

}  // namespace mta
