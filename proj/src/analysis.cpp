#include "mta/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mta/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mta {

namespace {

void bounding_box(const ThreatSet& set, Vec& lo, Vec& hi) {
  const std::size_t dim = set_dim(set);
  lo.assign(dim, 0.0);
  hi.assign(dim, 0.0);
  if (const auto* ball = std::get_if<LinfBall>(&set)) {
    for (std::size_t i = 0; i < dim; ++i) {
      lo[i] = ball->lo(i);
      hi[i] = ball->hi(i);
    }
    return;
  }
  const BoxUnion& bu = std::get<BoxUnion>(set);
  lo = bu.boxes.front().lo;
  hi = bu.boxes.front().hi;
  for (const Box& box : bu.boxes)
    for (std::size_t i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], box.lo[i]);
      hi[i] = std::max(hi[i], box.hi[i]);
    }
}

std::vector<Vec> grid_inits(const ThreatSet& set, std::size_t resolution) {
  const std::size_t dim = set_dim(set);
  if (dim > 2) throw InvalidInput("basin_map: only dimensions 1 and 2");
  if (resolution < 2) throw InvalidInput("basin_map: resolution below 2");
  Vec lo, hi;
  bounding_box(set, lo, hi);
  auto coord = [&](std::size_t axis, std::size_t i) {
    return lo[axis] + (hi[axis] - lo[axis]) * static_cast<double>(i) /
                          static_cast<double>(resolution - 1);
  };
  std::vector<Vec> inits;
  if (dim == 1) {
    for (std::size_t i = 0; i < resolution; ++i) {
      Vec p{coord(0, i)};
      if (contains(set, p)) inits.push_back(std::move(p));
    }
  } else {
    for (std::size_t i = 0; i < resolution; ++i)
      for (std::size_t j = 0; j < resolution; ++j) {
        Vec p{coord(0, i), coord(1, j)};
        if (contains(set, p)) inits.push_back(std::move(p));
      }
  }
  if (inits.empty()) throw InvalidInput("basin_map: no grid point in the set");
  return inits;
}

template <typename SuccessFn>
BasinMap map_over_grid(const ThreatSet& set, std::size_t resolution,
                       int threads, SuccessFn&& succeeds) {
  BasinMap map;
  map.inits = grid_inits(set, resolution);
  map.successes.assign(map.inits.size(), false);
  std::vector<char> flags(map.inits.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(threads, 1))
#endif
  for (long i = 0; i < static_cast<long>(map.inits.size()); ++i)
    flags[static_cast<std::size_t>(i)] =
        succeeds(map.inits[static_cast<std::size_t>(i)]) ? 1 : 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    map.successes[i] = flags[i] != 0;
    if (flags[i]) ++count;
  }
  map.fraction =
      static_cast<double>(count) / static_cast<double>(map.inits.size());
  return map;
}

}  // namespace

BasinMap basin_map(const Model& model, const ThreatSet& set, std::size_t y,
                   const SurrogateLoss& loss, const OptimizerSpec& opt,
                   const StepSchedule& schedule, long steps,
                   std::size_t resolution, int threads) {
  return map_over_grid(set, resolution, threads, [&](const Vec& init) {
    return run_pgd_from(model, set, init, y, loss, opt, schedule, steps)
        .success;
  });
}

BasinMap basin_map_multitargeted(const Model& model, const ThreatSet& set,
                                 std::size_t y, const OptimizerSpec& opt,
                                 const StepSchedule& schedule, long steps,
                                 std::size_t resolution, int threads) {
  const std::size_t c = model.num_classes();
  return map_over_grid(set, resolution, threads, [&](const Vec& init) {
    for (std::size_t t = 0; t < c; ++t) {
      if (t == y) continue;
      if (run_pgd_from(model, set, init, y, SurrogateLoss::logit_diff(t), opt,
                       schedule, steps)
              .success)
        return true;
    }
    return false;
  });
}

SpectrumReport linearity_spectrum(const Model& model, const ThreatSet& set,
                                  std::size_t n_samples, Rng& rng) {
  if (n_samples < 2)
    throw InvalidInput("linearity_spectrum: need at least 2 samples");
  const std::size_t c = model.num_classes();
  const std::size_t d = model.input_dim();

  // One sample set shared across logits.
  std::vector<Vec> samples;
  samples.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s)
    samples.push_back(sample_uniform(set, rng));

  SpectrumReport report;
  report.per_logit.resize(c);
  const std::size_t n_values = std::min(n_samples, d);
  report.average.assign(n_values, 0.0);
  for (std::size_t logit = 0; logit < c; ++logit) {
    Mat grads(n_samples, d);
    Vec cot(c, 0.0);
    cot[logit] = 1.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      const Vec g = model.input_gradient(samples[s], cot);
      for (std::size_t j = 0; j < d; ++j) grads.at(s, j) = g[j];
    }
    std::vector<double> sv = singular_values(grads);
    const double top = sv.empty() ? 0.0 : sv.front();
    if (top > 0.0)
      for (double& v : sv) v /= top;
    report.per_logit[logit] = sv;
    for (std::size_t i = 0; i < n_values; ++i) report.average[i] += sv[i];
  }
  for (double& v : report.average) v /= static_cast<double>(c);
  return report;
}

LogitLandscape logit_landscape(const Model& model, const Vec& x,
                               std::size_t y, double epsilon,
                               std::size_t resolution, std::uint64_t seed,
                               const AttackConfig& pgd_config) {
  if (epsilon <= 0.0)
    throw InvalidInput("logit_landscape: epsilon must be > 0");
  if (resolution < 2)
    throw InvalidInput("logit_landscape: resolution below 2");

  const std::size_t d = model.input_dim();
  const ThreatSet set = LinfBall(x, epsilon);

  // u: best PGD perturbation rescaled to the ball surface. A fully failed
  // sub-run still yields a landscape, with u left at zero.
  Vec u(d, 0.0);
  try {
    const AttackResult res = run_attack(model, x, y, set, pgd_config);
    for (std::size_t i = 0; i < d; ++i) u[i] = res.best_input[i] - x[i];
    const double n = norm_inf(u);
    if (n > 0.0)
      for (double& ui : u) ui *= epsilon / n;
  } catch (const NumericalError&) {
  }

  Rng rng(seed);
  Vec v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = epsilon * rng.rademacher();

  LogitLandscape land;
  land.resolution = resolution;
  land.extent = 1.2 * epsilon;
  land.u = u;
  land.v = v;
  land.a_coords.resize(resolution);
  land.b_coords.resize(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    const double t = -1.0 + 2.0 * static_cast<double>(i) /
                                static_cast<double>(resolution - 1);
    land.a_coords[i] = land.extent * t;
    land.b_coords[i] = land.extent * t;
  }

  const std::size_t c = model.num_classes();
  land.values.assign(c, std::vector<double>(resolution * resolution, 0.0));
  land.inside.assign(resolution * resolution, false);
  for (std::size_t i = 0; i < resolution; ++i) {
    for (std::size_t j = 0; j < resolution; ++j) {
      const double a = land.a_coords[i];
      const double b = land.b_coords[j];
      Vec p(d);
      double linf = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        p[k] = x[k] + (a / epsilon) * u[k] + (b / epsilon) * v[k];
        linf = std::max(linf, std::fabs(p[k] - x[k]));
      }
      const Vec z = model.forward(p);
      const std::size_t cell = i * resolution + j;
      for (std::size_t k = 0; k < c; ++k) land.values[k][cell] = z[k];
      land.inside[cell] = linf <= epsilon + 1e-12;
    }
  }
  return land;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write CSV file: " + path);
  out.precision(17);
  return out;
}

}  // namespace

void write_basin_csv(const BasinMap& map, const std::string& path) {
  std::ofstream out = open_csv(path);
  const std::size_t dim = map.inits.front().size();
  out << (dim == 1 ? "x0,success\n" : "x0,x1,success\n");
  for (std::size_t i = 0; i < map.inits.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) out << map.inits[i][j] << ',';
    out << (map.successes[i] ? 1 : 0) << '\n';
  }
}

void write_spectrum_csv(const SpectrumReport& report,
                        const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "logit,index,normalized_value\n";
  for (std::size_t c = 0; c < report.per_logit.size(); ++c)
    for (std::size_t i = 0; i < report.per_logit[c].size(); ++i)
      out << c << ',' << i << ',' << report.per_logit[c][i] << '\n';
  for (std::size_t i = 0; i < report.average.size(); ++i)
    out << "average," << i << ',' << report.average[i] << '\n';
}

void write_landscape_csv(const LogitLandscape& landscape,
                         const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "a,b,logit,value,inside\n";
  const std::size_t n = landscape.resolution;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < landscape.values.size(); ++c)
        out << landscape.a_coords[i] << ',' << landscape.b_coords[j] << ','
            << c << ',' << landscape.values[c][i * n + j] << ','
            << (landscape.inside[i * n + j] ? 1 : 0) << '\n';
}

}  // namespace mta
