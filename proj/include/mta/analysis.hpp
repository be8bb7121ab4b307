#ifndef MTA_ANALYSIS_HPP
#define MTA_ANALYSIS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mta/engine.hpp"
#include "mta/loss.hpp"
#include "mta/model.hpp"
#include "mta/optim.hpp"
#include "mta/threat.hpp"

namespace mta {

// Deterministic grid-initialized success map for one ascent recipe.
struct BasinMap {
  std::vector<Vec> inits;       // grid points inside the set
  std::vector<bool> successes;  // one per init
  double fraction = 0.0;        // successes / inits
};

// Per-logit normalized singular value curves of the stacked-gradient
// matrices, plus their average.
struct SpectrumReport {
  std::vector<std::vector<double>> per_logit;  // descending, first = 1
  std::vector<double> average;
};

struct LogitLandscape {
  std::size_t resolution = 0;
  double extent = 0.0;  // grid spans [-extent, extent] in both directions
  Vec u;                // PGD attack direction, l-inf radius epsilon
  Vec v;                // Rademacher direction, l-inf radius epsilon
  std::vector<double> a_coords;
  std::vector<double> b_coords;
  // values[c][i * resolution + j] = logit c at (a_i, b_j)
  std::vector<std::vector<double>> values;
  std::vector<bool> inside;  // cell within the l-inf ball
};

// One deterministic restart per grid init (no sampling), recording success.
// Dimension <= 2 only.
BasinMap basin_map(const Model& model, const ThreatSet& set, std::size_t y,
                   const SurrogateLoss& loss, const OptimizerSpec& opt,
                   const StepSchedule& schedule, long steps,
                   std::size_t resolution, int threads = 1);

// Same grid, but each init runs one restart per target class (all classes
// != y); success when any of them misclassifies.
BasinMap basin_map_multitargeted(const Model& model, const ThreatSet& set,
                                 std::size_t y, const OptimizerSpec& opt,
                                 const StepSchedule& schedule, long steps,
                                 std::size_t resolution, int threads = 1);

// Stacks input gradients of each logit over n_samples shared inputs drawn
// uniformly from the set, and reports normalized singular values.
SpectrumReport linearity_spectrum(const Model& model, const ThreatSet& set,
                                  std::size_t n_samples, Rng& rng);

LogitLandscape logit_landscape(const Model& model, const Vec& x,
                               std::size_t y, double epsilon,
                               std::size_t resolution, std::uint64_t seed,
                               const AttackConfig& pgd_config);

// CSV writers; fixed headers documented in the README.
void write_basin_csv(const BasinMap& map, const std::string& path);
void write_spectrum_csv(const SpectrumReport& report, const std::string& path);
void write_landscape_csv(const LogitLandscape& landscape,
                         const std::string& path);

}  // namespace mta

#endif  // MTA_ANALYSIS_HPP
