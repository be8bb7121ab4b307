#ifndef MTA_OPTIM_HPP
#define MTA_OPTIM_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "mta/numerics.hpp"

namespace mta {

enum class OptimizerKind { Sign, Plain, L2Norm, Adam };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-9;
};

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::Sign;
  AdamParams adam;
};

// Update-direction rule. Adam carries per-restart state; the other kinds
// are stateless. One instance per restart, never shared.
class Optimizer {
 public:
  explicit Optimizer(OptimizerSpec spec) : spec_(spec) {}

  // Maps a gradient to an ascent direction; mutates Adam moments.
  Vec update_direction(const Vec& gradient);

  // Zeroes Adam state; no-op for stateless kinds.
  void reset();

  const OptimizerSpec& spec() const { return spec_; }

 private:
  OptimizerSpec spec_;
  Vec m_;
  Vec v_;
  long step_ = 0;
};

// Step-size schedule alpha^(k). Piecewise schedules apply cumulative
// multipliers past breakpoints at ceil(fraction * K).
struct StepSchedule {
  double initial = 0.1;
  // (step fraction in (0,1], multiplier); fractions strictly increasing.
  std::vector<std::pair<double, double>> decay;

  static StepSchedule constant(double alpha) { return {alpha, {}}; }
  // The common default: 10x decay at K/2 and 3K/4.
  static StepSchedule default_decay(double alpha = 0.1) {
    return {alpha, {{0.5, 0.1}, {0.75, 0.1}}};
  }
};

double step_size(const StepSchedule& schedule, long k, long total_steps);

}  // namespace mta

#endif  // MTA_OPTIM_HPP
