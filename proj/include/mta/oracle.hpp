#ifndef MTA_ORACLE_HPP
#define MTA_ORACLE_HPP

#include <map>
#include <set>
#include <utility>

#include "mta/model.hpp"
#include "mta/threat.hpp"

namespace mta {

// Ground truth for globally-linear models over a pure l-inf ball.
struct LinearOracleReport {
  bool attackable = false;
  std::set<std::size_t> confusing_classes;
  double optimal_margin = 0.0;
  Vec witness;
  std::map<std::size_t, double> per_target_max;
};

// Closed-form maximum of the logit difference z_t - z_y over the ball:
// value at x plus epsilon times the l1 norm of the weight-row difference;
// witness delta = epsilon * sign(W_t - W_y).
std::pair<double, Vec> linear_diff_max(const Mat& weights, const Vec& bias,
                                       const Vec& x, std::size_t y,
                                       std::size_t t, double epsilon);

LinearOracleReport analyze_linear(const Mat& weights, const Vec& bias,
                                  const Vec& x, std::size_t y, double epsilon);

// Same, taking a model that must carry the globally-linear flag.
LinearOracleReport analyze_linear_model(const Model& model, const Vec& x,
                                        std::size_t y, double epsilon);

// Exhaustive grid maximum of the margin loss over a 1-D or 2-D set.
// BoxUnion grids each box; ties go to the lexicographically smallest point.
std::pair<double, Vec> grid_oracle(const Model& model, const ThreatSet& set,
                                   std::size_t y, std::size_t resolution = 513);

}  // namespace mta

#endif  // MTA_ORACLE_HPP
