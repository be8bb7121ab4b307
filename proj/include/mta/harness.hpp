#ifndef MTA_HARNESS_HPP
#define MTA_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mta/analysis.hpp"
#include "mta/engine.hpp"
#include "mta/model.hpp"
#include "mta/oracle.hpp"
#include "mta/threat.hpp"

namespace mta {

// Monte-Carlo experiment over random linear classifiers: weights and
// biases uniform in [-1, 1], nominal x = 0, label = argmax bias.
struct McLinearConfig {
  std::size_t num_classes = 3;
  std::size_t input_dim = 1;
  double epsilon = 1.0;
  std::size_t samples = 100000;
  long pgd_restarts = 0;  // 0 selects C-1
  long steps = 64;
  OptimizerSpec optimizer;  // sign by default
  std::uint64_t master_seed = 0;
  int threads = 1;
};

struct McBucket {
  std::size_t confusing_classes = 0;
  std::size_t attackable = 0;
  std::size_t pgd_successes = 0;
  std::size_t mt_successes = 0;
};

struct ExperimentReport {
  std::size_t total_samples = 0;
  std::size_t attackable_samples = 0;
  std::size_t pgd_successes = 0;
  std::size_t mt_successes = 0;
  std::vector<McBucket> buckets;  // indexed by confusing-class count - 1

  double pgd_rate() const;
  double mt_rate() const;
};

// Half-width of the 95% normal-approximation confidence interval.
double ci95_half_width(std::size_t successes, std::size_t n);

ExperimentReport mc_linear_experiment(const McLinearConfig& cfg);
void write_mc_report_csv(const ExperimentReport& report,
                         const std::string& path);

// 1-D 3-class linear model whose margin-ascent success basin occupies
// fraction rho of the ball [-epsilon, epsilon]; the basin crossover sits
// at epsilon * (1 - 2 rho) and the adversarial vertex at +epsilon.
Model make_basin_model(double rho, double epsilon);

// The 1-D, 3-class running example: W = [[0], [0.5], [-2]],
// b = (1, -0.7, 0). Margin-basin crossover at 0.28 for epsilon = 1.
Model make_toy_model();

struct ToyReport {
  double rho = 0.0;
  std::size_t trials = 0;
  long restarts = 0;
  std::size_t pgd_successes = 0;
  std::size_t mt_successes = 0;

  double pgd_rate() const;
  double mt_rate() const;
};

ToyReport toy_experiment(double rho, std::size_t trials, long restarts,
                         double epsilon = 1.0, std::uint64_t master_seed = 0,
                         int threads = 1);
void write_toy_report_csv(const ToyReport& report, const std::string& path);

// The two shipped non-convex (L-shaped) demos: one where margin-loss PGD
// has the larger basin, one where the per-target losses do.
struct NonconvexDemo {
  std::string name;
  Model model;
  BoxUnion set;
  std::size_t label = 0;
  double pgd_fraction = 0.0;
  double mt_fraction = 0.0;
  double grid_optimal_margin = 0.0;
  Vec grid_witness;
};

struct NonconvexReport {
  std::vector<NonconvexDemo> demos;
};

Model make_nonconvex_model(int example);     // example in {1, 2}
BoxUnion make_nonconvex_set();               // shared L-shaped set
NonconvexReport nonconvex_experiment(std::size_t basin_resolution = 101,
                                     int threads = 1);
void write_nonconvex_report_csv(const NonconvexReport& report,
                                const std::string& path);

// Batch attack over an examples file (JSONL: {"id", "input", "label"}).
struct LabeledExample {
  std::string id;
  Vec input;
  std::size_t label = 0;
};

std::vector<LabeledExample> load_examples(const std::string& path);

struct BatchSummary {
  std::size_t examples = 0;
  std::size_t attacked_successfully = 0;
  double accuracy_under_attack = 0.0;
};

// Runs the configured attack on every example, writes one JSONL record per
// example, and returns the accuracy-under-attack summary. `box` optionally
// clips every coordinate to [box_lo, box_hi].
BatchSummary attack_command(const Model& model,
                            const std::vector<LabeledExample>& examples,
                            double epsilon, bool box, double box_lo,
                            double box_hi, const AttackConfig& config,
                            const std::string& attack_name,
                            const std::string& out_path);

// Worst-case merge of several attack result files (JSONL as written by
// attack_command); writes the aggregated records and returns the summary.
BatchSummary aggregate_result_files(const std::vector<std::string>& paths,
                                    const std::string& out_path);

const char* strategy_name(StrategyKind strategy);

}  // namespace mta

#endif  // MTA_HARNESS_HPP
