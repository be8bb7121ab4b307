#ifndef MTA_ENGINE_HPP
#define MTA_ENGINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mta/loss.hpp"
#include "mta/model.hpp"
#include "mta/optim.hpp"
#include "mta/threat.hpp"

namespace mta {

enum class StrategyKind { FixedLoss, MultiTargeted, PgdPlusMt };

struct AttackConfig {
  OptimizerSpec optimizer;
  StepSchedule schedule = StepSchedule::default_decay();
  StrategyKind strategy = StrategyKind::FixedLoss;
  SurrogateLoss loss = SurrogateLoss::margin();  // FixedLoss only
  int top_t = -1;       // MultiTargeted: top-T target classes, -1 = all
  long steps = 100;     // K per restart
  long restarts = 1;    // N_r (FixedLoss) or N_i (per-target strategies)
  bool restarts_is_total_budget = false;  // interpret restarts as N_r for MT
  std::uint64_t master_seed = 0;
  bool early_stop = false;
  int threads = 1;
};

struct RestartRecord {
  long restart_index = 0;
  int target = -1;  // class index, or -1 when the loss is not a logit diff
  Vec init;
  Vec final_point;
  Vec best;
  double best_margin = 0.0;
  bool success = false;
  long steps_run = 0;
  long grad_evals = 0;
  bool failed_numerically = false;
};

struct AttackResult {
  std::string example_id;
  Vec best_input;
  double best_margin = 0.0;
  bool success = false;
  long grad_evals = 0;
  std::vector<RestartRecord> records;
};

// The T classes != y with the highest nominal logits, descending, ties to
// the lowest index. T = C-1 returns all other classes in index order (the
// cyclic full-target schedule).
std::vector<std::size_t> select_targets(const Vec& z, std::size_t y, int t);

// One projected-ascent run from an explicit start point. Deterministic;
// the start itself is evaluated as a candidate before any step.
RestartRecord run_pgd_from(const Model& model, const ThreatSet& set,
                           const Vec& init, std::size_t y,
                           const SurrogateLoss& loss,
                           const OptimizerSpec& opt,
                           const StepSchedule& schedule, long steps,
                           bool early_stop = false);

// One restart: sample the start uniformly from the set with the given
// seed, then run projected ascent.
RestartRecord run_pgd_restart(const Model& model, const ThreatSet& set,
                              std::size_t y, const SurrogateLoss& loss,
                              const OptimizerSpec& opt,
                              const StepSchedule& schedule, long steps,
                              std::uint64_t seed, bool early_stop = false);

AttackResult run_untargeted(const Model& model, const Vec& x, std::size_t y,
                            const ThreatSet& set, const AttackConfig& config);

AttackResult run_multitargeted(const Model& model, const Vec& x,
                               std::size_t y, const ThreatSet& set,
                               const AttackConfig& config);

AttackResult run_pgd_mt(const Model& model, const Vec& x, std::size_t y,
                        const ThreatSet& set, const AttackConfig& config);

// Dispatch on config.strategy.
AttackResult run_attack(const Model& model, const Vec& x, std::size_t y,
                        const ThreatSet& set, const AttackConfig& config);

// Worst-case pick across attacks on the same example: maximal
// (success, margin), first on ties.
AttackResult aggregate(const std::vector<AttackResult>& results);

}  // namespace mta

#endif  // MTA_ENGINE_HPP
