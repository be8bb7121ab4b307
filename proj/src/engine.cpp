#include "mta/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "mta/errors.hpp"
#include "mta/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mta {

std::vector<std::size_t> select_targets(const Vec& z, std::size_t y, int t) {
  const std::size_t c = z.size();
  if (y >= c) throw InvalidInput("select_targets: label out of range");
  if (t < 1 || static_cast<std::size_t>(t) > c - 1)
    throw InvalidInput("select_targets: T out of range");
  std::vector<std::size_t> targets;
  targets.reserve(c - 1);
  for (std::size_t i = 0; i < c; ++i)
    if (i != y) targets.push_back(i);
  // Full target set keeps index order (the cyclic schedule); top-T sorts by
  // nominal logit, ties to the lowest index.
  if (static_cast<std::size_t>(t) == c - 1) return targets;
  std::stable_sort(targets.begin(), targets.end(),
                   [&z](std::size_t a, std::size_t b) { return z[a] > z[b]; });
  targets.resize(static_cast<std::size_t>(t));
  return targets;
}

namespace {

struct Candidate {
  int success = 0;
  double margin = 0.0;

  bool better_than(const Candidate& other) const {
    if (success != other.success) return success > other.success;
    return margin > other.margin;
  }
};

Candidate evaluate(const Model& model, const Vec& point, std::size_t y) {
  const Vec z = model.forward(point);
  return Candidate{zero_one_loss(z, y),
                   loss_value(SurrogateLoss::margin(), z, y)};
}

}  // namespace

RestartRecord run_pgd_from(const Model& model, const ThreatSet& set,
                           const Vec& init, std::size_t y,
                           const SurrogateLoss& loss,
                           const OptimizerSpec& opt,
                           const StepSchedule& schedule, long steps,
                           bool early_stop) {
  if (steps < 1) throw InvalidInput("run_pgd_from: steps must be >= 1");
  RestartRecord rec;
  rec.target = loss.kind == LossKind::LogitDiff
                   ? static_cast<int>(loss.target)
                   : -1;
  rec.init = init;

  Optimizer optimizer(opt);
  optimizer.reset();

  Vec cur = init;
  Candidate best = evaluate(model, cur, y);
  rec.best = cur;
  rec.best_margin = best.margin;
  rec.success = best.success != 0;

  try {
    for (long k = 1; k <= steps; ++k) {
      if (early_stop && rec.success) break;
      const Vec z = model.forward(cur);
      const Vec cot = loss_logit_gradient(loss, z, y);
      const Vec grad = model.input_gradient(cur, cot);
      ++rec.grad_evals;
      const Vec dir = optimizer.update_direction(grad);
      const double alpha = step_size(schedule, k, steps);
      Vec next(cur.size());
      for (std::size_t i = 0; i < cur.size(); ++i)
        next[i] = cur[i] + alpha * dir[i];
      cur = project(set, next);
      rec.steps_run = k;
      const Candidate cand = evaluate(model, cur, y);
      if (cand.better_than(best)) {
        best = cand;
        rec.best = cur;
        rec.best_margin = cand.margin;
        rec.success = cand.success != 0;
      }
    }
  } catch (const NumericalError&) {
    // Aborted restarts still consume their full gradient budget so
    // equal-compute comparisons stay honest.
    rec.failed_numerically = true;
    rec.success = false;
    rec.grad_evals = steps;
  }
  rec.final_point = cur;
  return rec;
}

RestartRecord run_pgd_restart(const Model& model, const ThreatSet& set,
                              std::size_t y, const SurrogateLoss& loss,
                              const OptimizerSpec& opt,
                              const StepSchedule& schedule, long steps,
                              std::uint64_t seed, bool early_stop) {
  Rng rng(seed);
  const Vec init = sample_uniform(set, rng);
  return run_pgd_from(model, set, init, y, loss, opt, schedule, steps,
                      early_stop);
}

namespace {

struct Job {
  long restart_index;
  SurrogateLoss loss;
  std::uint64_t seed;
};

AttackResult run_jobs(const Model& model, const Vec& x, std::size_t y,
                      const ThreatSet& set, const AttackConfig& config,
                      const std::vector<Job>& jobs) {
  if (x.size() != model.input_dim())
    throw InvalidInput("attack: input dimension mismatch");
  if (jobs.empty()) throw InvalidInput("attack: no restarts configured");

  std::vector<RestartRecord> records(jobs.size());
  const bool parallel = config.threads > 1 && !config.early_stop;
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.threads)
#endif
    for (long j = 0; j < static_cast<long>(jobs.size()); ++j) {
      const Job& job = jobs[static_cast<std::size_t>(j)];
      records[static_cast<std::size_t>(j)] =
          run_pgd_restart(model, set, y, job.loss, config.optimizer,
                          config.schedule, config.steps, job.seed, false);
      records[static_cast<std::size_t>(j)].restart_index = job.restart_index;
    }
  } else {
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      records[j] = run_pgd_restart(model, set, y, jobs[j].loss,
                                   config.optimizer, config.schedule,
                                   config.steps, jobs[j].seed,
                                   config.early_stop);
      records[j].restart_index = jobs[j].restart_index;
      if (config.early_stop && records[j].success) {
        records.resize(j + 1);
        break;
      }
    }
  }

  AttackResult result;
  result.best_margin = -std::numeric_limits<double>::infinity();
  bool any_ok = false;
  // Merge in job order: strict improvement keeps the lowest
  // (restart index, target) pair on exact ties.
  for (const RestartRecord& rec : records) {
    result.grad_evals += rec.grad_evals;
    if (rec.failed_numerically) continue;
    const Candidate cand{rec.success ? 1 : 0, rec.best_margin};
    const Candidate cur{result.success ? 1 : 0, result.best_margin};
    if (!any_ok || cand.better_than(cur)) {
      result.best_input = rec.best;
      result.best_margin = rec.best_margin;
      result.success = rec.success;
      any_ok = true;
    }
  }
  if (!any_ok)
    throw NumericalError("attack: every restart failed numerically");
  result.records = std::move(records);
  return result;
}

std::vector<std::size_t> targets_for(const Model& model, const Vec& x,
                                     std::size_t y, int top_t) {
  const Vec z = model.forward(x);
  const int all = static_cast<int>(model.num_classes()) - 1;
  const int t = top_t < 0 ? all : top_t;
  return select_targets(z, y, t);
}

}  // namespace

AttackResult run_untargeted(const Model& model, const Vec& x, std::size_t y,
                            const ThreatSet& set, const AttackConfig& config) {
  if (config.restarts < 1)
    throw InvalidInput("attack: restarts must be >= 1");
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(config.restarts));
  for (long r = 0; r < config.restarts; ++r)
    jobs.push_back({r, config.loss,
                    derive_seed(config.master_seed,
                                static_cast<std::uint64_t>(r), 0)});
  return run_jobs(model, x, y, set, config, jobs);
}

AttackResult run_multitargeted(const Model& model, const Vec& x,
                               std::size_t y, const ThreatSet& set,
                               const AttackConfig& config) {
  const std::vector<std::size_t> targets =
      targets_for(model, x, y, config.top_t);
  long iters = config.restarts;
  if (config.restarts_is_total_budget) {
    iters = config.restarts / static_cast<long>(targets.size());
    if (iters < 1) {
      std::ostringstream msg;
      msg << "multitargeted: restart budget " << config.restarts
          << " is below the " << targets.size() << " targets";
      throw InvalidInput(msg.str());
    }
  }
  if (iters < 1) throw InvalidInput("multitargeted: restarts must be >= 1");
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(iters) * targets.size());
  for (long i = 0; i < iters; ++i)
    for (std::size_t t : targets)
      jobs.push_back({i, SurrogateLoss::logit_diff(t),
                      derive_seed(config.master_seed,
                                  static_cast<std::uint64_t>(i),
                                  static_cast<std::uint64_t>(t) + 1)});
  return run_jobs(model, x, y, set, config, jobs);
}

AttackResult run_pgd_mt(const Model& model, const Vec& x, std::size_t y,
                        const ThreatSet& set, const AttackConfig& config) {
  if (config.restarts < 1)
    throw InvalidInput("pgd_mt: restarts must be >= 1");
  const std::size_t c = model.num_classes();
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(config.restarts) * c);
  for (long i = 0; i < config.restarts; ++i) {
    // C surrogate losses per outer iteration: every logit difference in
    // index order, then the margin loss.
    for (std::size_t t = 0; t < c; ++t)
      if (t != y)
        jobs.push_back({i, SurrogateLoss::logit_diff(t),
                        derive_seed(config.master_seed,
                                    static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(t) + 1)});
    jobs.push_back({i, SurrogateLoss::margin(),
                    derive_seed(config.master_seed,
                                static_cast<std::uint64_t>(i), 0)});
  }
  return run_jobs(model, x, y, set, config, jobs);
}

AttackResult run_attack(const Model& model, const Vec& x, std::size_t y,
                        const ThreatSet& set, const AttackConfig& config) {
  switch (config.strategy) {
    case StrategyKind::FixedLoss:
      return run_untargeted(model, x, y, set, config);
    case StrategyKind::MultiTargeted:
      return run_multitargeted(model, x, y, set, config);
    case StrategyKind::PgdPlusMt:
      return run_pgd_mt(model, x, y, set, config);
  }
  throw InvalidInput("attack: unknown strategy");
}

AttackResult aggregate(const std::vector<AttackResult>& results) {
  if (results.empty()) throw InvalidInput("aggregate: empty result list");
  for (const AttackResult& r : results)
    if (r.example_id != results.front().example_id)
      throw InvalidInput("aggregate: mismatched example ids");
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    const Candidate a{results[i].success ? 1 : 0, results[i].best_margin};
    const Candidate b{results[best].success ? 1 : 0,
                      results[best].best_margin};
    if (a.better_than(b)) best = i;
  }
  return results[best];
}

}  // namespace mta
