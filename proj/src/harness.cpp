#include "mta/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "mta/errors.hpp"
#include "mta/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mta {

using nlohmann::json;

double ExperimentReport::pgd_rate() const {
  return attackable_samples == 0
             ? 0.0
             : static_cast<double>(pgd_successes) /
                   static_cast<double>(attackable_samples);
}

double ExperimentReport::mt_rate() const {
  return attackable_samples == 0
             ? 0.0
             : static_cast<double>(mt_successes) /
                   static_cast<double>(attackable_samples);
}

double ToyReport::pgd_rate() const {
  return trials == 0 ? 0.0
                     : static_cast<double>(pgd_successes) /
                           static_cast<double>(trials);
}

double ToyReport::mt_rate() const {
  return trials == 0 ? 0.0
                     : static_cast<double>(mt_successes) /
                           static_cast<double>(trials);
}

double ci95_half_width(std::size_t successes, std::size_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

namespace {

std::size_t argmax_lowest(const Vec& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

struct McSampleOutcome {
  bool attackable = false;
  std::size_t confusing = 0;
  bool pgd_success = false;
  bool mt_success = false;
};

McSampleOutcome mc_sample(const McLinearConfig& cfg, std::size_t index) {
  const std::size_t c = cfg.num_classes;
  const std::size_t d = cfg.input_dim;

  Rng draw(derive_seed(cfg.master_seed, index, 1));
  Mat weights(c, d);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < d; ++j)
      weights.at(i, j) = draw.uniform(-1.0, 1.0);
  Vec bias(c);
  for (std::size_t i = 0; i < c; ++i) bias[i] = draw.uniform(-1.0, 1.0);

  const Vec x(d, 0.0);
  const std::size_t y = argmax_lowest(bias);

  McSampleOutcome out;
  const LinearOracleReport oracle =
      analyze_linear(weights, bias, x, y, cfg.epsilon);
  if (!oracle.attackable) return out;
  out.attackable = true;
  out.confusing = oracle.confusing_classes.size();

  const Model model(d, {Layer::linear(weights, bias)});
  const ThreatSet set = LinfBall(x, cfg.epsilon);

  AttackConfig pgd;
  pgd.optimizer = cfg.optimizer;
  pgd.schedule = StepSchedule::constant(cfg.epsilon / 16.0);
  pgd.strategy = StrategyKind::FixedLoss;
  pgd.loss = SurrogateLoss::margin();
  pgd.steps = cfg.steps;
  pgd.restarts =
      cfg.pgd_restarts > 0 ? cfg.pgd_restarts : static_cast<long>(c) - 1;
  pgd.master_seed = derive_seed(cfg.master_seed, index, 2);
  pgd.early_stop = true;
  out.pgd_success = run_attack(model, x, y, set, pgd).success;

  AttackConfig mt = pgd;
  mt.strategy = StrategyKind::MultiTargeted;
  mt.top_t = -1;
  mt.restarts = 1;
  mt.master_seed = derive_seed(cfg.master_seed, index, 3);
  out.mt_success = run_attack(model, x, y, set, mt).success;
  return out;
}

}  // namespace

ExperimentReport mc_linear_experiment(const McLinearConfig& cfg) {
  if (cfg.num_classes < 2)
    throw InvalidInput("mc_linear: need at least 2 classes");
  if (cfg.samples < 1) throw InvalidInput("mc_linear: need at least 1 sample");

  std::vector<McSampleOutcome> outcomes(cfg.samples);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) \
    num_threads(std::max(cfg.threads, 1))
#endif
  for (long i = 0; i < static_cast<long>(cfg.samples); ++i)
    outcomes[static_cast<std::size_t>(i)] =
        mc_sample(cfg, static_cast<std::size_t>(i));

  ExperimentReport report;
  report.total_samples = cfg.samples;
  report.buckets.resize(cfg.num_classes - 1);
  for (std::size_t k = 0; k < report.buckets.size(); ++k)
    report.buckets[k].confusing_classes = k + 1;
  for (const McSampleOutcome& out : outcomes) {
    if (!out.attackable) continue;
    ++report.attackable_samples;
    McBucket& bucket = report.buckets[out.confusing - 1];
    ++bucket.attackable;
    if (out.pgd_success) {
      ++report.pgd_successes;
      ++bucket.pgd_successes;
    }
    if (out.mt_success) {
      ++report.mt_successes;
      ++bucket.mt_successes;
    }
  }
  return report;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out.precision(17);
  return out;
}

void mc_row(std::ostream& out, const char* attack,
            const std::string& confusing, std::size_t attackable,
            std::size_t successes) {
  const double rate =
      attackable == 0
          ? 0.0
          : static_cast<double>(successes) / static_cast<double>(attackable);
  out << attack << ',' << confusing << ',' << attackable << ',' << successes
      << ',' << rate << ',' << ci95_half_width(successes, attackable) << '\n';
}

}  // namespace

void write_mc_report_csv(const ExperimentReport& report,
                         const std::string& path) {
  std::ofstream out = open_out(path);
  out << "attack,confusing_classes,attackable,successes,success_rate,"
         "ci95_half_width\n";
  mc_row(out, "pgd", "all", report.attackable_samples, report.pgd_successes);
  mc_row(out, "mt", "all", report.attackable_samples, report.mt_successes);
  for (const McBucket& b : report.buckets) {
    const std::string k = std::to_string(b.confusing_classes);
    mc_row(out, "pgd", k, b.attackable, b.pgd_successes);
    mc_row(out, "mt", k, b.attackable, b.mt_successes);
  }
}

Model make_basin_model(double rho, double epsilon) {
  if (!(rho > 0.0 && rho < 1.0))
    throw InvalidInput("make_basin_model: rho must be in (0, 1)");
  if (!(epsilon > 0.0))
    throw InvalidInput("make_basin_model: epsilon must be > 0");
  // Logit differences against class 0, in t = x / epsilon:
  //   d1(t) = -s t + c1   (never positive; pulls ascent to -epsilon)
  //   d2(t) = 2 t + c2    (positive at +epsilon only)
  // They cross at tbar = 1 - 2 rho, so ascent on the margin succeeds
  // exactly from the fraction rho of the ball right of the crossover.
  const double tbar = 1.0 - 2.0 * rho;
  const double c2 = -(1.0 + tbar);
  const double s = 0.5 * (1.0 - tbar) / (1.0 + tbar);
  const double c1 = s * tbar + tbar - 1.0;
  Mat weights(3, 1);
  weights.at(0, 0) = 0.0;
  weights.at(1, 0) = -s / epsilon;
  weights.at(2, 0) = 2.0 / epsilon;
  return Model(1, {Layer::linear(weights, Vec{0.0, c1, c2})});
}

Model make_toy_model() {
  Mat weights(3, 1);
  weights.at(0, 0) = 0.0;
  weights.at(1, 0) = 0.5;
  weights.at(2, 0) = -2.0;
  return Model(1, {Layer::linear(weights, Vec{1.0, -0.7, 0.0})});
}

ToyReport toy_experiment(double rho, std::size_t trials, long restarts,
                         double epsilon, std::uint64_t master_seed,
                         int threads) {
  if (trials < 1) throw InvalidInput("toy_experiment: need >= 1 trial");
  const Model model = make_basin_model(rho, epsilon);
  const Vec x{0.0};
  const ThreatSet set = LinfBall(x, epsilon);

  ToyReport report;
  report.rho = rho;
  report.trials = trials;
  report.restarts = restarts;

  std::vector<unsigned char> pgd_flags(trials, 0), mt_flags(trials, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) \
    num_threads(std::max(threads, 1))
#endif
  for (long i = 0; i < static_cast<long>(trials); ++i) {
    AttackConfig pgd;
    pgd.optimizer.kind = OptimizerKind::Sign;
    pgd.schedule = StepSchedule::constant(epsilon / 16.0);
    pgd.strategy = StrategyKind::FixedLoss;
    pgd.loss = SurrogateLoss::margin();
    pgd.steps = 64;
    pgd.restarts = restarts;
    pgd.master_seed =
        derive_seed(master_seed, static_cast<std::uint64_t>(i), 2);
    pgd.early_stop = true;
    pgd_flags[static_cast<std::size_t>(i)] =
        run_attack(model, x, 0, set, pgd).success ? 1 : 0;

    AttackConfig mt = pgd;
    mt.strategy = StrategyKind::MultiTargeted;
    mt.restarts = 1;
    mt.master_seed =
        derive_seed(master_seed, static_cast<std::uint64_t>(i), 3);
    mt_flags[static_cast<std::size_t>(i)] =
        run_attack(model, x, 0, set, mt).success ? 1 : 0;
  }
  for (std::size_t i = 0; i < trials; ++i) {
    report.pgd_successes += pgd_flags[i];
    report.mt_successes += mt_flags[i];
  }
  return report;
}

void write_toy_report_csv(const ToyReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "rho,trials,restarts,attack,successes,success_rate,"
         "ci95_half_width\n";
  out << report.rho << ',' << report.trials << ',' << report.restarts
      << ",pgd," << report.pgd_successes << ',' << report.pgd_rate() << ','
      << ci95_half_width(report.pgd_successes, report.trials) << '\n';
  out << report.rho << ',' << report.trials << ',' << report.restarts
      << ",mt," << report.mt_successes << ',' << report.mt_rate() << ','
      << ci95_half_width(report.mt_successes, report.trials) << '\n';
}

Model make_nonconvex_model(int example) {
  Mat weights(3, 2);
  Vec bias(3, 0.0);
  if (example == 1) {
    // Margin ascent routes through the whole L to the optimum near
    // (0.7, 1); the lone useful logit difference pulls up-left and loses
    // roughly half the inits to the horizontal arm.
    weights.at(1, 0) = 1.0;
    weights.at(1, 1) = 1.0;
    bias[1] = -2.3;
    weights.at(2, 0) = -1.0;
    weights.at(2, 1) = 4.0;
    bias[2] = -3.25;
  } else if (example == 2) {
    // The margin follows a decoy difference toward a dead corner on most
    // of the set, while the targeted difference slides along the walls to
    // the optimum at (1, 1) from everywhere.
    weights.at(1, 0) = -1.0;
    weights.at(1, 1) = 1.0;
    bias[1] = -0.4;
    weights.at(2, 0) = 1.0;
    weights.at(2, 1) = 1.0;
    bias[2] = -1.9;
  } else {
    throw InvalidInput("make_nonconvex_model: example must be 1 or 2");
  }
  return Model(2, {Layer::linear(std::move(weights), std::move(bias))});
}

BoxUnion make_nonconvex_set() {
  return BoxUnion({Box{{0.0, 0.0}, {1.0, 0.3}}, Box{{0.7, 0.0}, {1.0, 1.0}}});
}

NonconvexReport nonconvex_experiment(std::size_t basin_resolution,
                                     int threads) {
  NonconvexReport report;
  const ThreatSet set = make_nonconvex_set();
  const OptimizerSpec sign{OptimizerKind::Sign, {}};
  const StepSchedule schedule = StepSchedule::constant(0.05);
  const long steps = 200;
  for (int example = 1; example <= 2; ++example) {
    NonconvexDemo demo{example == 1 ? "pgd_favored" : "mt_favored",
                       make_nonconvex_model(example),
                       make_nonconvex_set(),
                       0,
                       0.0,
                       0.0,
                       0.0,
                       {}};
    demo.pgd_fraction =
        basin_map(demo.model, set, 0, SurrogateLoss::margin(), sign, schedule,
                  steps, basin_resolution, threads)
            .fraction;
    demo.mt_fraction = basin_map_multitargeted(demo.model, set, 0, sign,
                                               schedule, steps,
                                               basin_resolution, threads)
                           .fraction;
    auto [margin, witness] = grid_oracle(demo.model, set, 0, 513);
    demo.grid_optimal_margin = margin;
    demo.grid_witness = witness;
    report.demos.push_back(std::move(demo));
  }
  return report;
}

void write_nonconvex_report_csv(const NonconvexReport& report,
                                const std::string& path) {
  std::ofstream out = open_out(path);
  out << "example,pgd_fraction,mt_fraction,winner,grid_optimal_margin\n";
  for (std::size_t i = 0; i < report.demos.size(); ++i) {
    const NonconvexDemo& d = report.demos[i];
    out << (i + 1) << ',' << d.pgd_fraction << ',' << d.mt_fraction << ','
        << (d.pgd_fraction > d.mt_fraction ? "pgd" : "mt") << ','
        << d.grid_optimal_margin << '\n';
  }
}

std::vector<LabeledExample> load_examples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open examples file: " + path);
  std::vector<LabeledExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    LabeledExample ex;
    try {
      if (j.at("id").is_string())
        ex.id = j.at("id").get<std::string>();
      else
        ex.id = std::to_string(j.at("id").get<long>());
      ex.input = j.at("input").get<Vec>();
      ex.label = j.at("label").get<std::size_t>();
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (ex.input.empty() || !all_finite(ex.input))
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": input must be a non-empty finite vector");
    examples.push_back(std::move(ex));
  }
  return examples;
}

const char* strategy_name(StrategyKind strategy) {
  switch (strategy) {
    case StrategyKind::FixedLoss:
      return "pgd";
    case StrategyKind::MultiTargeted:
      return "mt";
    case StrategyKind::PgdPlusMt:
      return "pgd_mt";
  }
  return "unknown";
}

BatchSummary attack_command(const Model& model,
                            const std::vector<LabeledExample>& examples,
                            double epsilon, bool box, double box_lo,
                            double box_hi, const AttackConfig& config,
                            const std::string& attack_name,
                            const std::string& out_path) {
  if (examples.empty()) throw InvalidInput("attack: no examples");
  for (const LabeledExample& ex : examples) {
    if (ex.input.size() != model.input_dim())
      throw InvalidInput("attack: example " + ex.id +
                         " dimension does not match the model");
    if (ex.label >= model.num_classes())
      throw InvalidInput("attack: example " + ex.id + " label out of range");
  }

  std::vector<json> records(examples.size());
  std::vector<unsigned char> successes(examples.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) \
    num_threads(std::max(config.threads, 1))
#endif
  for (long i = 0; i < static_cast<long>(examples.size()); ++i) {
    const LabeledExample& ex = examples[static_cast<std::size_t>(i)];
    std::optional<Box> clip;
    if (box)
      clip = Box{Vec(ex.input.size(), box_lo), Vec(ex.input.size(), box_hi)};
    const ThreatSet set = LinfBall(ex.input, epsilon, clip);
    AttackConfig local = config;
    local.threads = 1;  // parallelism lives across examples here
    local.master_seed =
        derive_seed(config.master_seed, static_cast<std::uint64_t>(i), 17);
    const AttackResult result =
        run_attack(model, ex.input, ex.label, set, local);
    json rec;
    rec["example_id"] = ex.id;
    rec["attack"] = attack_name;
    rec["seed"] = local.master_seed;
    rec["success"] = result.success;
    rec["best_margin"] = result.best_margin;
    rec["best_input"] = result.best_input;
    rec["grad_evals"] = result.grad_evals;
    rec["restarts_run"] = result.records.size();
    records[static_cast<std::size_t>(i)] = std::move(rec);
    successes[static_cast<std::size_t>(i)] = result.success ? 1 : 0;
  }

  std::ofstream out = open_out(out_path);
  for (const json& rec : records) out << rec.dump() << '\n';

  BatchSummary summary;
  summary.examples = examples.size();
  for (unsigned char s : successes) summary.attacked_successfully += s;
  summary.accuracy_under_attack =
      1.0 - static_cast<double>(summary.attacked_successfully) /
                static_cast<double>(summary.examples);
  return summary;
}

BatchSummary aggregate_result_files(const std::vector<std::string>& paths,
                                    const std::string& out_path) {
  if (paths.empty()) throw InvalidInput("aggregate: no input files");
  std::vector<std::string> order;  // first-seen example order
  std::map<std::string, json> best;
  for (const std::string& path : paths) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception& e) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": " +
                         e.what());
      }
      const std::string id = rec.at("example_id").get<std::string>();
      auto it = best.find(id);
      if (it == best.end()) {
        order.push_back(id);
        best.emplace(id, std::move(rec));
        continue;
      }
      const bool s_new = rec.at("success").get<bool>();
      const bool s_old = it->second.at("success").get<bool>();
      const double m_new = rec.at("best_margin").get<double>();
      const double m_old = it->second.at("best_margin").get<double>();
      if (s_new != s_old ? s_new : m_new > m_old) it->second = std::move(rec);
    }
  }

  std::ofstream out = open_out(out_path);
  BatchSummary summary;
  summary.examples = order.size();
  for (const std::string& id : order) {
    json rec = best.at(id);
    rec["attack"] = "aggregated";
    if (rec.at("success").get<bool>()) ++summary.attacked_successfully;
    out << rec.dump() << '\n';
  }
  summary.accuracy_under_attack =
      summary.examples == 0
          ? 0.0
          : 1.0 - static_cast<double>(summary.attacked_successfully) /
                      static_cast<double>(summary.examples);
  return summary;
}

}  // namespace mta
