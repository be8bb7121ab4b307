// Command-line front end: batch attacks, the shipped experiments and the
// analysis probes. See README.md for the file formats.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mta/analysis.hpp"
#include "mta/engine.hpp"
#include "mta/errors.hpp"
#include "mta/harness.hpp"
#include "mta/model.hpp"

using namespace mta;

namespace {

OptimizerSpec parse_optimizer(const std::string& name) {
  if (name == "sign") return {OptimizerKind::Sign, {}};
  if (name == "plain") return {OptimizerKind::Plain, {}};
  if (name == "l2norm") return {OptimizerKind::L2Norm, {}};
  if (name == "adam") return {OptimizerKind::Adam, {}};
  throw InvalidInput("unknown optimizer '" + name +
                     "' (expected sign, plain, l2norm or adam)");
}

SurrogateLoss parse_loss(const std::string& name) {
  if (name == "margin") return SurrogateLoss::margin();
  if (name == "xent") return SurrogateLoss::cross_entropy();
  const std::string prefix = "logit_diff:";
  if (name.rfind(prefix, 0) == 0) {
    try {
      return SurrogateLoss::logit_diff(std::stoul(name.substr(prefix.size())));
    } catch (const std::exception&) {
      throw InvalidInput("bad logit_diff target in '" + name + "'");
    }
  }
  throw InvalidInput("unknown loss '" + name +
                     "' (expected margin, xent or logit_diff:<t>)");
}

StrategyKind parse_strategy(const std::string& name) {
  if (name == "pgd") return StrategyKind::FixedLoss;
  if (name == "mt") return StrategyKind::MultiTargeted;
  if (name == "pgd_mt") return StrategyKind::PgdPlusMt;
  throw InvalidInput("unknown attack '" + name +
                     "' (expected pgd, mt or pgd_mt)");
}

// "constant:A", "default:A", or "A;frac,mult;frac,mult;..."
StepSchedule parse_schedule(const std::string& text) {
  try {
    if (text.rfind("constant:", 0) == 0)
      return StepSchedule::constant(std::stod(text.substr(9)));
    if (text.rfind("default:", 0) == 0)
      return StepSchedule::default_decay(std::stod(text.substr(8)));
    StepSchedule schedule;
    std::istringstream in(text);
    std::string part;
    if (!std::getline(in, part, ';')) throw InvalidInput("empty schedule");
    schedule.initial = std::stod(part);
    while (std::getline(in, part, ';')) {
      const std::size_t comma = part.find(',');
      if (comma == std::string::npos)
        throw InvalidInput("schedule piece '" + part +
                           "' is not frac,mult");
      schedule.decay.emplace_back(std::stod(part.substr(0, comma)),
                                  std::stod(part.substr(comma + 1)));
    }
    return schedule;
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse schedule '" + text + "'");
  }
}

int parse_targets(const std::string& text) {
  if (text == "all") return -1;
  try {
    const int t = std::stoi(text);
    if (t < 1) throw InvalidInput("--targets must be >= 1 or 'all'");
    return t;
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidInput("bad --targets value '" + text + "'");
  }
}

// Gathers the attack flags shared by several subcommands. The JSON config
// file mirrors the AttackConfig field names; explicit flags win.
struct AttackFlags {
  std::string config_path;
  std::string attack = "pgd";
  std::string loss = "margin";
  std::string optimizer = "sign";
  std::string schedule = "default:0.1";
  std::string targets = "all";
  long steps = 100;
  long restarts = 1;
  bool total_budget = false;
  std::uint64_t seed = 0;
  bool early_stop = false;
  int threads = 1;

  CLI::Option* attack_opt = nullptr;
  CLI::Option* loss_opt = nullptr;
  CLI::Option* optimizer_opt = nullptr;
  CLI::Option* schedule_opt = nullptr;
  CLI::Option* targets_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* restarts_opt = nullptr;
  CLI::Option* total_budget_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* early_stop_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "JSON config mirroring the attack settings");
    attack_opt = cmd->add_option("--attack", attack, "pgd, mt or pgd_mt");
    loss_opt = cmd->add_option("--loss", loss,
                               "margin, xent or logit_diff:<t> (pgd only)");
    optimizer_opt =
        cmd->add_option("--optimizer", optimizer, "sign, plain, l2norm, adam");
    schedule_opt = cmd->add_option(
        "--schedule", schedule,
        "constant:<a>, default:<a> or <a>;<frac>,<mult>;...");
    targets_opt = cmd->add_option("--targets", targets,
                                  "target count for mt, or 'all'");
    steps_opt = cmd->add_option("--steps", steps, "ascent steps per restart");
    restarts_opt = cmd->add_option("--restarts", restarts,
                                   "restarts (per target for mt)");
    total_budget_opt =
        cmd->add_flag("--total-budget", total_budget,
                      "treat --restarts as the total mt budget");
    seed_opt = cmd->add_option("--seed", seed, "master seed");
    early_stop_opt = cmd->add_flag("--early-stop", early_stop,
                                   "stop a restart at the first success");
    threads_opt = cmd->add_option("--threads", threads, "worker threads");
  }

  AttackConfig build() const {
    AttackConfig cfg;
    // File values first, then any flag the user actually passed.
    std::string attack_v = attack, loss_v = loss, optimizer_v = optimizer,
                schedule_v = schedule, targets_v = targets;
    cfg.steps = steps;
    cfg.restarts = restarts;
    cfg.restarts_is_total_budget = total_budget;
    cfg.master_seed = seed;
    cfg.early_stop = early_stop;
    cfg.threads = threads;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot open config file: " + config_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(config_path + ": " + e.what());
      }
      try {
        if (j.contains("strategy") && !attack_opt->count())
          attack_v = j["strategy"].get<std::string>();
        if (j.contains("loss") && !loss_opt->count())
          loss_v = j["loss"].get<std::string>();
        if (j.contains("optimizer") && !optimizer_opt->count())
          optimizer_v = j["optimizer"].get<std::string>();
        if (j.contains("schedule") && !schedule_opt->count())
          schedule_v = j["schedule"].get<std::string>();
        if (j.contains("top_t") && !targets_opt->count())
          targets_v = j["top_t"].is_string()
                          ? j["top_t"].get<std::string>()
                          : std::to_string(j["top_t"].get<int>());
        if (j.contains("steps") && !steps_opt->count())
          cfg.steps = j["steps"].get<long>();
        if (j.contains("restarts") && !restarts_opt->count())
          cfg.restarts = j["restarts"].get<long>();
        if (j.contains("restarts_is_total_budget") &&
            !total_budget_opt->count())
          cfg.restarts_is_total_budget =
              j["restarts_is_total_budget"].get<bool>();
        if (j.contains("master_seed") && !seed_opt->count())
          cfg.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("early_stop") && !early_stop_opt->count())
          cfg.early_stop = j["early_stop"].get<bool>();
        if (j.contains("threads") && !threads_opt->count())
          cfg.threads = j["threads"].get<int>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(config_path + ": " + e.what());
      }
    }
    cfg.strategy = parse_strategy(attack_v);
    cfg.loss = parse_loss(loss_v);
    cfg.optimizer = parse_optimizer(optimizer_v);
    cfg.schedule = parse_schedule(schedule_v);
    cfg.top_t = parse_targets(targets_v);
    return cfg;
  }

  std::string attack_name() const { return attack; }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected-ascent adversarial testing for small classifiers"};
  app.require_subcommand(1);

  int rc = 0;
  std::function<void()> action;

  // attack run / attack aggregate
  CLI::App* attack = app.add_subcommand("attack", "batch attacks");
  attack->require_subcommand(1);

  CLI::App* run = attack->add_subcommand("run", "attack an examples file");
  static std::string run_model, run_examples, run_out = "results.jsonl";
  static double run_epsilon = 0.1, run_box_lo = 0.0, run_box_hi = 1.0;
  static bool run_box = false;
  static AttackFlags run_flags;
  run->add_option("--model", run_model, "model JSON file")->required();
  run->add_option("--examples", run_examples, "examples JSONL file")
      ->required();
  run->add_option("--epsilon", run_epsilon, "l-inf radius")->required();
  run->add_flag("--box", run_box, "clip coordinates to [--box-lo, --box-hi]");
  run->add_option("--box-lo", run_box_lo, "box lower bound");
  run->add_option("--box-hi", run_box_hi, "box upper bound");
  run->add_option("--out", run_out, "output JSONL path");
  run_flags.add_to(run);
  run->callback([&] {
    action = [&] {
      const Model model = load_model(run_model);
      const std::vector<LabeledExample> examples =
          load_examples(run_examples);
      const AttackConfig cfg = run_flags.build();
      const BatchSummary s =
          attack_command(model, examples, run_epsilon, run_box, run_box_lo,
                         run_box_hi, cfg, strategy_name(cfg.strategy),
                         run_out);
      std::cout << "examples: " << s.examples << "\nattacked: "
                << s.attacked_successfully << "\naccuracy under attack: "
                << s.accuracy_under_attack << "\nresults: " << run_out
                << std::endl;
    };
  });

  CLI::App* agg =
      attack->add_subcommand("aggregate", "worst-case merge of result files");
  static std::vector<std::string> agg_inputs;
  static std::string agg_out = "aggregated.jsonl";
  agg->add_option("inputs", agg_inputs, "result files to merge")->required();
  agg->add_option("--out", agg_out, "output JSONL path");
  agg->callback([&] {
    action = [&] {
      const BatchSummary s = aggregate_result_files(agg_inputs, agg_out);
      std::cout << "examples: " << s.examples << "\nattacked: "
                << s.attacked_successfully << "\naccuracy under attack: "
                << s.accuracy_under_attack << "\nresults: " << agg_out
                << std::endl;
    };
  });

  // experiment mc-linear / toy / nonconvex
  CLI::App* experiment = app.add_subcommand("experiment", "shipped studies");
  experiment->require_subcommand(1);

  CLI::App* mc = experiment->add_subcommand(
      "mc-linear", "random linear classifiers, pgd vs mt");
  static McLinearConfig mc_cfg;
  static std::string mc_out = "mc_linear.csv", mc_optimizer = "sign";
  mc->add_option("--classes", mc_cfg.num_classes, "number of classes");
  mc->add_option("--dim", mc_cfg.input_dim, "input dimension");
  mc->add_option("--epsilon", mc_cfg.epsilon, "l-inf radius");
  mc->add_option("--samples", mc_cfg.samples, "number of sampled models");
  mc->add_option("--restarts", mc_cfg.pgd_restarts,
                 "pgd restarts (0 means classes - 1)");
  mc->add_option("--steps", mc_cfg.steps, "ascent steps per restart");
  mc->add_option("--optimizer", mc_optimizer, "sign, plain, l2norm, adam");
  mc->add_option("--seed", mc_cfg.master_seed, "master seed");
  mc->add_option("--threads", mc_cfg.threads, "worker threads");
  mc->add_option("--out", mc_out, "summary CSV path");
  mc->callback([&] {
    action = [&] {
      mc_cfg.optimizer = parse_optimizer(mc_optimizer);
      const ExperimentReport r = mc_linear_experiment(mc_cfg);
      write_mc_report_csv(r, mc_out);
      std::cout << "attackable: " << r.attackable_samples << "/"
                << r.total_samples << "\npgd success rate: " << r.pgd_rate()
                << "\nmt success rate: " << r.mt_rate()
                << "\nsummary: " << mc_out << std::endl;
    };
  });

  CLI::App* toy = experiment->add_subcommand(
      "toy", "1-D basin model with tunable success fraction");
  static double toy_rho = 0.5, toy_epsilon = 1.0;
  static std::size_t toy_trials = 10000;
  static long toy_restarts = 2;
  static std::uint64_t toy_seed = 0;
  static int toy_threads = 1;
  static std::string toy_out = "toy.csv";
  toy->add_option("--rho", toy_rho, "success basin fraction in (0, 1)");
  toy->add_option("--trials", toy_trials, "number of trials");
  toy->add_option("--restarts", toy_restarts, "pgd restarts per trial");
  toy->add_option("--epsilon", toy_epsilon, "l-inf radius");
  toy->add_option("--seed", toy_seed, "master seed");
  toy->add_option("--threads", toy_threads, "worker threads");
  toy->add_option("--out", toy_out, "summary CSV path");
  toy->callback([&] {
    action = [&] {
      const ToyReport r = toy_experiment(toy_rho, toy_trials, toy_restarts,
                                         toy_epsilon, toy_seed, toy_threads);
      write_toy_report_csv(r, toy_out);
      std::cout << "pgd success rate: " << r.pgd_rate()
                << "\nmt success rate: " << r.mt_rate()
                << "\nsummary: " << toy_out << std::endl;
    };
  });

  CLI::App* ncx = experiment->add_subcommand(
      "nonconvex", "L-shaped set demos with opposite winners");
  static std::size_t ncx_resolution = 101;
  static int ncx_threads = 1;
  static std::string ncx_out = "nonconvex.csv";
  ncx->add_option("--resolution", ncx_resolution, "basin grid resolution");
  ncx->add_option("--threads", ncx_threads, "worker threads");
  ncx->add_option("--out", ncx_out, "summary CSV path");
  ncx->callback([&] {
    action = [&] {
      const NonconvexReport r =
          nonconvex_experiment(ncx_resolution, ncx_threads);
      write_nonconvex_report_csv(r, ncx_out);
      for (std::size_t i = 0; i < r.demos.size(); ++i)
        std::cout << "demo " << (i + 1) << " (" << r.demos[i].name
                  << "): pgd " << r.demos[i].pgd_fraction << ", mt "
                  << r.demos[i].mt_fraction << ", optimum "
                  << r.demos[i].grid_optimal_margin << std::endl;
      std::cout << "summary: " << ncx_out << std::endl;
    };
  });

  // analyze linearity / landscape / basin
  CLI::App* analyze = app.add_subcommand("analyze", "model probes");
  analyze->require_subcommand(1);

  CLI::App* lin = analyze->add_subcommand(
      "linearity", "singular value spectra of stacked input gradients");
  static std::string lin_model, lin_out = "linearity.csv";
  static std::vector<double> lin_input;
  static double lin_epsilon = 0.1;
  static std::size_t lin_samples = 128;
  static std::uint64_t lin_seed = 0;
  lin->add_option("--model", lin_model, "model JSON file")->required();
  lin->add_option("--input", lin_input, "nominal input (defaults to zeros)");
  lin->add_option("--epsilon", lin_epsilon, "l-inf radius")->required();
  lin->add_option("--samples", lin_samples, "gradient samples");
  lin->add_option("--seed", lin_seed, "sampling seed");
  lin->add_option("--out", lin_out, "spectrum CSV path");
  lin->callback([&] {
    action = [&] {
      const Model model = load_model(lin_model);
      Vec x = lin_input.empty() ? Vec(model.input_dim(), 0.0) : lin_input;
      Rng rng(lin_seed);
      const SpectrumReport r =
          linearity_spectrum(model, LinfBall(x, lin_epsilon), lin_samples,
                             rng);
      write_spectrum_csv(r, lin_out);
      std::cout << "average second singular value: "
                << (r.average.size() > 1 ? r.average[1] : 0.0)
                << "\nspectrum: " << lin_out << std::endl;
    };
  });

  CLI::App* land = analyze->add_subcommand(
      "landscape", "logit values on an attack-aligned plane");
  static std::string land_model, land_out = "landscape.csv";
  static std::vector<double> land_input;
  static double land_epsilon = 0.1;
  static std::size_t land_label = 0, land_resolution = 65;
  static std::uint64_t land_dir_seed = 0;
  static AttackFlags land_flags;
  land->add_option("--model", land_model, "model JSON file")->required();
  land->add_option("--input", land_input, "nominal input")->required();
  land->add_option("--label", land_label, "true class");
  land->add_option("--epsilon", land_epsilon, "l-inf radius")->required();
  land->add_option("--resolution", land_resolution, "grid resolution");
  land->add_option("--direction-seed", land_dir_seed,
                   "seed of the random plane direction");
  land->add_option("--out", land_out, "landscape CSV path");
  land_flags.add_to(land);
  land->callback([&] {
    action = [&] {
      const Model model = load_model(land_model);
      const LogitLandscape r =
          logit_landscape(model, land_input, land_label, land_epsilon,
                          land_resolution, land_dir_seed, land_flags.build());
      write_landscape_csv(r, land_out);
      std::cout << "landscape: " << land_out << std::endl;
    };
  });

  CLI::App* basin = analyze->add_subcommand(
      "basin", "grid map of ascent success by initialization");
  static std::string basin_model, basin_out = "basin.csv";
  static std::vector<double> basin_input;
  static double basin_epsilon = 0.1;
  static std::size_t basin_label = 0, basin_resolution = 101;
  static AttackFlags basin_flags;
  basin->add_option("--model", basin_model, "model JSON file")->required();
  basin->add_option("--input", basin_input, "nominal input")->required();
  basin->add_option("--label", basin_label, "true class");
  basin->add_option("--epsilon", basin_epsilon, "l-inf radius")->required();
  basin->add_option("--resolution", basin_resolution, "grid resolution");
  basin->add_option("--out", basin_out, "basin CSV path");
  basin_flags.add_to(basin);
  basin->callback([&] {
    action = [&] {
      const Model model = load_model(basin_model);
      const AttackConfig cfg = basin_flags.build();
      const ThreatSet set = LinfBall(basin_input, basin_epsilon);
      BasinMap map;
      if (cfg.strategy == StrategyKind::MultiTargeted)
        map = basin_map_multitargeted(model, set, basin_label, cfg.optimizer,
                                      cfg.schedule, cfg.steps,
                                      basin_resolution, cfg.threads);
      else
        map = basin_map(model, set, basin_label, cfg.loss, cfg.optimizer,
                        cfg.schedule, cfg.steps, basin_resolution,
                        cfg.threads);
      write_basin_csv(map, basin_out);
      std::cout << "success fraction: " << map.fraction
                << "\nbasin: " << basin_out << std::endl;
    };
  });

  try {
    app.parse(argc, argv);
    if (action) action();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return rc;
}
