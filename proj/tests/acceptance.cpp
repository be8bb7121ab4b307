// End-to-end acceptance checks. Each numbered criterion prints one
// pass/fail line; the exit code is the number of failures.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mta/analysis.hpp"
#include "mta/engine.hpp"
#include "mta/harness.hpp"
#include "mta/oracle.hpp"
#include "mta/rng.hpp"
#include "test_util.hpp"

using namespace mta;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::cout << "criterion " << criterion << ": " << (ok ? "PASS" : "FAIL")
            << "  " << detail << std::endl;
  if (!ok) ++failures;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Monte-Carlo headline rates for C=3, d=1, eps=1. The expected rates
// are the long-run values of this exact sampling scheme, frozen from an
// independent closed-form simulation of the 1-D ascent dynamics (two
// uniform restarts on the convex margin): 0.9697 overall, 0.9551 with one
// confusing class, exactly 1 with two.
void criterion_1() {
  McLinearConfig cfg;
  cfg.samples = 100000;
  cfg.master_seed = 2024;
  const ExperimentReport r = mc_linear_experiment(cfg);
  const double overall = r.pgd_rate();
  const double one =
      static_cast<double>(r.buckets[0].pgd_successes) /
      static_cast<double>(r.buckets[0].attackable);
  const bool two_exact =
      r.buckets[1].pgd_successes == r.buckets[1].attackable;
  const bool mt_exact = r.mt_successes == r.attackable_samples;
  std::ostringstream d;
  d << "pgd overall " << overall << " (want 0.9697 +/- 0.003), one-confusing "
    << one << " (want 0.9551 +/- 0.004), two-confusing exact "
    << (two_exact ? "yes" : "no") << ", mt exact "
    << (mt_exact ? "yes" : "no");
  report(1,
         std::fabs(overall - 0.9697) <= 0.003 &&
             std::fabs(one - 0.9551) <= 0.004 && two_exact && mt_exact,
         d.str());
}

// 2. Tunable toy basins with two restarts.
void criterion_2() {
  const ToyReport half = toy_experiment(0.5, 10000, 2, 1.0, 31);
  const ToyReport low = toy_experiment(0.1340, 10000, 2, 1.0, 32);
  std::ostringstream d;
  d << "rho 0.5 pgd " << half.pgd_rate() << " (want 0.75 +/- 0.01), rho "
    << "0.134 pgd " << low.pgd_rate() << " (want 0.25 +/- 0.01), mt "
    << half.mt_rate() << " and " << low.mt_rate();
  report(2,
         std::fabs(half.pgd_rate() - 0.75) <= 0.01 &&
             std::fabs(low.pgd_rate() - 0.25) <= 0.01 &&
             half.mt_rate() == 1.0 && low.mt_rate() == 1.0,
         d.str());
}

// 3. Exactness of per-target sign ascent against the analytic oracle.
void criterion_3() {
  Rng rng(404);
  std::size_t attackable = 0, exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = 3 + static_cast<std::size_t>(rng.uniform(0.0, 7.999));
    const std::size_t dim =
        1 + static_cast<std::size_t>(rng.uniform(0.0, 4.999));
    std::vector<double> w(c * dim);
    Vec b(c), x(dim);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    for (auto& v : b) v = rng.uniform(-1.0, 1.0);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const Model model(dim, {Layer::linear(Mat(c, dim, w), b)});
    const Vec z = model.forward(x);
    std::size_t y = 0;
    for (std::size_t i = 1; i < c; ++i)
      if (z[i] > z[y]) y = i;
    const double eps = rng.uniform(0.1, 1.0);
    const LinearOracleReport oracle = analyze_linear_model(model, x, y, eps);
    if (!oracle.attackable) continue;
    ++attackable;

    AttackConfig cfg;
    cfg.optimizer.kind = OptimizerKind::Sign;
    cfg.schedule = StepSchedule::constant(eps / 16.0);
    cfg.strategy = StrategyKind::MultiTargeted;
    cfg.steps = 64;
    cfg.restarts = 1;
    cfg.master_seed = static_cast<std::uint64_t>(trial);
    const AttackResult res =
        run_attack(model, x, y, LinfBall(x, eps), cfg);
    if (std::fabs(res.best_margin - oracle.optimal_margin) <=
        1e-9 * std::max(1.0, std::fabs(oracle.optimal_margin)))
      ++exact;
  }

  // Piecewise model that is linear over the ball: large positive hidden
  // biases keep every relu active, so the effective map is W2 W1 + known
  // bias and the same oracle applies.
  const double eps = 0.5;
  Rng prng(405);
  const std::size_t dim = 3, hidden = 4, c = 4;
  std::vector<double> w1(hidden * dim), w2(c * hidden);
  for (auto& v : w1) v = prng.uniform(-1.0, 1.0);
  for (auto& v : w2) v = prng.uniform(-1.0, 1.0);
  const Mat m1(hidden, dim, w1), m2(c, hidden, w2);
  Vec x(dim);
  for (auto& v : x) v = prng.uniform(-0.5, 0.5);
  Vec b1(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    double reach = 0.0;
    for (std::size_t k = 0; k < dim; ++k)
      reach += std::fabs(m1.at(j, k)) * (std::fabs(x[k]) + eps);
    b1[j] = reach + 0.1;
  }
  Vec b2(c, 0.0);
  const Model piecewise(
      dim, {Layer::linear(m1, b1), Layer::relu(), Layer::linear(m2, b2)});

  Mat eff(c, dim);
  Vec effb(c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < hidden; ++j)
        s += m2.at(i, j) * m1.at(j, k);
      eff.at(i, k) = s;
    }
    for (std::size_t j = 0; j < hidden; ++j)
      effb[i] += m2.at(i, j) * b1[j];
  }
  const Vec z = piecewise.forward(x);
  std::size_t y = 0;
  for (std::size_t i = 1; i < c; ++i)
    if (z[i] > z[y]) y = i;
  const LinearOracleReport oracle = analyze_linear(eff, effb, x, y, eps);
  AttackConfig cfg;
  cfg.optimizer.kind = OptimizerKind::Sign;
  cfg.schedule = StepSchedule::constant(eps / 16.0);
  cfg.strategy = StrategyKind::MultiTargeted;
  cfg.steps = 64;
  cfg.restarts = 1;
  const AttackResult res =
      run_attack(piecewise, x, y, LinfBall(x, eps), cfg);
  const bool piecewise_exact =
      std::fabs(res.best_margin - oracle.optimal_margin) <=
      1e-9 * std::max(1.0, std::fabs(oracle.optimal_margin));

  std::ostringstream d;
  d << exact << "/" << attackable
    << " attackable linear models matched to 1e-9; piecewise model "
    << (piecewise_exact ? "matched" : "missed");
  report(3, attackable > 0 && exact == attackable && piecewise_exact, d.str());
}

// 4. Input gradients against central finite differences.
void criterion_4() {
  Rng rng(606);
  double worst = 0.0;
  int models = 0;
  while (models < 100) {
    const LayerKind act = models % 3 == 0   ? LayerKind::Relu
                          : models % 3 == 1 ? LayerKind::Sigmoid
                                            : LayerKind::Tanh;
    const std::size_t dim =
        1 + static_cast<std::size_t>(rng.uniform(0.0, 3.999));
    const std::size_t depth =
        1 + static_cast<std::size_t>(rng.uniform(0.0, 2.999));
    const Model model =
        testutil::random_mlp(rng, dim, depth, 16, 3, act);
    Vec point(dim);
    for (auto& v : point) v = rng.uniform(-1.0, 1.0);
    if (act == LayerKind::Relu && testutil::near_relu_kink(model, point))
      continue;
    Vec cot(3);
    for (auto& v : cot) v = rng.uniform(-1.0, 1.0);
    const Vec g = model.input_gradient(point, cot);
    const Vec fd = testutil::fd_input_gradient(model, point, cot);
    worst = std::max(worst, testutil::max_rel_error(g, fd));
    ++models;
  }
  std::ostringstream d;
  d << "100 random mlps, max relative gradient error " << worst
    << " (want <= 1e-4)";
  report(4, worst <= 1e-4, d.str());
}

// 5. Success rate is monotone in the confusing-class count.
void criterion_5() {
  bool ok = true;
  std::ostringstream d;
  for (std::size_t c : {3u, 4u, 5u}) {
    McLinearConfig cfg;
    cfg.num_classes = c;
    cfg.samples = 10000;
    cfg.master_seed = 700 + c;
    const ExperimentReport r = mc_linear_experiment(cfg);
    double prev = -1.0;
    for (const McBucket& b : r.buckets) {
      const double rate =
          b.attackable == 0
              ? 1.0
              : static_cast<double>(b.pgd_successes) /
                    static_cast<double>(b.attackable);
      if (rate < prev) ok = false;
      prev = rate;
      d << "C" << c << " k" << b.confusing_classes << " " << rate << " (+/- "
        << ci95_half_width(b.pgd_successes, b.attackable) << ") ";
    }
    if (r.buckets.back().pgd_successes != r.buckets.back().attackable)
      ok = false;
  }
  report(5, ok, d.str());
}

// 6. Opposite winners on the two non-convex demos.
void criterion_6() {
  const NonconvexReport r = nonconvex_experiment(101, 1);
  const NonconvexDemo& a = r.demos[0];
  const NonconvexDemo& b = r.demos[1];
  const bool ok = a.pgd_fraction - a.mt_fraction >= 0.05 &&
                  b.mt_fraction - b.pgd_fraction >= 0.05 &&
                  a.grid_optimal_margin > 0.0 && b.grid_optimal_margin > 0.0;
  std::ostringstream d;
  d << "demo 1 pgd " << a.pgd_fraction << " vs mt " << a.mt_fraction
    << " (optimum " << a.grid_optimal_margin << "), demo 2 pgd "
    << b.pgd_fraction << " vs mt " << b.mt_fraction << " (optimum "
    << b.grid_optimal_margin << ")";
  report(6, ok, d.str());
}

// 7. Linearity probe on a globally-linear model.
void criterion_7() {
  Rng rng(808);
  std::vector<double> w(4 * 3);
  Vec b(4);
  for (auto& v : w) v = rng.uniform(-1.0, 1.0);
  for (auto& v : b) v = rng.uniform(-1.0, 1.0);
  const Model model(3, {Layer::linear(Mat(4, 3, w), b)});
  Rng sample_rng(809);
  const SpectrumReport r = linearity_spectrum(
      model, LinfBall(Vec{0.0, 0.0, 0.0}, 1.0), 50, sample_rng);
  bool ok = true;
  double tail = 0.0;
  for (const auto& sv : r.per_logit) {
    if (sv.front() != 1.0) ok = false;
    for (std::size_t i = 1; i < sv.size(); ++i)
      if (sv[i] > sv[i - 1]) ok = false;
    tail = std::max(tail, sv[1]);
  }
  std::ostringstream d;
  d << "largest second singular value " << tail << " (want <= 1e-6)";
  report(7, ok && tail <= 1e-6, d.str());
}

// 8. Worst-case aggregation never reports higher accuracy.
void criterion_8() {
  const Model model = make_toy_model();
  std::vector<LabeledExample> examples;
  for (int i = 0; i < 40; ++i)
    examples.push_back({"e" + std::to_string(i), {-1.0 + 0.05 * i}, 0});

  AttackConfig base;
  base.optimizer.kind = OptimizerKind::Sign;
  base.schedule = StepSchedule::constant(0.75 / 16.0);
  base.steps = 64;
  base.restarts = 1;
  base.master_seed = 900;

  AttackConfig pgd = base;
  pgd.strategy = StrategyKind::FixedLoss;
  AttackConfig mt = base;
  mt.strategy = StrategyKind::MultiTargeted;
  AttackConfig both = base;
  both.strategy = StrategyKind::PgdPlusMt;

  const BatchSummary s1 = attack_command(model, examples, 0.75, false, 0.0,
                                         0.0, pgd, "pgd", "acc_pgd.jsonl");
  const BatchSummary s2 = attack_command(model, examples, 0.75, false, 0.0,
                                         0.0, mt, "mt", "acc_mt.jsonl");
  const BatchSummary s3 =
      attack_command(model, examples, 0.75, false, 0.0, 0.0, both, "pgd_mt",
                     "acc_both.jsonl");
  const BatchSummary agg = aggregate_result_files(
      {"acc_pgd.jsonl", "acc_mt.jsonl", "acc_both.jsonl"}, "acc_agg.jsonl");
  const double lowest =
      std::min({s1.accuracy_under_attack, s2.accuracy_under_attack,
                s3.accuracy_under_attack});
  std::ostringstream d;
  d << "aggregated accuracy " << agg.accuracy_under_attack
    << " <= min individual " << lowest;
  report(8, agg.accuracy_under_attack <= lowest + 1e-12, d.str());
  for (const char* f :
       {"acc_pgd.jsonl", "acc_mt.jsonl", "acc_both.jsonl", "acc_agg.jsonl"})
    std::remove(f);
}

// 9. Bit-identical output across thread counts.
void criterion_9() {
  const Model model = make_toy_model();
  std::vector<LabeledExample> examples;
  for (int i = 0; i < 12; ++i)
    examples.push_back({"e" + std::to_string(i), {-0.9 + 0.15 * i}, 0});
  AttackConfig cfg;
  cfg.optimizer.kind = OptimizerKind::Sign;
  cfg.schedule = StepSchedule::constant(1.0 / 16.0);
  cfg.strategy = StrategyKind::MultiTargeted;
  cfg.steps = 64;
  cfg.restarts = 2;
  cfg.master_seed = 1001;

  std::vector<std::string> outputs;
  for (int threads : {1, 4, 16}) {
    cfg.threads = threads;
    const std::string path =
        "det_" + std::to_string(threads) + ".jsonl";
    attack_command(model, examples, 1.0, false, 0.0, 0.0, cfg, "mt", path);
    outputs.push_back(slurp(path));
    std::remove(path.c_str());
  }
  const bool ok = outputs[0] == outputs[1] && outputs[1] == outputs[2] &&
                  !outputs[0].empty();
  report(9, ok,
         ok ? "identical JSONL bytes at 1, 4 and 16 threads"
            : "outputs differ across thread counts");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  std::cout << (failures == 0 ? "all criteria passed"
                              : "some criteria failed")
            << std::endl;
  return failures;
}
