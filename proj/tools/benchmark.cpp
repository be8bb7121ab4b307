// Timing comparison of the serial path against the OpenMP path on the
// Monte-Carlo linear experiment and a restart-heavy batch attack.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mta/engine.hpp"
#include "mta/harness.hpp"

using namespace mta;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double time_mc(std::size_t samples, int threads) {
  McLinearConfig cfg;
  cfg.samples = samples;
  cfg.master_seed = 7;
  cfg.threads = threads;
  const auto start = Clock::now();
  const ExperimentReport report = mc_linear_experiment(cfg);
  const double elapsed = seconds_since(start);
  std::cout << "  mc-linear " << samples << " samples, " << threads
            << (threads == 1 ? " thread:  " : " threads: ") << elapsed
            << " s  (pgd rate " << report.pgd_rate() << ")\n";
  return elapsed;
}

double time_restarts(long restarts, int threads) {
  const Model model = make_toy_model();
  AttackConfig cfg;
  cfg.steps = 2000;
  cfg.restarts = restarts;
  cfg.master_seed = 11;
  cfg.threads = threads;
  const auto start = Clock::now();
  const AttackResult result =
      run_untargeted(model, Vec{0.0}, 0, LinfBall(Vec{0.0}, 1.0), cfg);
  const double elapsed = seconds_since(start);
  std::cout << "  " << restarts << " restarts x " << cfg.steps << " steps, "
            << threads << (threads == 1 ? " thread:  " : " threads: ")
            << elapsed << " s  (best margin " << result.best_margin << ")\n";
  return elapsed;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  int threads = omp_get_max_threads();
#else
  int threads = 1;
#endif
  std::size_t samples = 20000;
  if (argc > 1) threads = std::atoi(argv[1]);
  if (argc > 2) samples = std::strtoull(argv[2], nullptr, 10);
  if (threads < 1) {
    std::cerr << "usage: benchmark [threads] [mc-samples]\n";
    return 1;
  }

  std::cout << "Monte-Carlo linear experiment\n";
  const double mc_serial = time_mc(samples, 1);
  const double mc_parallel = time_mc(samples, threads);
  std::cout << "  speedup: " << mc_serial / mc_parallel << "x\n\n";

  std::cout << "Restart batch on the 1-D toy model\n";
  const double rs_serial = time_restarts(512, 1);
  const double rs_parallel = time_restarts(512, threads);
  std::cout << "  speedup: " << rs_serial / rs_parallel << "x\n";
  return 0;
}
