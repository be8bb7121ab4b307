#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mta/analysis.hpp"
#include "mta/errors.hpp"
#include "mta/rng.hpp"

using namespace mta;

namespace {

Model toy_model() {
  return Model(1, {Layer::linear(Mat(3, 1, {0.0, 0.5, -2.0}),
                                 {1.0, -0.7, 0.0})});
}

Model relu_model() {
  return Model(2, {Layer::linear(Mat(4, 2, {1.0, -0.5, 0.3, 0.8, -1.2, 0.4,
                                            0.7, 0.6}),
                                 {0.1, -0.2, 0.3, 0.0}),
                   Layer::relu(),
                   Layer::linear(Mat(3, 4, {0.5, -1.0, 0.2, 0.9, 1.1, 0.3,
                                            -0.6, 0.4, -0.8, 0.7, 1.0, -0.5}),
                                 {0.0, 0.1, -0.1})});
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("margin-ascent basin fraction on the toy model") {
  const ThreatSet set = LinfBall(Vec{0.0}, 1.0);
  // Success region is x < 0.28; with 100 grid points that is exactly 64.
  const BasinMap map =
      basin_map(toy_model(), set, 0, SurrogateLoss::margin(),
                {OptimizerKind::Sign, {}}, StepSchedule::constant(1.0 / 16.0),
                64, 100);
  CHECK(map.inits.size() == 100);
  CHECK(map.fraction == doctest::Approx(0.64));
  // The map is monotone: a failing init never sits left of a success.
  bool seen_failure = false;
  for (std::size_t i = 0; i < map.inits.size(); ++i) {
    if (!map.successes[i]) seen_failure = true;
    if (seen_failure) CHECK_FALSE(map.successes[i]);
  }
}

TEST_CASE("per-target basins cover the toy ball completely") {
  const ThreatSet set = LinfBall(Vec{0.0}, 1.0);
  const BasinMap map = basin_map_multitargeted(
      toy_model(), set, 0, {OptimizerKind::Sign, {}},
      StepSchedule::constant(1.0 / 16.0), 64, 100);
  CHECK(map.fraction == doctest::Approx(1.0));
}

TEST_CASE("basin map is identical across thread counts") {
  const ThreatSet set = LinfBall(Vec{0.0}, 1.0);
  const BasinMap a =
      basin_map(toy_model(), set, 0, SurrogateLoss::margin(),
                {OptimizerKind::Sign, {}}, StepSchedule::constant(1.0 / 16.0),
                64, 50, 1);
  const BasinMap b =
      basin_map(toy_model(), set, 0, SurrogateLoss::margin(),
                {OptimizerKind::Sign, {}}, StepSchedule::constant(1.0 / 16.0),
                64, 50, 4);
  CHECK(a.successes == b.successes);
  CHECK(a.inits == b.inits);
}

TEST_CASE("basin grid skips points outside a non-convex set") {
  const ThreatSet set =
      BoxUnion({Box{{0.0, 0.0}, {1.0, 0.3}}, Box{{0.7, 0.0}, {1.0, 1.0}}});
  const Model model(2, {Layer::linear(Mat(2, 2, {0.0, 0.0, 1.0, 0.0}),
                                      {0.5, 0.0})});
  const BasinMap map =
      basin_map(model, set, 0, SurrogateLoss::margin(),
                {OptimizerKind::Sign, {}}, StepSchedule::constant(0.05), 50,
                11);
  // Bounding box is the unit square; only 72 of its 121 grid points lie in
  // the L-shape.
  CHECK(map.inits.size() == 72);
  for (const Vec& p : map.inits) CHECK(contains(set, p));
}

TEST_CASE("gradient spectra of a linear model are rank one") {
  const Model model(2, {Layer::linear(Mat(3, 2, {1.0, 2.0, 3.0, -1.0, 0.5,
                                                 0.5}),
                                      {0.0, 0.0, 0.0})});
  Rng rng(4);
  const SpectrumReport r =
      linearity_spectrum(model, LinfBall(Vec{0.0, 0.0}, 1.0), 30, rng);
  REQUIRE(r.per_logit.size() == 3);
  for (const auto& sv : r.per_logit) {
    REQUIRE(sv.size() == 2);
    CHECK(sv[0] == doctest::Approx(1.0));
    CHECK(sv[1] <= 1e-9);
  }
  CHECK(r.average[0] == doctest::Approx(1.0));
  CHECK(r.average[1] <= 1e-9);
}

TEST_CASE("gradient spectra of a relu network have a visible tail") {
  Rng rng(8);
  const SpectrumReport r = linearity_spectrum(
      relu_model(), LinfBall(Vec{0.0, 0.0}, 1.0), 200, rng);
  CHECK(r.average[1] > 0.01);
}

TEST_CASE("spectrum demands at least two samples") {
  Rng rng(1);
  CHECK_THROWS_AS(
      linearity_spectrum(toy_model(), LinfBall(Vec{0.0}, 1.0), 1, rng),
      InvalidInput);
}

TEST_CASE("landscape of a linear model is planar per logit") {
  const Model model(2, {Layer::linear(Mat(2, 2, {1.0, -2.0, 0.5, 1.5}),
                                      {0.3, -0.3})});
  AttackConfig cfg;
  cfg.optimizer = {OptimizerKind::Sign, {}};
  cfg.schedule = StepSchedule::constant(0.5 / 16.0);
  cfg.steps = 32;
  const LogitLandscape land =
      logit_landscape(model, {0.0, 0.0}, 0, 0.5, 9, 7, cfg);
  CHECK(land.resolution == 9);
  CHECK(land.extent == doctest::Approx(0.6));
  CHECK(norm_inf(land.u) == doctest::Approx(0.5));
  for (double vi : land.v) CHECK(std::fabs(vi) == doctest::Approx(0.5));
  // Second differences along each axis vanish on a plane.
  for (const auto& vals : land.values)
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 1; j + 1 < 9; ++j) {
        const double d2 = vals[i * 9 + (j - 1)] - 2.0 * vals[i * 9 + j] +
                          vals[i * 9 + (j + 1)];
        CHECK(std::fabs(d2) <= 1e-9);
      }
  // The center cell is the nominal input and always inside.
  CHECK(land.inside[4 * 9 + 4]);
  CHECK(land.values[0][4 * 9 + 4] == doctest::Approx(0.3));
  // Inside flags match a direct membership check.
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      double linf = 0.0;
      for (std::size_t k = 0; k < 2; ++k)
        linf = std::max(linf, std::fabs((land.a_coords[i] / 0.5) * land.u[k] +
                                        (land.b_coords[j] / 0.5) * land.v[k]));
      CHECK(land.inside[i * 9 + j] == (linf <= 0.5 + 1e-12));
    }
}

TEST_CASE("landscape is deterministic in the seed") {
  AttackConfig cfg;
  cfg.optimizer = {OptimizerKind::Sign, {}};
  cfg.schedule = StepSchedule::constant(1.0 / 16.0);
  cfg.steps = 32;
  const LogitLandscape a =
      logit_landscape(toy_model(), {0.0}, 0, 1.0, 7, 123, cfg);
  const LogitLandscape b =
      logit_landscape(toy_model(), {0.0}, 0, 1.0, 7, 123, cfg);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
  CHECK(a.values == b.values);
}

TEST_CASE("csv writers emit the fixed headers") {
  const ThreatSet set = LinfBall(Vec{0.0}, 1.0);
  const BasinMap map =
      basin_map(toy_model(), set, 0, SurrogateLoss::margin(),
                {OptimizerKind::Sign, {}}, StepSchedule::constant(1.0 / 16.0),
                16, 20);
  write_basin_csv(map, "basin_test.csv");
  CHECK(first_line("basin_test.csv") == "x0,success");
  std::remove("basin_test.csv");

  Rng rng(2);
  const SpectrumReport spec =
      linearity_spectrum(toy_model(), set, 10, rng);
  write_spectrum_csv(spec, "spectrum_test.csv");
  CHECK(first_line("spectrum_test.csv") == "logit,index,normalized_value");
  {
    std::ifstream in("spectrum_test.csv");
    std::string line, last;
    while (std::getline(in, line))
      if (!line.empty()) last = line;
    CHECK(last.rfind("average,", 0) == 0);
  }
  std::remove("spectrum_test.csv");

  AttackConfig cfg;
  cfg.optimizer = {OptimizerKind::Sign, {}};
  cfg.schedule = StepSchedule::constant(1.0 / 16.0);
  cfg.steps = 16;
  const LogitLandscape land =
      logit_landscape(toy_model(), {0.0}, 0, 1.0, 5, 3, cfg);
  write_landscape_csv(land, "landscape_test.csv");
  CHECK(first_line("landscape_test.csv") == "a,b,logit,value,inside");
  std::remove("landscape_test.csv");
}
