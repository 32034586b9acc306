#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "thermies/analyze.hpp"
#include "thermies/errors.hpp"
#include "thermies/inversion.hpp"
#include "thermies/io.hpp"
#include "thermies/rng.hpp"

#ifndef THERMIES_DATA_DIR
#define THERMIES_DATA_DIR "data"
#endif

using namespace thermies;

TEST_SUITE_BEGIN("inversion");

TEST_CASE("fixtures are grid-compatible, PD, and match the shipped files") {
  QuantSpec grid = inversion_hardware_grid();
  for (int seed = 0; seed < 10; ++seed) {
    CovMatrix fx = make_inversion_fixture(8, seed);
    CHECK(fx.lambda_min() > 0.0);
    for (int i = 0; i < 8; ++i) {
      CHECK(fx(i, i) >= 4.3);
      CHECK(fx(i, i) <= 6.5);
      for (int j = i + 1; j < 8; ++j) CHECK(std::abs(fx(i, j)) <= 0.47);
    }
    // worst-case rounding stays diagonally dominant
    CHECK(4.3 - 7 * 0.47 > 0.0);
  }
  char path[256];
  std::snprintf(path, sizeof path, "%s/fixtures/inv8_00.mat",
                THERMIES_DATA_DIR);
  CovMatrix shipped = load_matrix(path);
  CHECK(oracles::max_abs_diff(shipped.sym(),
                              make_inversion_fixture(8, 0).sym()) == 0.0);
}

TEST_CASE("representable matrix: error decays like N^{-1/2}") {
  // identity is exactly representable at eps = 1, so the only error is
  // statistical and must fall off with the sample budget
  InversionConfig cfg{CovMatrix::identity(4),
                      QuantSpec::uniform(1.0),
                      4,
                      20000,
                      {20, 90, 400, 1800, 8000, 20000},
                      8,
                      99,
                      SamplerBackend::Exact,
                      false,
                      2};
  InversionExperimentResult res = inversion_experiment(cfg);
  std::vector<double> xs(res.mitigated.checkpoints.begin(),
                         res.mitigated.checkpoints.end());
  double slope_m = loglog_slope(xs, res.mitigated.mean_error);
  double slope_u = loglog_slope(xs, res.unmitigated.mean_error);
  CHECK(std::abs(slope_m + 0.5) <= 0.2);
  CHECK(std::abs(slope_u + 0.5) <= 0.2);
  // degenerate ensemble: the two paths are the same estimator
  double final_m = res.mitigated.mean_error.back();
  double final_u = res.unmitigated.mean_error.back();
  CHECK(std::abs(final_m - final_u) <= 0.5 * std::max(final_m, final_u));
}

TEST_CASE("mitigated beats unmitigated on a hardware-grid fixture") {
  InversionConfig cfg{make_inversion_fixture(8, 3),
                      inversion_hardware_grid(),
                      4,
                      50000,
                      {},
                      6,
                      1234,
                      SamplerBackend::Exact,
                      false,
                      2};
  InversionExperimentResult res = inversion_experiment(cfg);
  CHECK(res.mitigated.mean_error.back() < res.unmitigated.mean_error.back());
  // curves decay or flatten, never blow up
  CHECK(res.mitigated.mean_error.back() <= res.mitigated.mean_error.front());
  CHECK(res.unmitigated.mean_error.back() <=
        res.unmitigated.mean_error.front());
}

TEST_CASE("experiment runs are deterministic and worker-independent") {
  InversionConfig cfg{make_inversion_fixture(8, 1),
                      inversion_hardware_grid(),
                      4,
                      4000,
                      {},
                      3,
                      77,
                      SamplerBackend::Exact,
                      false,
                      1};
  InversionExperimentResult a = inversion_experiment(cfg);
  cfg.workers = 4;
  InversionExperimentResult b = inversion_experiment(cfg);
  REQUIRE(a.per_rep.size() == b.per_rep.size());
  for (std::size_t i = 0; i < a.per_rep.size(); ++i)
    CHECK(a.per_rep[i].error == b.per_rep[i].error);
}

TEST_CASE("uniform-spec path rescales through lambda_min = d * eps") {
  // representable after scaling; the estimate must come back on the
  // original scale
  CovMatrix a(SymMatrix(2, {8, 0, 0, 8}));
  Rng rng(5);
  ErrorCurve curve = thermo_invert(a, QuantSpec::uniform(0.25), false, 1,
                                   50000, {50000}, rng);
  CHECK(curve.mean_error.back() <= 0.05);
}

TEST_CASE("checkpoint validation") {
  Rng rng(6);
  CHECK_THROWS_AS(thermo_invert(CovMatrix::identity(2), QuantSpec::uniform(1.0),
                                false, 1, 100, {50, 20}, rng),
                  InvalidArgumentError);
  CHECK_THROWS_AS(thermo_invert(CovMatrix::identity(2), QuantSpec::uniform(1.0),
                                false, 1, 100, {150}, rng),
                  InvalidArgumentError);
}

TEST_CASE("default checkpoints are ascending and end at N") {
  auto cps = default_checkpoints(100000);
  REQUIRE(!cps.empty());
  CHECK(cps.back() == 100000);
  for (std::size_t i = 1; i < cps.size(); ++i) CHECK(cps[i] > cps[i - 1]);
  CHECK(cps.front() >= 2);
}

TEST_SUITE_END();
