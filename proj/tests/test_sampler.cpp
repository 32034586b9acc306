#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "thermies/analyze.hpp"
#include "thermies/errors.hpp"
#include "thermies/io.hpp"
#include "thermies/rng.hpp"
#include "thermies/sampler.hpp"

using namespace thermies;

TEST_SUITE_BEGIN("sampler");

TEST_CASE("sample_exact covariance consistency on the identity") {
  Rng rng(100);
  SampleBatch batch = sample_exact(CovMatrix::identity(2), 100000, rng);
  SymMatrix cov = sample_covariance(batch);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)) <= 0.05);
}

TEST_CASE("sample_exact empty and deterministic") {
  Rng rng(5);
  SampleBatch empty = sample_exact(CovMatrix::identity(3), 0, rng);
  CHECK(empty.count == 0);
  CHECK(empty.data.empty());

  Rng a(42), b(42);
  SampleBatch ba = sample_exact(CovMatrix(SymMatrix(2, {3, 1, 1, 3})), 500, a);
  SampleBatch bb = sample_exact(CovMatrix(SymMatrix(2, {3, 1, 1, 3})), 500, b);
  CHECK(ba.data == bb.data);
}

TEST_CASE("sample_exact matches the S_ij estimator-variance law") {
  // elementwise |sample cov - cov| <= 4 sqrt(S_ij / N) must hold for ~all
  // seeds (4 sigma, so ~0.006 expected failures per matrix entry set)
  const std::size_t n = 10000;
  int bad_seeds = 0;
  const int num_seeds = 100;
  for (int seed = 0; seed < num_seeds; ++seed) {
    Rng gen(900 + seed);
    CovMatrix cov(oracles::random_spd(4 + seed % 5, gen, 0.2));
    Rng rng(1000 + seed);
    SampleBatch batch = sample_exact(cov, n, rng);
    SymMatrix hat = sample_covariance(batch);
    bool ok = true;
    for (int i = 0; i < cov.dim(); ++i)
      for (int j = i; j < cov.dim(); ++j) {
        double s_ij = cov(i, j) * cov(i, j) + cov(i, i) * cov(j, j);
        double tol = 4.0 * std::sqrt(s_ij / static_cast<double>(n));
        ok = ok && std::abs(hat(i, j) - cov(i, j)) <= tol;
      }
    if (!ok) ++bad_seeds;
  }
  CHECK(bad_seeds <= 1);  // >= 99% of seeds
}

TEST_CASE("langevin sampling approaches the stationary covariance") {
  LangevinConfig cfg{0.01, 1000, 50};
  Rng rng(77);
  SampleBatch batch = sample_langevin(CovMatrix::identity(2), 20000, cfg, rng);
  SymMatrix cov = sample_covariance(batch);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)) <= 0.1);
}

TEST_CASE("langevin config validation") {
  CovMatrix id2 = CovMatrix::identity(2);
  Rng rng(1);
  SampleBatch empty = sample_langevin(id2, 0, LangevinConfig{0.01, 0, 1}, rng);
  CHECK(empty.count == 0);
  // stability bound: dt < 2 * lambda_min = 2
  CHECK_THROWS_AS(sample_langevin(id2, 10, LangevinConfig{2.5, 0, 1}, rng),
                  ConfigError);
  CHECK_THROWS_AS(sample_langevin(id2, 10, LangevinConfig{0.0, 0, 1}, rng),
                  ConfigError);
  CovMatrix singular(SymMatrix(2, {1, 1, 1, 1}));
  CHECK_THROWS_AS(sample_langevin(singular, 10, LangevinConfig{0.01, 0, 1}, rng),
                  SingularMatrixError);

  LangevinConfig defaults = LangevinConfig::defaults_for(id2);
  CHECK(defaults.dt == doctest::Approx(0.1));
  CHECK(defaults.thin >= 1);
}

TEST_CASE("langevin agrees with the exact sampler") {
  SymMatrix m(2, {1.0, 0.4, 0.4, 0.8});
  CovMatrix cov(m);
  Rng r1(11), r2(12);
  SampleBatch exact = sample_exact(cov, 20000, r1);
  SampleBatch langevin =
      sample_langevin(cov, 20000, LangevinConfig{0.01, 2000, 50}, r2);
  SymMatrix ce = sample_covariance(exact);
  SymMatrix cl = sample_covariance(langevin);
  CHECK(oracles::max_abs_diff(ce, cl) <= 0.1);
}

TEST_CASE("round_nearest uniform, ties upward") {
  QuantSpec eps1 = QuantSpec::uniform(1.0);
  SymMatrix a(2, {3.6, 1.3, 1.3, 3.5});
  SymMatrix r = round_nearest(a, eps1);
  CHECK(r(0, 0) == 4.0);
  CHECK(r(0, 1) == 1.0);
  CHECK(r(1, 1) == 4.0);  // exact half-step resolves upward

  SymMatrix neg(1, {-0.5});
  CHECK(round_nearest(neg, eps1)(0, 0) == 0.0);  // upward means toward +inf

  QuantSpec grid = QuantSpec::hardware_grid({1.0, 3.2, 4.3, 6.5},
                                            {-0.47, 0.0, 0.47});
  SymMatrix g(2, {5.0, 0.1, 0.1, 4.5});
  SymMatrix rg = round_nearest(g, grid);
  CHECK(rg(0, 0) == 4.3);
  CHECK(rg(0, 1) == 0.0);
  CHECK(rg(1, 1) == 4.3);
}

TEST_CASE("device strict mode accepts representable targets only") {
  QuantSpec eps1 = QuantSpec::uniform(1.0);
  Rng rng(8);
  // eps * [[3,1],[1,3]] is on the grid
  DeviceResult ok = device_sample_detailed(CovMatrix(SymMatrix(2, {3, 1, 1, 3})),
                                           eps1, 100, DeviceMode::Strict,
                                           SamplerBackend::Exact, rng);
  CHECK(ok.batch.count == 100);
  CHECK(oracles::max_abs_diff(ok.realized.sym(), SymMatrix(2, {3, 1, 1, 3})) ==
        0.0);
  for (auto idx : ok.batch.neighbor_index) CHECK(idx == 0);

  try {
    device_sample(CovMatrix(SymMatrix(2, {3.6, 1.3, 1.3, 3.5})), eps1, 10,
                  DeviceMode::Strict, SamplerBackend::Exact, rng);
    FAIL("expected a precision error");
  } catch (const PrecisionError& e) {
    CHECK(e.row == 0);
    CHECK(e.col == 0);
  }
}

TEST_CASE("device round_nearest samples the rounded matrix") {
  QuantSpec eps1 = QuantSpec::uniform(1.0);
  Rng rng(9);
  DeviceResult res = device_sample_detailed(
      CovMatrix(SymMatrix(2, {3.6, 1.3, 1.3, 3.5})), eps1, 50000,
      DeviceMode::RoundNearest, SamplerBackend::Exact, rng);
  CHECK(res.realized(0, 0) == 4.0);
  CHECK(res.realized(0, 1) == 1.0);
  CHECK(res.realized(1, 1) == 4.0);
  SymMatrix cov = sample_covariance(res.batch);
  CHECK(std::abs(cov(0, 0) - 4.0) <= 0.12);
  CHECK(std::abs(cov(0, 1) - 1.0) <= 0.12);
  CHECK(std::abs(cov(1, 1) - 4.0) <= 0.12);
}

TEST_CASE("device langevin backend works end to end") {
  QuantSpec eps1 = QuantSpec::uniform(1.0);
  Rng rng(10);
  SampleBatch batch =
      device_sample(CovMatrix::identity(2), eps1, 5000, DeviceMode::Strict,
                    SamplerBackend::Langevin, rng);
  SymMatrix cov = sample_covariance(batch);
  CHECK(std::abs(cov(0, 0) - 1.0) <= 0.15);
  CHECK(std::abs(cov(1, 0)) <= 0.15);
}

TEST_CASE("batch binary round-trip") {
  Rng rng(21);
  SampleBatch batch = sample_exact(CovMatrix(SymMatrix(2, {3, 1, 1, 3})), 257,
                                   rng);
  const std::string path = "/tmp/thermies_batch_test.bin";
  write_batch_binary(path, batch);
  SampleBatch back = read_batch_binary(path);
  CHECK(back.dim == batch.dim);
  CHECK(back.count == batch.count);
  CHECK(back.data == batch.data);
}

TEST_SUITE_END();
