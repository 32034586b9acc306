#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "thermies/analyze.hpp"
#include "thermies/errors.hpp"
#include "thermies/experiments.hpp"
#include "thermies/mitigate.hpp"
#include "thermies/rng.hpp"

using namespace thermies;

namespace {

double batch_variance(const SampleBatch& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.count; ++k) s += b.data[k] * b.data[k];
  return s / static_cast<double>(b.count - 1);
}

const SymMatrix kExample2d(2, {3.6, 1.3, 1.3, 3.5});

}  // namespace

TEST_SUITE_BEGIN("mitigate");

TEST_CASE("univariate protocol matches the target variance") {
  Rng rng(1);
  SampleBatch b = thermies_univariate(1.5, 1.0, std::nullopt, 1000000, rng);
  CHECK(std::abs(batch_variance(b) - 1.5) <= 0.01);
  // mixture mean stays zero
  double mean = 0.0;
  for (double x : b.data) mean += x;
  mean /= static_cast<double>(b.count);
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(1.5 / 1e6));
}

TEST_CASE("univariate protocol edge cases") {
  Rng rng(2);
  // representable variance: no mixing at all
  SampleBatch b = thermies_univariate(2.0, 1.0, std::nullopt, 5000, rng);
  for (auto idx : b.neighbor_index) CHECK(idx == 0);
  CHECK(std::abs(batch_variance(b) - 2.0) <= 0.15);

  CHECK_THROWS_AS(thermies_univariate(0.5, 1.0, std::nullopt, 10, rng),
                  InfeasibilityError);

  // explicit weight override: variance becomes (m + w) * eps
  SampleBatch o = thermies_univariate(1.2, 1.0, 0.5, 200000, rng);
  CHECK(std::abs(batch_variance(o) - 1.5) <= 0.02);
  CHECK_THROWS_AS(thermies_univariate(1.2, 1.0, 1.5, 10, rng),
                  InvalidArgumentError);
}

TEST_CASE("thermies_sample covariance-matches the 2x2 example") {
  MitigationPlan plan{CovMatrix(kExample2d), QuantSpec::uniform(1.0)};
  Rng rng(3);
  SampleBatch b = thermies_sample(plan, 100000, rng);
  SymMatrix cov = sample_covariance(b);
  CHECK(std::abs(cov(0, 0) - 3.6) <= 0.05);
  CHECK(std::abs(cov(0, 1) - 1.3) <= 0.05);
  CHECK(std::abs(cov(1, 1) - 3.5) <= 0.05);

  // per-coordinate mean within 4 sqrt(Sigma_ii / N)
  for (int i = 0; i < 2; ++i) {
    double mean = 0.0;
    for (std::size_t k = 0; k < b.count; ++k) mean += b.at(k, i);
    mean /= static_cast<double>(b.count);
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(3.6 / 1e5));
  }
}

TEST_CASE("representable target collapses to the strict device") {
  // zero residuals: the mitigated sampler draws from exactly one matrix
  MitigationPlan plan{CovMatrix(SymMatrix(2, {3, 1, 1, 3})),
                      QuantSpec::uniform(1.0)};
  Rng rng(4);
  SampleBatch b = thermies_sample(plan, 20000, rng);
  SymMatrix cov = sample_covariance(b);
  CHECK(std::abs(cov(0, 0) - 3.0) <= 0.1);
  CHECK(std::abs(cov(0, 1) - 1.0) <= 0.1);
  CHECK(std::abs(cov(1, 1) - 3.0) <= 0.1);
}

TEST_CASE("d=1 path agrees with the univariate protocol in distribution") {
  MitigationPlan plan{CovMatrix(SymMatrix(1, {1.5})), QuantSpec::uniform(1.0)};
  Rng rng(5);
  SampleBatch multi = thermies_sample(plan, 200000, rng);
  Rng rng2(6);
  SampleBatch uni = thermies_univariate(1.5, 1.0, std::nullopt, 200000, rng2);
  CHECK(std::abs(batch_variance(multi) - batch_variance(uni)) <= 0.03);
  // fourth moments agree too (mixture kurtosis differs from a pure Gaussian)
  auto fourth = [](const SampleBatch& b) {
    double s = 0.0;
    for (double x : b.data) s += x * x * x * x;
    return s / static_cast<double>(b.count);
  };
  CHECK(std::abs(fourth(multi) - fourth(uni)) <= 0.3);
}

TEST_CASE("repetition protocol: budget bookkeeping and member tagging") {
  MitigationPlan plan{CovMatrix(kExample2d), QuantSpec::uniform(1.0), 16, 250};
  Rng rng(7);
  RepetitionResult rep = thermies_repetition(plan, rng);
  CHECK(rep.batch.count == 4000);
  CHECK(rep.drawn.size() == 16);
  for (std::size_t k = 0; k < rep.batch.count; ++k)
    CHECK(rep.batch.neighbor_index[k] == static_cast<std::int32_t>(k / 250));
}

TEST_CASE("repetition is identical across worker counts") {
  MitigationPlan plan{CovMatrix(kExample2d), QuantSpec::uniform(1.0), 8, 100};
  Rng r1(8), r4(8);
  RepetitionResult a = thermies_repetition(plan, r1, 1);
  RepetitionResult b = thermies_repetition(plan, r4, 4);
  CHECK(a.batch.data == b.batch.data);
  CHECK(a.batch.neighbor_index == b.batch.neighbor_index);
  for (std::size_t m = 0; m < a.drawn.size(); ++m)
    CHECK(oracles::max_abs_diff(a.drawn[m].sym(), b.drawn[m].sym()) == 0.0);
}

TEST_CASE("repetition degenerate splits match in expectation") {
  // (M=1, n=N) is a single-neighbor batch; (M=N, n=1) is the per-sample
  // protocol; both match the target covariance in expectation
  const std::size_t n_total = 10000;
  MitigationPlan one_draw{CovMatrix(kExample2d), QuantSpec::uniform(1.0), 1,
                          n_total};
  MitigationPlan all_draws{CovMatrix(kExample2d), QuantSpec::uniform(1.0),
                           n_total, 1};
  // average the single-neighbor batch over several runs so the Bernoulli
  // rounding averages out
  SymMatrix acc(2);
  const int runs = 256;
  for (int r = 0; r < runs; ++r) {
    Rng rng(100 + r);
    SymMatrix cov = sample_covariance(thermies_repetition(one_draw, rng).batch);
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) acc.set(i, j, acc(i, j) + cov(i, j));
  }
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) acc.set(i, j, acc(i, j) / runs);

  Rng rng(9);
  SymMatrix cov_all =
      sample_covariance(thermies_repetition(all_draws, rng).batch);
  // Bernoulli averaging noise: eps * sqrt(R(1-R)/runs) ~ 0.03 per entry
  CHECK(oracles::max_abs_diff(acc, kExample2d) <= 0.1);
  CHECK(oracles::max_abs_diff(cov_all, kExample2d) <= 0.1);
}

TEST_CASE("repetition deviations respect the Hoeffding bound") {
  // M = 64 draws; delta chosen so the bound itself is 0.05
  const std::size_t m_draws = 64;
  const double delta = std::sqrt(std::log(2.0 / 0.05) / (2.0 * m_draws));
  const double bound = hoeffding_bound(m_draws, delta, 1.0);
  CHECK(bound == doctest::Approx(0.05).epsilon(1e-9));

  MitigationPlan plan{CovMatrix(kExample2d), QuantSpec::uniform(1.0), m_draws,
                      1};
  const int trials = 200;
  int violations[3] = {0, 0, 0};
  for (int t = 0; t < trials; ++t) {
    Rng rng(5000 + t);
    RepetitionResult rep = thermies_repetition(plan, rng);
    SymMatrix mean(2);
    for (const auto& m : rep.drawn)
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) mean.set(i, j, mean(i, j) + m(i, j));
    int pos = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j, ++pos) {
        double dev = std::abs(mean(i, j) / m_draws - kExample2d(i, j));
        if (dev >= delta) ++violations[pos];
      }
  }
  // empirical violation rate must not exceed the bound by more than 3
  // binomial standard errors
  const double se = std::sqrt(bound * (1.0 - bound) / trials);
  for (int pos = 0; pos < 3; ++pos)
    CHECK(violations[pos] / static_cast<double>(trials) <= bound + 3.0 * se);
}

TEST_CASE("mitigated_estimate: linear functions recover exactly") {
  CovMatrix target(kExample2d);
  QuantSpec spec = QuantSpec::uniform(1.0);
  auto coord = [](const CovMatrix& s) {
    return std::vector<double>{s(0, 0), s(0, 1), s(1, 1)};
  };
  auto est = mitigated_estimate(coord, target, spec,
                                EstimateMode::ExactEnumeration);
  CHECK(est[0] == doctest::Approx(3.6).epsilon(1e-12));
  CHECK(est[1] == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(est[2] == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("mitigated_estimate matches a hand-rolled weighted inverse") {
  CovMatrix target(kExample2d);
  QuantSpec spec = QuantSpec::uniform(1.0);
  auto g11 = [](const CovMatrix& s) {
    return std::vector<double>{oracles::inv2x2(s(0, 0), s(0, 1), s(1, 1))[0]};
  };
  auto est =
      mitigated_estimate(g11, target, spec, EstimateMode::ExactEnumeration);

  // independent brute force over the 8 published members and weights
  const double r00 = 3.6 - 3.0, r01 = 1.3 - 1.0, r11 = 3.5 - 3.0;
  double expect = 0.0;
  for (int b = 0; b < 8; ++b) {
    int b0 = (b >> 2) & 1, b1 = (b >> 1) & 1, b2 = b & 1;
    double w = (b0 ? r00 : 1 - r00) * (b1 ? r01 : 1 - r01) *
               (b2 ? r11 : 1 - r11);
    expect += w * oracles::inv2x2(3 + b0, 1 + b1, 3 + b2)[0];
  }
  CHECK(est[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mitigated_estimate on a representable target is exact") {
  CovMatrix target(SymMatrix(2, {3, 1, 1, 3}));
  QuantSpec spec = QuantSpec::uniform(1.0);
  auto g = [](const CovMatrix& s) {
    return std::vector<double>{oracles::inv2x2(s(0, 0), s(0, 1), s(1, 1))[0]};
  };
  auto est = mitigated_estimate(g, target, spec,
                                EstimateMode::ExactEnumeration);
  CHECK(est[0] == doctest::Approx(oracles::inv2x2(3, 1, 3)[0]).epsilon(1e-14));
}

TEST_CASE("mitigated_estimate Monte Carlo mode converges to the exact value") {
  CovMatrix target(kExample2d);
  QuantSpec spec = QuantSpec::uniform(1.0);
  auto g = [](const CovMatrix& s) {
    return std::vector<double>{oracles::inv2x2(s(0, 0), s(0, 1), s(1, 1))[0]};
  };
  auto exact =
      mitigated_estimate(g, target, spec, EstimateMode::ExactEnumeration);
  Rng rng(55);
  auto mc = mitigated_estimate(g, target, spec, EstimateMode::MonteCarlo,
                               20000, &rng);
  CHECK(std::abs(mc[0] - exact[0]) <= 0.01);
  CHECK_THROWS_AS(mitigated_estimate(g, target, spec, EstimateMode::MonteCarlo,
                                     0, &rng),
                  InvalidArgumentError);
}

TEST_CASE("mitigated_estimate flags non-finite member evaluations") {
  // the upper member [[1,1],[1,1]] is singular; an inverse-like g blows up
  CovMatrix target(SymMatrix(2, {1.0, 0.5, 0.5, 1.0}));
  QuantSpec spec = QuantSpec::uniform(1.0);
  auto g = [](const CovMatrix& s) {
    double det = s(0, 0) * s(1, 1) - s(0, 1) * s(0, 1);
    return std::vector<double>{s(1, 1) / det};
  };
  CHECK_THROWS_AS(
      mitigated_estimate(g, target, spec, EstimateMode::ExactEnumeration),
      EvaluationError);
}

TEST_CASE("second-order scaling of the mitigated inverse") {
  TargetFamily family = make_target_family(3, 1234);
  std::vector<double> eps = reciprocal_eps_grid(1e-3, 1e-1, 9);
  auto rows = mitigated_inverse_scaling(family, eps);
  std::vector<double> xs, ym, ys;
  for (const auto& r : rows) {
    xs.push_back(r.epsilon);
    ym.push_back(r.err_mitigated);
    ys.push_back(r.err_single);
  }
  double mit_slope = loglog_slope(xs, ym);
  double single_slope = loglog_slope(xs, ys);
  CHECK(std::abs(mit_slope - 2.0) <= 0.2);
  CHECK(std::abs(single_slope - 1.0) <= 0.2);
}

TEST_SUITE_END();
