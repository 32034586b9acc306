#include "thermies/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "thermies/analyze.hpp"
#include "thermies/errors.hpp"
#include "thermies/mitigate.hpp"
#include "thermies/parallel.hpp"
#include "thermies/rng.hpp"
#include "thermies/sampler.hpp"

namespace thermies {

CovMatrix TargetFamily::at(double epsilon) const {
  const int d = base.dim();
  SymMatrix t(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      t.set(i, j, base(i, j) + epsilon * residual(i, j));
  return CovMatrix(std::move(t));
}

TargetFamily make_target_family(int d, std::uint64_t seed) {
  if (d < 1) throw InvalidArgumentError("dimension must be >= 1");
  TargetFamily f{SymMatrix(d), SymMatrix(d)};
  // Sub-1/2 residuals keep the nearest rounding on the low side across the
  // whole sweep, which keeps the unmitigated distance close to linear over
  // the fitted range.
  if (d == 1) {
    f.base.set(0, 0, 1.0);
    f.residual.set(0, 0, 0.35);
    return f;
  }
  if (d == 2) {
    f.base.set(0, 0, 3.0);
    f.base.set(0, 1, 1.0);
    f.base.set(1, 1, 3.0);
    f.residual.set(0, 0, 0.35);
    f.residual.set(0, 1, 0.25);
    f.residual.set(1, 1, 0.3);
    return f;
  }
  Rng rng = Rng::derive(seed, {0x7461726745ULL, static_cast<std::uint64_t>(d)});
  // diagonally dominant integer base keeps the whole family positive
  // definite for every eps in (0, 1]
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      f.base.set(i, j, std::floor(rng.uniform(-1.99, 2.0)));
  for (int i = 0; i < d; ++i) {
    double row = 0.0;
    for (int j = 0; j < d; ++j)
      if (j != i) row += std::abs(f.base(i, j));
    f.base.set(i, i, row + 2.0 + std::floor(rng.uniform(0.0, 3.0)));
  }
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) f.residual.set(i, j, rng.uniform(0.15, 0.85));
  return f;
}

std::vector<EpsSweepRow> eps_scaling_sweep(const std::vector<int>& dims,
                                           const std::vector<double>& eps_list,
                                           std::uint64_t seed, int workers) {
  struct Cell {
    int d;
    double eps;
  };
  std::vector<Cell> cells;
  for (int d : dims)
    for (double e : eps_list) cells.push_back({d, e});
  std::vector<EpsSweepRow> rows(cells.size());

  parallel_for(cells.size(), workers, [&](std::size_t idx) {
    const Cell& cell = cells[idx];
    if (cell.d < 1 || cell.d > 4)
      throw InvalidArgumentError("eps sweep supports d in 1..4");
    TargetFamily family = make_target_family(cell.d, seed);
    CovMatrix target = family.at(cell.eps);
    QuantSpec spec = QuantSpec::uniform(cell.eps);

    MixtureModel ft = MixtureModel::single(target);
    MixtureModel fa =
        MixtureModel::from_ensemble(NeighborEnsemble(target, spec));
    MixtureModel fu =
        MixtureModel::single(CovMatrix(round_nearest(target.sym(), spec)));

    // keep the evaluation box fixed across the sweep so distances share a
    // common domain
    double max_diag = 0.0;
    for (int i = 0; i < cell.d; ++i)
      max_diag = std::max(max_diag, family.base(i, i) + 1.0);
    const double radius = 5.0 * std::sqrt(max_diag);

    double mitigated, unmitigated;
    if (cell.d <= 2) {
      GridStrategy strat{0, radius};
      mitigated = linf_distance(fa, ft, strat);
      unmitigated = linf_distance(fu, ft, strat);
    } else {
      RandomStrategy strat{100000, radius};
      Rng rng_a = Rng::derive(seed, {static_cast<std::uint64_t>(cell.d),
                                     static_cast<std::uint64_t>(idx), 0});
      Rng rng_b = Rng::derive(seed, {static_cast<std::uint64_t>(cell.d),
                                     static_cast<std::uint64_t>(idx), 0});
      // same point set for both distances
      mitigated = linf_distance(fa, ft, strat, rng_a);
      unmitigated = linf_distance(fu, ft, strat, rng_b);
    }
    rows[idx] = {cell.d, cell.eps, mitigated, unmitigated};
  });
  return rows;
}

std::vector<MSweepRow> m_scaling_sweep(const std::vector<int>& dims,
                                       const std::vector<std::size_t>& m_list,
                                       int num_seeds, double epsilon,
                                       std::uint64_t seed, int workers) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("epsilon must be positive");
  if (num_seeds < 1) throw InvalidArgumentError("need at least one seed");
  struct Cell {
    int d;
    int seed_index;
    std::size_t m;
  };
  std::vector<Cell> cells;
  for (int d : dims)
    for (int s = 0; s < num_seeds; ++s)
      for (std::size_t m : m_list) cells.push_back({d, s, m});
  std::vector<MSweepRow> rows(cells.size());

  parallel_for(cells.size(), workers, [&](std::size_t idx) {
    const Cell& cell = cells[idx];
    if (cell.d < 1) throw InvalidArgumentError("dimension must be >= 1");
    if (cell.m < 1) throw InvalidArgumentError("M must be >= 1");
    const std::size_t positions = upper_count(cell.d);

    // Residuals of the implied target; the integer floor part cancels out
    // of mean-vs-target deviations exactly, so only residuals matter here.
    Rng res_rng = Rng::derive(seed, {0x726573ULL,
                                     static_cast<std::uint64_t>(cell.d),
                                     static_cast<std::uint64_t>(cell.seed_index)});
    std::vector<double> residuals(positions);
    for (double& r : residuals) r = res_rng.uniform(0.1, 0.9);

    Rng draw_rng = Rng::derive(seed, {0x647277ULL,
                                      static_cast<std::uint64_t>(cell.d),
                                      static_cast<std::uint64_t>(cell.seed_index),
                                      cell.m});
    double sum_sq = 0.0;
    std::size_t pos = 0;
    const double inv_m = 1.0 / static_cast<double>(cell.m);
    for (int i = 0; i < cell.d; ++i)
      for (int j = i; j < cell.d; ++j, ++pos) {
        std::size_t ups = 0;
        for (std::size_t m = 0; m < cell.m; ++m)
          ups += draw_rng.bernoulli(residuals[pos]) ? 1 : 0;
        double dev = epsilon * (static_cast<double>(ups) * inv_m - residuals[pos]);
        sum_sq += (i == j ? 1.0 : 2.0) * dev * dev;
      }
    double rms = std::sqrt(sum_sq / (static_cast<double>(cell.d) * cell.d));
    rows[idx] = {cell.d, cell.m, cell.seed_index, rms};
  });
  return rows;
}

HoeffdingTrialStats hoeffding_trials(const CovMatrix& target,
                                     const QuantSpec& spec,
                                     std::size_t m_draws, double delta,
                                     std::size_t trials, std::uint64_t seed) {
  if (m_draws < 1 || trials < 1)
    throw InvalidArgumentError("need M >= 1 and trials >= 1");
  const int d = target.dim();
  NeighborSampler sampler(target, spec);
  const auto& lo = sampler.lo_upper();
  const auto& hi = sampler.hi_upper();
  const auto& prob = sampler.up_prob_upper();
  const std::size_t positions = upper_count(d);

  std::vector<std::size_t> violations(positions, 0);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::derive(seed, {0x686F65ULL, t});
    for (std::size_t p = 0; p < positions; ++p) {
      double acc = 0.0;
      for (std::size_t m = 0; m < m_draws; ++m)
        acc += rng.bernoulli(prob[p]) ? hi[p] : lo[p];
      acc /= static_cast<double>(m_draws);
      double tgt = lo[p] + prob[p] * (hi[p] - lo[p]);
      if (std::abs(acc - tgt) >= delta) ++violations[p];
    }
  }

  HoeffdingTrialStats stats;
  stats.trials = trials;
  stats.m_draws = m_draws;
  stats.delta = delta;
  stats.epsilon = spec.mode() == QuantMode::Uniform ? spec.epsilon() : 0.0;
  stats.bound = spec.mode() == QuantMode::Uniform
                    ? hoeffding_bound(m_draws, delta, spec.epsilon())
                    : 1.0;
  SymMatrix freq(d);
  std::size_t p = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++p)
      freq.set(i, j,
               static_cast<double>(violations[p]) / static_cast<double>(trials));
  stats.violation_freq = std::move(freq);
  return stats;
}

std::vector<InverseScalingRow> mitigated_inverse_scaling(
    const TargetFamily& family, const std::vector<double>& eps_list) {
  const int d = family.base.dim();
  auto g_inverse = [d](const CovMatrix& p) {
    SymMatrix inv = spd_inverse(p);
    std::vector<double> flat(inv.data().begin(), inv.data().end());
    return flat;
  };
  auto norm2 = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double diff = a[i] - b[i];
      s += diff * diff;
    }
    return std::sqrt(s);
  };

  std::vector<InverseScalingRow> rows;
  rows.reserve(eps_list.size());
  for (double eps : eps_list) {
    CovMatrix target = family.at(eps);
    QuantSpec spec = QuantSpec::uniform(eps);
    std::vector<double> exact = g_inverse(target);
    std::vector<double> mitigated = mitigated_estimate(
        g_inverse, target, spec, EstimateMode::ExactEnumeration);
    std::vector<double> single =
        g_inverse(CovMatrix(round_nearest(target.sym(), spec)));
    rows.push_back({eps, norm2(mitigated, exact), norm2(single, exact)});
  }
  return rows;
}

std::vector<double> reciprocal_eps_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    throw InvalidArgumentError("need 0 < lo < hi and count >= 2");
  std::set<long> denominators;
  for (int i = 0; i < count; ++i) {
    double t = static_cast<double>(i) / (count - 1);
    double eps = hi * std::pow(lo / hi, t);
    denominators.insert(std::lround(1.0 / eps));
  }
  std::vector<double> eps;
  for (auto it = denominators.rbegin(); it != denominators.rend(); ++it)
    eps.push_back(1.0 / static_cast<double>(*it));
  return eps;
}

}  // namespace thermies
