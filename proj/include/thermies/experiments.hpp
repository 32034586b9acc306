#pragma once

#include <cstdint>
#include <vector>

#include "thermies/quant.hpp"
#include "thermies/sym_matrix.hpp"

namespace thermies {

// Reusable experiment drivers behind the CLI sweeps. Every run is fully
// determined by its seed, so CSV outputs are byte-reproducible.

/// Fixed-residual target family Sigma^t(eps) = base + eps * residual. The
/// base is an integer matrix, so on step sizes eps = 1/n the residual matrix
/// of the target is the prescribed one for every eps in the sweep.
struct TargetFamily {
  SymMatrix base;      // integer entries, positive definite
  SymMatrix residual;  // entries in (0, 1)

  CovMatrix at(double epsilon) const;
};

/// Built-in families: d = 1 and 2 are fixed; d = 3 and 4 are seeded random
/// diagonally-dominant integer bases.
TargetFamily make_target_family(int d, std::uint64_t seed);

struct EpsSweepRow {
  int d;
  double epsilon;
  double linf_mitigated;
  double linf_unmitigated;
};

/// Distance-to-target sweep versus the imprecision step. Mitigated distance
/// uses the exact enumerated mixture; unmitigated uses the single
/// nearest-rounded Gaussian. d <= 2 evaluates on an axis grid, d in {3, 4}
/// on random points.
std::vector<EpsSweepRow> eps_scaling_sweep(const std::vector<int>& dims,
                                           const std::vector<double>& eps_list,
                                           std::uint64_t seed, int workers = 1);

struct MSweepRow {
  int d;
  std::size_t m_draws;
  int seed_index;
  double rms;
};

/// RMS(mean of M drawn neighbors, target) for each (d, M, seed). Counts of
/// per-position round-ups are accumulated directly, which is equal in
/// distribution to averaging materialized draws and keeps d ~ 1000 cheap.
std::vector<MSweepRow> m_scaling_sweep(const std::vector<int>& dims,
                                       const std::vector<std::size_t>& m_list,
                                       int num_seeds, double epsilon,
                                       std::uint64_t seed, int workers = 1);

struct HoeffdingTrialStats {
  std::size_t trials = 0;
  std::size_t m_draws = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double bound = 0.0;           // hoeffding_bound(M, delta, eps)
  SymMatrix violation_freq;     // per-entry empirical frequency
};

/// Repeated ensemble-average trials against the concentration bound:
/// violation_freq(i,j) estimates Pr(|mean - target|_ij >= delta).
HoeffdingTrialStats hoeffding_trials(const CovMatrix& target,
                                     const QuantSpec& spec,
                                     std::size_t m_draws, double delta,
                                     std::size_t trials, std::uint64_t seed);

struct InverseScalingRow {
  double epsilon;
  double err_mitigated;  // || sum_b w_b g(Sigma^b) - g(target) ||_2
  double err_single;     // || g(nearest rounding) - g(target) ||_2
};

/// Error of the weighted-ensemble estimate of the entrywise inverse against
/// the single nearest-rounding baseline, over a fixed-residual family. The
/// ensemble estimate loses its first-order step dependence, so the two
/// curves separate as eps^2 vs eps.
std::vector<InverseScalingRow> mitigated_inverse_scaling(const TargetFamily& family,
                                            const std::vector<double>& eps_list);

/// eps = 1/n grids: n log-spaced between 1/hi and 1/lo.
std::vector<double> reciprocal_eps_grid(double lo, double hi, int count);

}  // namespace thermies
