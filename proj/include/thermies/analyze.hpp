#pragma once

#include <cstddef>
#include <vector>

#include "thermies/quant.hpp"
#include "thermies/rng.hpp"
#include "thermies/sampler.hpp"
#include "thermies/sym_matrix.hpp"

namespace thermies {

/// Zero-mean Gaussian mixture. Weights must be nonnegative and sum to one
/// within 1e-12; all components share the dimension.
class MixtureModel {
 public:
  struct Component {
    double weight;
    CovMatrix cov;
  };

  explicit MixtureModel(std::vector<Component> components);
  static MixtureModel single(CovMatrix cov);
  static MixtureModel from_ensemble(const NeighborEnsemble& ensemble);

  int dim() const { return dim_; }
  const std::vector<Component>& components() const { return components_; }

 private:
  std::vector<Component> components_;
  int dim_ = 0;
};

/// Density of N(0, cov) at x. Requires a positive definite covariance.
double gaussian_pdf(const std::vector<double>& x, const CovMatrix& cov);
double gaussian_log_pdf(const std::vector<double>& x, const CovMatrix& cov);

/// sum_b w_b * gaussian_pdf(x, Sigma^b), evaluated with log-sum-exp.
/// A singular component raises an error naming its index.
double mixture_pdf(const std::vector<double>& x, const MixtureModel& model);

struct GridStrategy {
  int points_per_axis = 0;   // 0 selects the per-dimension default
  double radius = 0.0;       // 0 selects 5 * sqrt(max diagonal)
};
struct RandomStrategy {
  std::size_t num_points = 100000;
  double radius = 0.0;
};

/// max_x |f_a(x) - f_t(x)| over a symmetric evaluation box.
/// Grid strategy supports d <= 2 (401 points/axis for d=1, 201 for d=2 by
/// default); random strategy supports d <= 4 and underestimates slightly.
double linf_distance(const MixtureModel& fa, const MixtureModel& ft,
                     const GridStrategy& strategy);
double linf_distance(const MixtureModel& fa, const MixtureModel& ft,
                     const RandomStrategy& strategy, Rng& rng);

/// Zero-mean-convention sample covariance (1/(N-1)) sum_k X^k X^k^T; no
/// mean subtraction. Needs N >= 2.
SymMatrix sample_covariance(const SampleBatch& batch);

/// Conventional covariance with the empirical mean removed.
SymMatrix mean_subtracted_covariance(const SampleBatch& batch);

/// min(1, 2 exp(-2 M delta^2 / eps^2)): tail bound on the ensemble average
/// deviating from the target by delta in any one entry.
double hoeffding_bound(std::size_t m_draws, double delta, double epsilon);

/// Sbar_ij = mean over the list of (Sigma_ij^2 + Sigma_ii * Sigma_jj).
SymMatrix sbar(const std::vector<CovMatrix>& drawn);

/// Combined Chebyshev-Hoeffding lower bound on
/// Pr(|Sigma_hat_ij - Sigma_t_ij| <= delta); vacuous cases clamp to 0.
double combined_bound(std::size_t n_total, std::size_t m_draws, double delta,
                      double epsilon, double sbar_ij);

/// sqrt(mean over all d^2 positions of (a_ij - b_ij)^2).
double rms_error(const SymMatrix& a, const SymMatrix& b);

/// Least-squares slope of log y against log x; needs >= 3 positive points.
double loglog_slope(const std::vector<double>& xs,
                    const std::vector<double>& ys);

/// Concentration summary for one repetition run.
struct BoundReport {
  double delta = 0.0;
  std::size_t m_draws = 0;
  std::size_t n_total = 0;
  double epsilon = 0.0;
  double hoeffding_prob = 0.0;   // upper bound on per-entry violation
  double combined_lower = 0.0;   // worst-entry lower bound on success
  SymMatrix sbar;
};

BoundReport evaluate_bounds(const std::vector<CovMatrix>& drawn,
                            std::size_t n_total, double delta, double epsilon);

}  // namespace thermies
