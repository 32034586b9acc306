#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace thermies {

/// Dense real symmetric d x d matrix, row-major storage.
///
/// Symmetry is a hard invariant: the value constructor symmetrizes its input
/// as (A + A^T)/2 and rejects inputs whose asymmetry exceeds 1e-8 relative
/// to the largest entry. set() mirrors across the diagonal.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim);
  SymMatrix(int dim, std::vector<double> entries);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return data_[idx(i, j)]; }
  void set(int i, int j, double v) {
    data_[idx(i, j)] = v;
    data_[idx(j, i)] = v;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& mutable_data() { return data_; }

  SymMatrix scaled(double c) const;
  static SymMatrix identity(int dim);

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * dim_ + j;
  }
  int dim_ = 0;
  std::vector<double> data_;
};

/// Number of upper-triangle positions, D = (d^2 + d) / 2.
std::size_t upper_count(int dim);

/// Row-major upper-triangle vectorization (A11, A12, ..., A1d, A22, ...).
std::vector<double> vectorize_upper(const SymMatrix& a);

/// Inverse of vectorize_upper.
SymMatrix devectorize_upper(int dim, const std::vector<double>& upper);

enum class MatrixNorm { Inf, Fro, Two };

/// Inf = max |a_ij| (elementwise), Fro = Frobenius, Two = spectral.
double matrix_norm(const SymMatrix& a, MatrixNorm kind);

/// PSD tolerance used throughout: 1e-9 * max(1, ||A||_inf).
double psd_tolerance(const SymMatrix& a);

/// Algebraically smallest and largest eigenvalues.
/// Full symmetric eigendecomposition for dim <= 64; Lanczos with full
/// reorthogonalization above that (relative accuracy ~1e-8). Throws
/// SolverError on non-convergence.
std::pair<double, double> eig_extremes(const SymMatrix& a);

/// true iff the smallest eigenvalue is >= -tol.
bool is_psd(const SymMatrix& a, double tol);

/// Positive semi-definite matrix with cached eigen-extremes.
/// Construction computes eig_extremes once and rejects matrices whose
/// smallest eigenvalue is below -psd_tolerance.
class CovMatrix {
 public:
  explicit CovMatrix(SymMatrix m);

  int dim() const { return mat_.dim(); }
  double operator()(int i, int j) const { return mat_(i, j); }
  const SymMatrix& sym() const { return mat_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

  CovMatrix scaled(double c) const;
  static CovMatrix identity(int dim);

 private:
  SymMatrix mat_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// kappa = |lambda_max| / |lambda_min|. Throws SingularMatrixError when the
/// matrix is singular at psd_tolerance resolution.
double condition_number(const CovMatrix& a);

/// Lower-triangular Cholesky factor, row-major with zero upper part.
class LowerTriangular {
 public:
  LowerTriangular(int dim, std::vector<double> data)
      : dim_(dim), data_(std::move(data)) {}

  int dim() const { return dim_; }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * dim_ + j];
  }
  const std::vector<double>& data() const { return data_; }

  /// y = L z (used to turn standard normals into correlated draws).
  std::vector<double> apply(const std::vector<double>& z) const;
  /// Solve L y = b.
  std::vector<double> forward_solve(const std::vector<double>& b) const;
  /// Solve L^T y = b.
  std::vector<double> backward_solve(const std::vector<double>& b) const;
  /// Product of squared diagonal entries' logs: log det(L L^T).
  double log_det_spd() const;

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

/// Cholesky factorization A = L L^T.
/// When jitter_repair is on and lambda_min lies within +-psd_tolerance of
/// zero, 10 * psd_tolerance is added to the diagonal once before factoring.
/// Throws FactorizationError naming the failing pivot otherwise.
LowerTriangular cholesky(const CovMatrix& a, bool jitter_repair = true);

/// Inverse via Cholesky solves. Requires lambda_min > psd_tolerance.
SymMatrix spd_inverse(const CovMatrix& a);

}  // namespace thermies
