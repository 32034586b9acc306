#include "thermies/sym_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "thermies/errors.hpp"
#include "thermies/rng.hpp"

namespace thermies {

namespace {

// Iterative path kicks in above this; below it a full decomposition is cheap.
constexpr int kFullEigMaxDim = 64;
constexpr double kEigTol = 1e-8;
constexpr double kAsymmetryTol = 1e-8;

Eigen::MatrixXd to_eigen(const SymMatrix& a) {
  const int d = a.dim();
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = a(i, j);
  return m;
}

std::pair<double, double> eig_extremes_full(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(a),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SolverError("symmetric eigen-decomposition failed to converge");
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

// Lanczos with full reorthogonalization; converges fast on the extremal
// eigenvalues, which is all this routine promises.
std::pair<double, double> eig_extremes_lanczos(const SymMatrix& a) {
  const int d = a.dim();
  const int max_iter = std::min(d, 300);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      A(a.data().data(), d, d);

  Rng rng(0x1A2C305DULL);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.normal();
  v.normalize();

  std::vector<Eigen::VectorXd> basis;
  basis.reserve(max_iter);
  std::vector<double> alpha, beta;  // beta[k] couples v_k and v_{k+1}
  basis.push_back(v);

  const double scale = std::max(matrix_norm(a, MatrixNorm::Inf), 1e-300);
  double prev_lo = std::numeric_limits<double>::quiet_NaN();
  double prev_hi = std::numeric_limits<double>::quiet_NaN();

  for (int k = 0; k < max_iter; ++k) {
    Eigen::VectorXd w = A * basis[k];
    if (k > 0) w -= beta[k - 1] * basis[k - 1];
    double ak = w.dot(basis[k]);
    alpha.push_back(ak);
    w -= ak * basis[k];
    // full reorthogonalization, twice for safety
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) w -= q.dot(w) * q;
    double bk = w.norm();

    // Ritz values of the current tridiagonal section.
    const int m = k + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    if (es.info() != Eigen::Success)
      throw SolverError("tridiagonal eigen-decomposition failed");
    double lo = es.eigenvalues()(0);
    double hi = es.eigenvalues()(m - 1);

    bool exhausted = (bk <= 1e-14 * scale) || (m == d);
    bool settled = std::isfinite(prev_lo) &&
                   std::abs(lo - prev_lo) <= kEigTol * scale &&
                   std::abs(hi - prev_hi) <= kEigTol * scale;
    if (exhausted || (settled && m >= 12)) return {lo, hi};
    prev_lo = lo;
    prev_hi = hi;

    beta.push_back(bk);
    basis.push_back(w / bk);
  }
  throw SolverError("Lanczos eigen-extremes did not converge in " +
                    std::to_string(max_iter) + " iterations");
}

}  // namespace

SymMatrix::SymMatrix(int dim) : dim_(dim) {
  if (dim < 1) throw InvalidArgumentError("matrix dimension must be >= 1");
  data_.assign(static_cast<std::size_t>(dim) * dim, 0.0);
}

SymMatrix::SymMatrix(int dim, std::vector<double> entries) : dim_(dim) {
  if (dim < 1) throw InvalidArgumentError("matrix dimension must be >= 1");
  if (entries.size() != static_cast<std::size_t>(dim) * dim)
    throw InvalidArgumentError("entry count does not match dimension");
  double max_abs = 0.0, max_asym = 0.0;
  int bad_i = 0, bad_j = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double v = entries[static_cast<std::size_t>(i) * dim + j];
      max_abs = std::max(max_abs, std::abs(v));
      if (j > i) {
        double asym =
            std::abs(v - entries[static_cast<std::size_t>(j) * dim + i]);
        if (asym > max_asym) {
          max_asym = asym;
          bad_i = i;
          bad_j = j;
        }
      }
    }
  }
  if (max_asym > kAsymmetryTol * std::max(1.0, max_abs)) {
    std::ostringstream os;
    os << "matrix is not symmetric at (" << bad_i << ", " << bad_j
       << "): asymmetry " << max_asym;
    throw InvalidArgumentError(os.str());
  }
  data_ = std::move(entries);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      double s = 0.5 * (data_[idx(i, j)] + data_[idx(j, i)]);
      data_[idx(i, j)] = s;
      data_[idx(j, i)] = s;
    }
}

SymMatrix SymMatrix::scaled(double c) const {
  SymMatrix out(*this);
  for (double& v : out.data_) v *= c;
  return out;
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

std::size_t upper_count(int dim) {
  return static_cast<std::size_t>(dim) * (dim + 1) / 2;
}

std::vector<double> vectorize_upper(const SymMatrix& a) {
  std::vector<double> v;
  v.reserve(upper_count(a.dim()));
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j) v.push_back(a(i, j));
  return v;
}

SymMatrix devectorize_upper(int dim, const std::vector<double>& upper) {
  if (upper.size() != upper_count(dim))
    throw InvalidArgumentError("upper-triangle vector has wrong length");
  SymMatrix m(dim);
  std::size_t k = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) m.set(i, j, upper[k++]);
  return m;
}

double matrix_norm(const SymMatrix& a, MatrixNorm kind) {
  switch (kind) {
    case MatrixNorm::Inf: {
      double m = 0.0;
      for (double v : a.data()) m = std::max(m, std::abs(v));
      return m;
    }
    case MatrixNorm::Fro: {
      double s = 0.0;
      for (double v : a.data()) s += v * v;
      return std::sqrt(s);
    }
    case MatrixNorm::Two: {
      auto [lo, hi] = eig_extremes(a);
      return std::max(std::abs(lo), std::abs(hi));
    }
  }
  throw InvalidArgumentError("unknown norm kind");
}

double psd_tolerance(const SymMatrix& a) {
  return 1e-9 * std::max(1.0, matrix_norm(a, MatrixNorm::Inf));
}

std::pair<double, double> eig_extremes(const SymMatrix& a) {
  if (a.dim() <= kFullEigMaxDim) return eig_extremes_full(a);
  return eig_extremes_lanczos(a);
}

bool is_psd(const SymMatrix& a, double tol) {
  if (tol < 0) throw InvalidArgumentError("psd tolerance must be >= 0");
  return eig_extremes(a).first >= -tol;
}

CovMatrix::CovMatrix(SymMatrix m) : mat_(std::move(m)) {
  auto [lo, hi] = eig_extremes(mat_);
  lambda_min_ = lo;
  lambda_max_ = hi;
  if (lambda_min_ < -psd_tolerance(mat_)) {
    std::ostringstream os;
    os << "matrix is not positive semi-definite: lambda_min = " << lambda_min_;
    throw NotPsdError(os.str());
  }
}

CovMatrix CovMatrix::scaled(double c) const {
  if (c <= 0) throw InvalidArgumentError("covariance scale must be positive");
  return CovMatrix(mat_.scaled(c));
}

CovMatrix CovMatrix::identity(int dim) {
  return CovMatrix(SymMatrix::identity(dim));
}

double condition_number(const CovMatrix& a) {
  if (a.lambda_min() <= psd_tolerance(a.sym()))
    throw SingularMatrixError(
        "condition number undefined for a singular matrix");
  return std::abs(a.lambda_max()) / std::abs(a.lambda_min());
}

std::vector<double> LowerTriangular::apply(const std::vector<double>& z) const {
  std::vector<double> y(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    const double* row = data_.data() + static_cast<std::size_t>(i) * dim_;
    for (int j = 0; j <= i; ++j) s += row[j] * z[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> LowerTriangular::forward_solve(
    const std::vector<double>& b) const {
  std::vector<double> y(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    double s = b[i];
    const double* row = data_.data() + static_cast<std::size_t>(i) * dim_;
    for (int j = 0; j < i; ++j) s -= row[j] * y[j];
    y[i] = s / row[i];
  }
  return y;
}

std::vector<double> LowerTriangular::backward_solve(
    const std::vector<double>& b) const {
  std::vector<double> y(dim_, 0.0);
  for (int i = dim_ - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < dim_; ++j)
      s -= data_[static_cast<std::size_t>(j) * dim_ + i] * y[j];
    y[i] = s / data_[static_cast<std::size_t>(i) * dim_ + i];
  }
  return y;
}

double LowerTriangular::log_det_spd() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i)
    s += std::log(data_[static_cast<std::size_t>(i) * dim_ + i]);
  return 2.0 * s;
}

namespace {

// Plain right-looking factorization; returns the failing pivot index or -1.
int try_factor(const SymMatrix& a, double diag_shift,
               std::vector<double>& l) {
  const int d = a.dim();
  l.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int j = 0; j < d; ++j) {
    double pivot = a(j, j) + diag_shift;
    for (int k = 0; k < j; ++k) {
      double v = l[static_cast<std::size_t>(j) * d + k];
      pivot -= v * v;
    }
    if (pivot <= 0.0) return j;
    double ljj = std::sqrt(pivot);
    l[static_cast<std::size_t>(j) * d + j] = ljj;
    for (int i = j + 1; i < d; ++i) {
      double s = a(i, j) + (i == j ? diag_shift : 0.0);
      for (int k = 0; k < j; ++k)
        s -= l[static_cast<std::size_t>(i) * d + k] *
             l[static_cast<std::size_t>(j) * d + k];
      l[static_cast<std::size_t>(i) * d + j] = s / ljj;
    }
  }
  return -1;
}

}  // namespace

LowerTriangular cholesky(const CovMatrix& a, bool jitter_repair) {
  const double tol = psd_tolerance(a.sym());
  std::vector<double> l;
  double shift = 0.0;
  // Semi-definite edge: one-shot diagonal jitter keeps the factorization
  // well defined without changing the matrix beyond tolerance.
  if (jitter_repair && a.lambda_min() <= tol) shift = 10.0 * tol;
  int pivot = try_factor(a.sym(), shift, l);
  if (pivot >= 0 && jitter_repair && shift == 0.0) {
    shift = 10.0 * tol;
    pivot = try_factor(a.sym(), shift, l);
  }
  if (pivot >= 0)
    throw FactorizationError(
        "Cholesky factorization failed at pivot " + std::to_string(pivot),
        pivot);
  return LowerTriangular(a.dim(), std::move(l));
}

SymMatrix spd_inverse(const CovMatrix& a) {
  if (a.lambda_min() <= psd_tolerance(a.sym()))
    throw SingularMatrixError("cannot invert a singular covariance matrix");
  const int d = a.dim();
  LowerTriangular l = cholesky(a, /*jitter_repair=*/false);
  SymMatrix inv(d);
  std::vector<double> e(d, 0.0);
  for (int j = 0; j < d; ++j) {
    e.assign(d, 0.0);
    e[j] = 1.0;
    auto col = l.backward_solve(l.forward_solve(e));
    for (int i = 0; i < d; ++i) inv.set(i, j, col[i]);
  }
  // enforce exact bitwise symmetry against solve round-off
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double s = 0.5 * (inv(i, j) + inv(j, i));
      inv.set(i, j, s);
    }
  return inv;
}

}  // namespace thermies
