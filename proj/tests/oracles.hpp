// Test-side oracles, independent of the library's computation paths.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "thermies/rng.hpp"
#include "thermies/sym_matrix.hpp"

namespace oracles {

// Closed-form eigenvalues of [[a, b], [b, c]].
inline std::pair<double, double> eig2x2(double a, double b, double c) {
  double mean = 0.5 * (a + c);
  double r = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return {mean - r, mean + r};
}

// Closed-form inverse of [[a, b], [b, c]].
inline std::array<double, 4> inv2x2(double a, double b, double c) {
  double det = a * c - b * b;
  return {c / det, -b / det, -b / det, a / det};
}

// Composite Simpson on [-r, r]; n must be even.
inline double simpson1d(const std::function<double(double)>& f, double r,
                        int n) {
  double h = 2.0 * r / n;
  double s = f(-r) + f(r);
  for (int i = 1; i < n; ++i) s += f(-r + h * i) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Tensor-product Simpson on [-r, r]^2.
inline double simpson2d(const std::function<double(double, double)>& f,
                        double r, int n) {
  auto outer = [&](double x) {
    return simpson1d([&](double y) { return f(x, y); }, r, n);
  };
  return simpson1d(outer, r, n);
}

// Random dense symmetric positive definite matrix G^T G + ridge * I.
inline thermies::SymMatrix random_spd(int d, thermies::Rng& rng,
                                      double ridge = 1e-3) {
  std::vector<double> g(static_cast<std::size_t>(d) * d);
  for (double& v : g) v = rng.normal();
  thermies::SymMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        s += g[static_cast<std::size_t>(k) * d + i] *
             g[static_cast<std::size_t>(k) * d + j];
      m.set(i, j, s + (i == j ? ridge : 0.0));
    }
  return m;
}

// Random symmetric matrix with entries in [-1, 1].
inline thermies::SymMatrix random_sym(int d, thermies::Rng& rng) {
  thermies::SymMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) m.set(i, j, rng.uniform(-1.0, 1.0));
  return m;
}

// Plain-loop zero-mean covariance straight off the definition.
inline thermies::SymMatrix direct_covariance(const std::vector<double>& data,
                                             int d, std::size_t n) {
  thermies::SymMatrix acc(d);
  for (std::size_t k = 0; k < n; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        acc.set(i, j, acc(i, j) + data[k * d + i] * data[k * d + j]);
  thermies::SymMatrix out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      out.set(i, j, acc(i, j) / static_cast<double>(n - 1));
  return out;
}

inline double max_abs_diff(const thermies::SymMatrix& a,
                           const thermies::SymMatrix& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
  return worst;
}

}  // namespace oracles
