#include "thermies/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "thermies/errors.hpp"

namespace thermies {

MixtureModel::MixtureModel(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty())
    throw InvalidArgumentError("mixture needs at least one component");
  dim_ = components_.front().cov.dim();
  double wsum = 0.0;
  for (const auto& c : components_) {
    if (c.cov.dim() != dim_)
      throw InvalidArgumentError("mixture components must share dimension");
    if (c.weight < 0.0)
      throw InvalidArgumentError("mixture weights must be nonnegative");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw InvalidArgumentError("mixture weights must sum to 1");
}

MixtureModel MixtureModel::single(CovMatrix cov) {
  std::vector<Component> c;
  c.push_back({1.0, std::move(cov)});
  return MixtureModel(std::move(c));
}

MixtureModel MixtureModel::from_ensemble(const NeighborEnsemble& ensemble) {
  std::vector<Component> comps;
  comps.reserve(ensemble.size());
  for (std::uint64_t b = 0; b < ensemble.size(); ++b) {
    NeighborDraw nb = ensemble.member(b);
    comps.push_back({*nb.weight, std::move(nb.matrix)});
  }
  return MixtureModel(std::move(comps));
}

double gaussian_log_pdf(const std::vector<double>& x, const CovMatrix& cov) {
  const int d = cov.dim();
  if (static_cast<int>(x.size()) != d)
    throw InvalidArgumentError("point dimension does not match covariance");
  if (cov.lambda_min() <= psd_tolerance(cov.sym()))
    throw SingularMatrixError("density undefined for singular covariance");
  LowerTriangular l = cholesky(cov, /*jitter_repair=*/false);
  std::vector<double> u = l.forward_solve(x);
  double quad = 0.0;
  for (double v : u) quad += v * v;
  return -0.5 * (quad + l.log_det_spd() +
                 d * std::log(2.0 * std::numbers::pi));
}

double gaussian_pdf(const std::vector<double>& x, const CovMatrix& cov) {
  return std::exp(gaussian_log_pdf(x, cov));
}

namespace {

// Per-component Cholesky factors cached once; grid sweeps evaluate the same
// mixture at many points.
class PreparedMixture {
 public:
  explicit PreparedMixture(const MixtureModel& model) : dim_(model.dim()) {
    const double log2pi = std::log(2.0 * std::numbers::pi);
    for (std::size_t idx = 0; idx < model.components().size(); ++idx) {
      const auto& c = model.components()[idx];
      if (c.weight == 0.0) continue;
      if (c.cov.lambda_min() <= psd_tolerance(c.cov.sym()))
        throw SingularMatrixError("mixture component " + std::to_string(idx) +
                                  " is singular");
      LowerTriangular l = cholesky(c.cov, /*jitter_repair=*/false);
      double log_norm = -0.5 * (l.log_det_spd() + dim_ * log2pi);
      comps_.push_back({c.weight, std::move(l), log_norm});
    }
  }

  double pdf(const std::vector<double>& x) const {
    // log-sum-exp across components
    double lmax = -std::numeric_limits<double>::infinity();
    logs_.clear();
    for (const auto& c : comps_) {
      std::vector<double> u = c.l.forward_solve(x);
      double quad = 0.0;
      for (double v : u) quad += v * v;
      double lg = c.log_norm - 0.5 * quad;
      logs_.push_back(lg);
      lmax = std::max(lmax, lg);
    }
    if (!std::isfinite(lmax)) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < comps_.size(); ++i)
      s += comps_[i].weight * std::exp(logs_[i] - lmax);
    return std::exp(lmax) * s;
  }

 private:
  struct Prepared {
    double weight;
    LowerTriangular l;
    double log_norm;
  };
  int dim_;
  std::vector<Prepared> comps_;
  mutable std::vector<double> logs_;
};

}  // namespace

double mixture_pdf(const std::vector<double>& x, const MixtureModel& model) {
  if (static_cast<int>(x.size()) != model.dim())
    throw InvalidArgumentError("point dimension does not match mixture");
  return PreparedMixture(model).pdf(x);
}

namespace {

double default_radius(const MixtureModel& fa, const MixtureModel& ft) {
  double max_diag = 0.0;
  for (const auto* m : {&fa, &ft})
    for (const auto& c : m->components())
      for (int i = 0; i < c.cov.dim(); ++i)
        max_diag = std::max(max_diag, c.cov(i, i));
  return 5.0 * std::sqrt(std::max(max_diag, 1e-300));
}

int default_points(int d) { return d == 1 ? 401 : 201; }

}  // namespace

double linf_distance(const MixtureModel& fa, const MixtureModel& ft,
                     const GridStrategy& strategy) {
  if (fa.dim() != ft.dim())
    throw InvalidArgumentError("mixtures must share dimension");
  const int d = fa.dim();
  if (d > 2)
    throw CapacityError("grid strategy supports d <= 2; use random points");
  const double radius =
      strategy.radius > 0.0 ? strategy.radius : default_radius(fa, ft);
  const int npts = strategy.points_per_axis > 0 ? strategy.points_per_axis
                                                : default_points(d);
  if (npts < 2) throw InvalidArgumentError("need at least 2 points per axis");

  PreparedMixture pa(fa), pt(ft);
  double worst = 0.0;
  std::vector<double> x(d, 0.0);
  const double step = 2.0 * radius / (npts - 1);
  if (d == 1) {
    for (int i = 0; i < npts; ++i) {
      x[0] = -radius + step * i;
      worst = std::max(worst, std::abs(pa.pdf(x) - pt.pdf(x)));
    }
  } else {
    for (int i = 0; i < npts; ++i) {
      x[0] = -radius + step * i;
      for (int j = 0; j < npts; ++j) {
        x[1] = -radius + step * j;
        worst = std::max(worst, std::abs(pa.pdf(x) - pt.pdf(x)));
      }
    }
  }
  return worst;
}

double linf_distance(const MixtureModel& fa, const MixtureModel& ft,
                     const RandomStrategy& strategy, Rng& rng) {
  if (fa.dim() != ft.dim())
    throw InvalidArgumentError("mixtures must share dimension");
  const int d = fa.dim();
  if (d > 4)
    throw CapacityError("random-point strategy supports d <= 4");
  if (strategy.num_points == 0)
    throw InvalidArgumentError("need at least one evaluation point");
  const double radius =
      strategy.radius > 0.0 ? strategy.radius : default_radius(fa, ft);
  PreparedMixture pa(fa), pt(ft);
  double worst = 0.0;
  std::vector<double> x(d);
  for (std::size_t k = 0; k < strategy.num_points; ++k) {
    for (int i = 0; i < d; ++i) x[i] = rng.uniform(-radius, radius);
    worst = std::max(worst, std::abs(pa.pdf(x) - pt.pdf(x)));
  }
  return worst;
}

SymMatrix sample_covariance(const SampleBatch& batch) {
  if (batch.count < 2)
    throw InsufficientDataError("sample covariance needs at least 2 samples");
  const int d = batch.dim;
  SymMatrix acc(d);
  for (std::size_t k = 0; k < batch.count; ++k) {
    const double* row = batch.row(k);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        acc.set(i, j, acc(i, j) + row[i] * row[j]);
  }
  const double scale = 1.0 / static_cast<double>(batch.count - 1);
  SymMatrix out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out.set(i, j, acc(i, j) * scale);
  return out;
}

SymMatrix mean_subtracted_covariance(const SampleBatch& batch) {
  if (batch.count < 2)
    throw InsufficientDataError("sample covariance needs at least 2 samples");
  const int d = batch.dim;
  std::vector<double> mean(d, 0.0);
  for (std::size_t k = 0; k < batch.count; ++k)
    for (int i = 0; i < d; ++i) mean[i] += batch.at(k, i);
  for (double& v : mean) v /= static_cast<double>(batch.count);
  SymMatrix acc(d);
  for (std::size_t k = 0; k < batch.count; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        acc.set(i, j, acc(i, j) + (batch.at(k, i) - mean[i]) *
                                      (batch.at(k, j) - mean[j]));
  const double scale = 1.0 / static_cast<double>(batch.count - 1);
  SymMatrix out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out.set(i, j, acc(i, j) * scale);
  return out;
}

double hoeffding_bound(std::size_t m_draws, double delta, double epsilon) {
  if (m_draws < 1) throw InvalidArgumentError("need M >= 1");
  if (!(delta > 0.0) || !(epsilon > 0.0))
    throw InvalidArgumentError("delta and epsilon must be positive");
  double v = 2.0 * std::exp(-2.0 * static_cast<double>(m_draws) * delta *
                            delta / (epsilon * epsilon));
  return std::min(1.0, v);
}

SymMatrix sbar(const std::vector<CovMatrix>& drawn) {
  if (drawn.empty())
    throw InsufficientDataError("Sbar needs at least one drawn matrix");
  const int d = drawn.front().dim();
  SymMatrix acc(d);
  for (const auto& s : drawn) {
    if (s.dim() != d)
      throw InvalidArgumentError("drawn matrices must share dimension");
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        acc.set(i, j, acc(i, j) + s(i, j) * s(i, j) + s(i, i) * s(j, j));
  }
  const double scale = 1.0 / static_cast<double>(drawn.size());
  SymMatrix out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out.set(i, j, acc(i, j) * scale);
  return out;
}

double combined_bound(std::size_t n_total, std::size_t m_draws, double delta,
                      double epsilon, double sbar_ij) {
  if (n_total < 1 || m_draws < 1)
    throw InvalidArgumentError("need N >= 1 and M >= 1");
  if (!(delta > 0.0) || !(epsilon > 0.0))
    throw InvalidArgumentError("delta and epsilon must be positive");
  double chebyshev =
      1.0 - 4.0 * sbar_ij / (static_cast<double>(n_total) * delta * delta);
  double hoeffding =
      1.0 - 2.0 * std::exp(-static_cast<double>(m_draws) * delta * delta /
                           (2.0 * epsilon * epsilon));
  // either factor going nonpositive makes the bound vacuous
  if (chebyshev <= 0.0 || hoeffding <= 0.0) return 0.0;
  return std::min(1.0, chebyshev * hoeffding);
}

double rms_error(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim())
    throw InvalidArgumentError("RMS error needs matching dimensions");
  double s = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    double diff = a.data()[k] - b.data()[k];
    s += diff * diff;
  }
  return std::sqrt(s / static_cast<double>(a.data().size()));
}

double loglog_slope(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw InvalidArgumentError("slope fit needs >= 3 matched points");
  const std::size_t n = xs.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw InvalidArgumentError("log-log fit needs positive values");
    double lx = std::log(xs[i]);
    double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw InvalidArgumentError("log-log fit is degenerate (equal abscissae)");
  return (n * sxy - sx * sy) / denom;
}

BoundReport evaluate_bounds(const std::vector<CovMatrix>& drawn,
                            std::size_t n_total, double delta,
                            double epsilon) {
  BoundReport r;
  r.delta = delta;
  r.m_draws = drawn.size();
  r.n_total = n_total;
  r.epsilon = epsilon;
  r.sbar = sbar(drawn);
  r.hoeffding_prob = hoeffding_bound(drawn.size(), delta, epsilon);
  double worst = 1.0;
  for (double s : r.sbar.data())
    worst = std::min(worst,
                     combined_bound(n_total, drawn.size(), delta, epsilon, s));
  r.combined_lower = worst;
  return r;
}

}  // namespace thermies
