#include "thermies/quant.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <Eigen/Dense>

#include "thermies/errors.hpp"

namespace thermies {

namespace {

constexpr double kSnapRel = 1e-12;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= kSnapRel * std::max({1.0, std::abs(a), std::abs(b)});
}

// floor(x/eps) with snapping: values within 1e-12 relative of an exact
// multiple are treated as representable (residual 0).
void split_uniform(double x, double eps, double* lo, double* hi, double* r) {
  double q = x / eps;
  double fl = std::floor(q);
  double frac = q - fl;
  double tol = kSnapRel * std::max(1.0, std::abs(q));
  if (frac <= tol) {
    frac = 0.0;
  } else if (1.0 - frac <= tol) {
    fl += 1.0;
    frac = 0.0;
  }
  *lo = eps * fl;
  *hi = frac == 0.0 ? *lo : eps * (fl + 1.0);
  *r = frac;
}

SymMatrix clip_to_psd(const SymMatrix& a) {
  const int d = a.dim();
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = a(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw SolverError("eigen-decomposition failed during PSD clipping");
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd fixed =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  SymMatrix out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      out.set(i, j, 0.5 * (fixed(i, j) + fixed(j, i)));
  return out;
}

}  // namespace

QuantSpec QuantSpec::uniform(double epsilon) {
  if (!(epsilon > 0.0))
    throw InvalidArgumentError("uniform quantization requires epsilon > 0");
  QuantSpec s;
  s.mode_ = QuantMode::Uniform;
  s.epsilon_ = epsilon;
  return s;
}

QuantSpec QuantSpec::hardware_grid(std::vector<double> diag_values,
                                   std::vector<double> offdiag_values) {
  auto check = [](const std::vector<double>& v, const char* which) {
    if (v.size() < 2)
      throw InvalidArgumentError(std::string(which) +
                                 " grid needs at least 2 values");
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1]))
        throw InvalidArgumentError(std::string(which) +
                                   " grid values must be strictly increasing");
  };
  check(diag_values, "diagonal");
  check(offdiag_values, "off-diagonal");
  QuantSpec s;
  s.mode_ = QuantMode::Grid;
  s.diag_values_ = std::move(diag_values);
  s.offdiag_values_ = std::move(offdiag_values);
  return s;
}

GridBracket grid_bracket(double x, const std::vector<double>& values) {
  if (values.size() < 2)
    throw InvalidArgumentError("grid needs at least 2 values");
  // exact hit (within float noise) is deterministic
  for (double v : values)
    if (nearly_equal(x, v)) return {v, v, 0.0};
  if (x < values.front() || x > values.back()) {
    std::ostringstream os;
    os << "value " << x << " outside grid range [" << values.front() << ", "
       << values.back() << "]; rescale the target first";
    throw GridRangeError(os.str());
  }
  auto it = std::upper_bound(values.begin(), values.end(), x);
  double hi = *it;
  double lo = *(it - 1);
  return {lo, hi, (x - lo) / (hi - lo)};
}

ResidualMatrix::ResidualMatrix(SymMatrix r) : mat_(std::move(r)) {
  for (double v : mat_.data())
    if (!(v >= 0.0 && v < 1.0))
      throw InvalidArgumentError("residual entries must lie in [0, 1)");
}

ResidualMatrix residual(const CovMatrix& target, const QuantSpec& spec) {
  if (spec.mode() != QuantMode::Uniform)
    throw InvalidArgumentError("residual matrix is defined for uniform mode");
  const int d = target.dim();
  SymMatrix r(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double lo, hi, frac;
      split_uniform(target(i, j), spec.epsilon(), &lo, &hi, &frac);
      r.set(i, j, frac);
    }
  return ResidualMatrix(std::move(r));
}

NeighborSampler::NeighborSampler(CovMatrix target, QuantSpec spec,
                                 PsdPolicy policy, int max_redraws)
    : target_(std::move(target)),
      spec_(std::move(spec)),
      policy_(policy),
      max_redraws_(max_redraws) {
  const int d = target_.dim();
  const std::size_t count = upper_count(d);
  lo_.resize(count);
  hi_.resize(count);
  prob_.resize(count);
  std::size_t k = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j, ++k) {
      if (spec_.mode() == QuantMode::Uniform) {
        split_uniform(target_(i, j), spec_.epsilon(), &lo_[k], &hi_[k],
                      &prob_[k]);
      } else {
        GridBracket b = grid_bracket(target_(i, j), spec_.values_for(i, j));
        lo_[k] = b.lo;
        hi_[k] = b.hi;
        prob_[k] = b.weight;
      }
      if (prob_[k] > 0.0) effective_.push_back(static_cast<int>(k));
    }
  }
  // Worst-case Gershgorin: if the smallest diagonal realization dominates
  // the largest off-diagonal realizations in every row, all 2^D neighbors
  // are PSD regardless of the rounding outcome.
  bool gershgorin_ok = true;
  {
    std::size_t p = 0;
    std::vector<double> row_slack(d, 0.0);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j, ++p) {
        if (i == j) {
          row_slack[i] += lo_[p];
        } else {
          double worst = std::max(std::abs(lo_[p]), std::abs(hi_[p]));
          row_slack[i] -= worst;
          row_slack[j] -= worst;
        }
      }
    for (double s : row_slack) gershgorin_ok = gershgorin_ok && s >= 0.0;
  }

  if (spec_.mode() == QuantMode::Uniform) {
    // lambda_min >= d * eps guarantees every neighbor PSD
    feasible_ = target_.lambda_min() >=
                d * spec_.epsilon() * (1.0 - 1e-9) - psd_tolerance(target_.sym());
    if (!feasible_ && !gershgorin_ok)
      std::cerr << "warning: target lambda_min " << target_.lambda_min()
                << " < d*epsilon = " << d * spec_.epsilon()
                << "; neighbor PSD not guaranteed, policy engaged\n";
    feasible_ = feasible_ || gershgorin_ok;
  } else {
    double max_step = 0.0;
    for (std::size_t p = 0; p < count; ++p)
      max_step = std::max(max_step, hi_[p] - lo_[p]);
    feasible_ = gershgorin_ok ||
                target_.lambda_min() >= d * max_step - psd_tolerance(target_.sym());
    if (!feasible_)
      std::cerr << "warning: grid steps exceed lambda_min/" << d
                << "; neighbor PSD not guaranteed, policy engaged\n";
  }
}

SymMatrix NeighborSampler::realize(Rng& rng, SymMatrix* bits) const {
  const int d = target_.dim();
  SymMatrix m(d);
  if (bits) *bits = SymMatrix(d);
  std::size_t k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k) {
      bool up = prob_[k] > 0.0 && rng.bernoulli(prob_[k]);
      m.set(i, j, up ? hi_[k] : lo_[k]);
      if (bits) bits->set(i, j, up ? 1.0 : 0.0);
    }
  return m;
}

CovMatrix NeighborSampler::police(SymMatrix candidate, Rng& rng,
                                  SymMatrix* bits) const {
  if (feasible_) return CovMatrix(std::move(candidate));
  const double tol = psd_tolerance(candidate);
  for (int attempt = 0;; ++attempt) {
    if (is_psd(candidate, tol)) return CovMatrix(std::move(candidate));
    switch (policy_) {
      case PsdPolicy::Error:
        throw InfeasibilityError(
            "drawn neighbor is not positive semi-definite (policy=error)");
      case PsdPolicy::Clip:
        // off-grid repair; deliberately not part of the rounding model
        return CovMatrix(clip_to_psd(candidate));
      case PsdPolicy::Redraw:
        if (attempt >= max_redraws_)
          throw InfeasibilityError(
              "exceeded " + std::to_string(max_redraws_) +
              " consecutive non-PSD neighbor draws; target infeasible");
        candidate = realize(rng, bits);
        break;
    }
  }
}

NeighborDraw NeighborSampler::draw(Rng& rng) const {
  SymMatrix bits(target_.dim());
  SymMatrix entries = realize(rng, &bits);
  CovMatrix matrix = police(std::move(entries), rng, &bits);
  return NeighborDraw{std::move(bits), std::move(matrix), std::nullopt};
}

NeighborDraw draw_neighbor(const CovMatrix& target, const QuantSpec& spec,
                           Rng& rng, PsdPolicy policy) {
  NeighborSampler sampler(target, spec, policy);
  return sampler.draw(rng);
}

NeighborEnsemble::NeighborEnsemble(CovMatrix target, QuantSpec spec)
    : sampler_(std::move(target), std::move(spec), PsdPolicy::Error) {
  if (sampler_.effective_bits() > kMaxEffectiveBits)
    throw CapacityError(
        "ensemble enumeration needs " +
        std::to_string(sampler_.effective_bits()) + " bits (cap " +
        std::to_string(kMaxEffectiveBits) + "); use sampled mode instead");
}

SymMatrix NeighborEnsemble::member_entries(std::uint64_t index,
                                           SymMatrix* bits) const {
  const int d = target().dim();
  const auto& lo = sampler_.lo_upper();
  const auto& hi = sampler_.hi_upper();
  const int nbits = effective_bits();
  SymMatrix m(d);
  if (bits) *bits = SymMatrix(d);
  std::size_t k = 0;
  int eff = 0;
  // effective positions indexed MSB-first so member 0b100... bumps the first
  // upper-triangle position, matching the vectorized hypercube labelling
  const auto& prob = sampler_.up_prob_upper();
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k) {
      bool up = false;
      if (prob[k] > 0.0) {
        up = (index >> (nbits - 1 - eff)) & 1u;
        ++eff;
      }
      m.set(i, j, up ? hi[k] : lo[k]);
      if (bits) bits->set(i, j, up ? 1.0 : 0.0);
    }
  return m;
}

double NeighborEnsemble::member_weight(std::uint64_t index) const {
  const auto& prob = sampler_.up_prob_upper();
  const int nbits = effective_bits();
  double w = 1.0;
  int eff = 0;
  for (double p : prob) {
    if (p <= 0.0) continue;
    bool up = (index >> (nbits - 1 - eff)) & 1u;
    w *= up ? p : 1.0 - p;
    ++eff;
  }
  return w;
}

NeighborDraw NeighborEnsemble::member(std::uint64_t index) const {
  if (index >= size()) throw InvalidArgumentError("member index out of range");
  SymMatrix bits(target().dim());
  SymMatrix entries = member_entries(index, &bits);
  return NeighborDraw{std::move(bits), CovMatrix(std::move(entries)),
                      member_weight(index)};
}

void NeighborEnsemble::for_each_raw(
    const std::function<void(std::uint64_t, double, const SymMatrix&)>& fn)
    const {
  const std::uint64_t n = size();
  for (std::uint64_t b = 0; b < n; ++b)
    fn(b, member_weight(b), member_entries(b, nullptr));
}

std::vector<NeighborDraw> NeighborEnsemble::members() const {
  std::vector<NeighborDraw> out;
  out.reserve(size());
  for (std::uint64_t b = 0; b < size(); ++b) out.push_back(member(b));
  return out;
}

double NeighborEnsemble::weight_sum() const {
  double s = 0.0;
  for (std::uint64_t b = 0; b < size(); ++b) s += member_weight(b);
  return s;
}

SymMatrix NeighborEnsemble::weighted_covariance() const {
  const int d = target().dim();
  SymMatrix acc(d);
  for_each_raw([&](std::uint64_t, double w, const SymMatrix& m) {
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) acc.set(i, j, acc(i, j) + w * m(i, j));
  });
  return acc;
}

double neighbor_weight(const CovMatrix& target, const QuantSpec& spec,
                       const std::vector<int>& bits) {
  if (spec.mode() != QuantMode::Uniform)
    throw InvalidArgumentError("neighbor_weight is defined for uniform mode");
  if (bits.size() != upper_count(target.dim()))
    throw InvalidArgumentError("bit vector length must be (d^2+d)/2");
  ResidualMatrix r = residual(target, spec);
  double w = 1.0;
  std::size_t k = 0;
  for (int i = 0; i < target.dim(); ++i)
    for (int j = i; j < target.dim(); ++j, ++k)
      w *= bits[k] ? r(i, j) : 1.0 - r(i, j);
  return w;
}

}  // namespace thermies
