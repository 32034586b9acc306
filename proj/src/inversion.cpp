#include "thermies/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "thermies/errors.hpp"
#include "thermies/feasibility.hpp"
#include "thermies/parallel.hpp"

namespace thermies {

namespace {

// Admissible range scale for encoding the precision matrix on the device:
// uniform mode uses the lambda_min = d*eps normalization; grid mode squeezes
// every entry into its value range, preferring scale 1 when it already fits.
double encoding_scale(const CovMatrix& p, const QuantSpec& spec) {
  const int d = p.dim();
  if (spec.mode() == QuantMode::Uniform)
    return scale_for_feasibility(p, spec.epsilon()).scale;

  double s_lo = 0.0;
  double s_hi = std::numeric_limits<double>::infinity();
  const double diag_min = spec.diag_values().front();
  const double diag_max = spec.diag_values().back();
  const double od_min = spec.offdiag_values().front();
  const double od_max = spec.offdiag_values().back();
  for (int i = 0; i < d; ++i) {
    double a = p(i, i);
    if (!(a > 0.0))
      throw InfeasibilityError("precision matrix needs positive diagonal");
    s_lo = std::max(s_lo, diag_min / a);
    s_hi = std::min(s_hi, diag_max / a);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double a = p(i, j);
      if (a > 0.0) {
        if (od_max <= 0.0)
          throw InfeasibilityError("positive off-diagonal not representable");
        s_hi = std::min(s_hi, od_max / a);
      } else if (a < 0.0) {
        if (od_min >= 0.0)
          throw InfeasibilityError("negative off-diagonal not representable");
        s_hi = std::min(s_hi, od_min / a);
      } else if (od_min > 0.0 || od_max < 0.0) {
        throw InfeasibilityError("zero off-diagonal not representable");
      }
    }
  if (s_lo > s_hi) {
    std::ostringstream os;
    os << "no scale fits the matrix into the hardware grid (need "
       << s_lo << " <= s <= " << s_hi << ")";
    throw InfeasibilityError(os.str());
  }
  return std::clamp(1.0, s_lo, s_hi);
}

// Running zero-mean covariance with checkpoint snapshots. Errors are
// measured against the digital inverse, with the encoding scale undone.
class CheckpointedError {
 public:
  CheckpointedError(const SymMatrix& reference, double scale, bool absolute,
                    const std::vector<std::size_t>& checkpoints)
      : ref_(reference),
        scale_(scale),
        absolute_(absolute),
        checkpoints_(checkpoints),
        acc_(reference.dim()),
        ref_norm_(matrix_norm(reference, MatrixNorm::Fro)) {}

  void add(const double* x) {
    const int d = ref_.dim();
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) acc_.set(i, j, acc_(i, j) + x[i] * x[j]);
    ++count_;
    if (next_ < checkpoints_.size() && count_ == checkpoints_[next_]) {
      errors_.push_back(error_now());
      ++next_;
    }
  }

  std::vector<double> take_errors() { return std::move(errors_); }

 private:
  double error_now() const {
    const int d = ref_.dim();
    const double est_scale =
        scale_ / static_cast<double>(count_ > 1 ? count_ - 1 : 1);
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double diff = est_scale * acc_(i, j) - ref_(i, j);
        s += diff * diff;
      }
    double err = std::sqrt(s);
    return absolute_ ? err : err / ref_norm_;
  }

  const SymMatrix& ref_;
  double scale_;
  bool absolute_;
  const std::vector<std::size_t>& checkpoints_;
  SymMatrix acc_;
  double ref_norm_;
  std::size_t count_ = 0;
  std::size_t next_ = 0;
  std::vector<double> errors_;
};

}  // namespace

std::vector<std::size_t> default_checkpoints(std::size_t n, int count) {
  std::vector<std::size_t> cps;
  if (n < 2 || count < 1) return {n};
  double lo = std::log10(10.0 <= static_cast<double>(n) ? 10.0 : 2.0);
  double hi = std::log10(static_cast<double>(n));
  for (int i = 0; i < count; ++i) {
    double t = count == 1 ? hi : lo + (hi - lo) * i / (count - 1);
    auto c = static_cast<std::size_t>(std::round(std::pow(10.0, t)));
    c = std::min(c, n);
    if (cps.empty() || c > cps.back()) cps.push_back(c);
  }
  if (cps.back() != n) cps.push_back(n);
  return cps;
}

ErrorCurve thermo_invert(const CovMatrix& a, const QuantSpec& spec,
                         bool mitigated, std::size_t m_draws, std::size_t n,
                         const std::vector<std::size_t>& checkpoints, Rng& rng,
                         SamplerBackend backend, bool absolute_error) {
  if (n < 2) throw InvalidArgumentError("inversion needs at least 2 samples");
  if (m_draws < 1) throw InvalidArgumentError("need at least one draw");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 2 || checkpoints[i] > n ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1]))
      throw InvalidArgumentError(
          "checkpoints must be ascending, >= 2, and <= N");
  }

  const SymMatrix reference = spd_inverse(a);
  const double scale = encoding_scale(a, spec);
  const CovMatrix encoded(a.sym().scaled(scale));

  CheckpointedError tracker(reference, scale, absolute_error, checkpoints);

  auto sample_from_precision = [&](const CovMatrix& prec, std::size_t count,
                                   Rng& stream) {
    CovMatrix cov(spd_inverse(prec));
    return backend == SamplerBackend::Exact
               ? sample_exact(cov, count, stream)
               : sample_langevin(cov, count,
                                 LangevinConfig::defaults_for(cov), stream);
  };

  if (!mitigated) {
    CovMatrix rounded = [&] {
      try {
        return CovMatrix(round_nearest(encoded.sym(), spec));
      } catch (const NotPsdError& e) {
        throw InfeasibilityError(
            std::string("rounded precision matrix is not PSD: ") + e.what());
      }
    }();
    SampleBatch batch = sample_from_precision(rounded, n, rng);
    for (std::size_t k = 0; k < n; ++k) tracker.add(batch.row(k));
  } else {
    NeighborSampler sampler(encoded, spec);
    std::vector<std::size_t> per_member(m_draws, n / m_draws);
    for (std::size_t m = 0; m < n % m_draws; ++m) ++per_member[m];
    std::vector<SampleBatch> member_batches;
    member_batches.reserve(m_draws);
    for (std::size_t m = 0; m < m_draws; ++m) {
      NeighborDraw nb = sampler.draw(rng);
      Rng sub(rng.fork_seed());
      member_batches.push_back(
          sample_from_precision(nb.matrix, per_member[m], sub));
    }
    // round-robin pooling keeps every checkpoint prefix balanced
    std::size_t max_rounds =
        *std::max_element(per_member.begin(), per_member.end());
    for (std::size_t r = 0; r < max_rounds; ++r)
      for (std::size_t m = 0; m < m_draws; ++m)
        if (r < per_member[m]) tracker.add(member_batches[m].row(r));
  }

  ErrorCurve curve;
  curve.checkpoints = checkpoints;
  curve.mean_error = tracker.take_errors();
  curve.std_error.assign(curve.mean_error.size(), 0.0);
  curve.mitigated = mitigated;
  return curve;
}

InversionExperimentResult inversion_experiment(const InversionConfig& config) {
  if (config.repetitions < 1)
    throw InvalidArgumentError("need at least one repetition");
  const std::vector<std::size_t> cps =
      config.checkpoints.empty() ? default_checkpoints(config.total_samples)
                                 : config.checkpoints;
  const int reps = config.repetitions;

  std::vector<std::vector<double>> mit_errors(reps), unmit_errors(reps);
  parallel_for(static_cast<std::size_t>(reps), config.workers,
               [&](std::size_t rep) {
                 Rng mit_rng = Rng::derive(config.seed, {rep, 0});
                 Rng unmit_rng = Rng::derive(config.seed, {rep, 1});
                 mit_errors[rep] =
                     thermo_invert(config.matrix, config.spec, true,
                                   config.ensemble_draws, config.total_samples,
                                   cps, mit_rng, config.backend,
                                   config.absolute_error)
                         .mean_error;
                 unmit_errors[rep] =
                     thermo_invert(config.matrix, config.spec, false, 1,
                                   config.total_samples, cps, unmit_rng,
                                   config.backend, config.absolute_error)
                         .mean_error;
               });

  auto aggregate = [&](const std::vector<std::vector<double>>& all,
                       bool mitigated) {
    ErrorCurve c;
    c.checkpoints = cps;
    c.mitigated = mitigated;
    c.mean_error.assign(cps.size(), 0.0);
    c.std_error.assign(cps.size(), 0.0);
    for (std::size_t i = 0; i < cps.size(); ++i) {
      double mean = 0.0;
      for (int r = 0; r < reps; ++r) mean += all[r][i];
      mean /= reps;
      double var = 0.0;
      for (int r = 0; r < reps; ++r) {
        double dv = all[r][i] - mean;
        var += dv * dv;
      }
      c.mean_error[i] = mean;
      c.std_error[i] = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
    }
    return c;
  };

  InversionExperimentResult result;
  result.mitigated = aggregate(mit_errors, true);
  result.unmitigated = aggregate(unmit_errors, false);
  for (int r = 0; r < reps; ++r)
    for (std::size_t i = 0; i < cps.size(); ++i) {
      result.per_rep.push_back({r, cps[i], true, mit_errors[r][i]});
      result.per_rep.push_back({r, cps[i], false, unmit_errors[r][i]});
    }
  return result;
}

QuantSpec inversion_hardware_grid() {
  return QuantSpec::hardware_grid({1.0, 3.2, 4.3, 6.5}, {-0.47, 0.0, 0.47});
}

CovMatrix make_inversion_fixture(int dim, std::uint64_t seed) {
  if (dim < 2) throw InvalidArgumentError("fixture dimension must be >= 2");
  // Diagonal in [4.35, 6.45] and off-diagonal in [-0.42, 0.42]: every grid
  // rounding keeps the matrix diagonally dominant, hence positive definite.
  Rng rng = Rng::derive(seed, {0x66697874ULL, static_cast<std::uint64_t>(dim)});
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, rng.uniform(4.35, 6.45));
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) m.set(i, j, rng.uniform(-0.42, 0.42));
  return CovMatrix(std::move(m));
}

}  // namespace thermies
