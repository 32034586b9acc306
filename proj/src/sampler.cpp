#include "thermies/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "thermies/errors.hpp"

namespace thermies {

LangevinConfig LangevinConfig::defaults_for(const CovMatrix& cov) {
  const double lmin = cov.lambda_min();
  const double lmax = cov.lambda_max();
  if (lmin <= psd_tolerance(cov.sym()))
    throw SingularMatrixError("Langevin defaults need a non-singular target");
  LangevinConfig c;
  c.dt = 0.1 * lmin;
  // slowest mode relaxes at rate dt / lambda_max per step
  c.burn_in = static_cast<std::size_t>(std::ceil(20.0 * lmax / c.dt));
  c.thin = static_cast<std::size_t>(
      std::max(1.0, std::ceil(std::log(10.0) * lmax / c.dt)));
  return c;
}

SampleBatch sample_exact(const CovMatrix& cov, std::size_t n, Rng& rng) {
  const int d = cov.dim();
  SampleBatch batch;
  batch.dim = d;
  batch.count = n;
  batch.data.resize(n * static_cast<std::size_t>(d));
  if (n == 0) return batch;
  LowerTriangular l = cholesky(cov);
  std::vector<double> z(d);
  for (std::size_t k = 0; k < n; ++k) {
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    double* out = batch.data.data() + k * static_cast<std::size_t>(d);
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j <= i; ++j) s += l(i, j) * z[j];
      out[i] = s;
    }
  }
  return batch;
}

SampleBatch sample_langevin(const CovMatrix& cov, std::size_t n,
                            const LangevinConfig& config, Rng& rng) {
  const int d = cov.dim();
  if (cov.lambda_min() <= psd_tolerance(cov.sym()))
    throw SingularMatrixError("Langevin sampling needs a non-singular target");
  if (!(config.dt > 0.0) || config.thin < 1)
    throw ConfigError("Langevin config requires dt > 0 and thin >= 1");
  // explicit Euler is stable iff dt < 2 * lambda_min(Sigma)
  if (config.dt >= 2.0 * cov.lambda_min()) {
    std::ostringstream os;
    os << "dt = " << config.dt << " violates the stability bound 2*lambda_min = "
       << 2.0 * cov.lambda_min();
    throw ConfigError(os.str());
  }

  SampleBatch batch;
  batch.dim = d;
  batch.count = n;
  batch.data.resize(n * static_cast<std::size_t>(d));
  if (n == 0) return batch;

  const SymMatrix precision = spd_inverse(cov);
  const double noise = std::sqrt(2.0 * config.dt);
  std::vector<double> x(d, 0.0), drift(d, 0.0);

  auto step = [&] {
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += precision(i, j) * x[j];
      drift[i] = s;
    }
    for (int i = 0; i < d; ++i)
      x[i] += -config.dt * drift[i] + noise * rng.normal();
  };

  for (std::size_t k = 0; k < config.burn_in; ++k) step();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t s = 0; s < config.thin; ++s) step();
    std::copy(x.begin(), x.end(),
              batch.data.begin() + k * static_cast<std::size_t>(d));
  }
  return batch;
}

namespace {

constexpr double kSnapRel = 1e-12;

bool representable(double x, const QuantSpec& spec, int i, int j,
                   double* snapped) {
  if (spec.mode() == QuantMode::Uniform) {
    double q = x / spec.epsilon();
    double r = std::round(q);
    if (std::abs(q - r) <= kSnapRel * std::max(1.0, std::abs(q))) {
      *snapped = r * spec.epsilon();
      return true;
    }
    return false;
  }
  for (double v : spec.values_for(i, j)) {
    if (std::abs(x - v) <= kSnapRel * std::max({1.0, std::abs(x), std::abs(v)})) {
      *snapped = v;
      return true;
    }
  }
  return false;
}

}  // namespace

SymMatrix round_nearest(const SymMatrix& a, const QuantSpec& spec) {
  const int d = a.dim();
  SymMatrix out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double x = a(i, j);
      if (spec.mode() == QuantMode::Uniform) {
        // floor(q + 1/2) resolves exact half-steps upward
        out.set(i, j, spec.epsilon() * std::floor(x / spec.epsilon() + 0.5));
      } else {
        GridBracket b = grid_bracket(x, spec.values_for(i, j));
        out.set(i, j, b.weight < 0.5 ? b.lo : b.hi);
      }
    }
  return out;
}

DeviceResult device_sample_detailed(const CovMatrix& requested,
                                    const QuantSpec& spec, std::size_t n,
                                    DeviceMode mode, SamplerBackend backend,
                                    Rng& rng, const LangevinConfig* langevin) {
  const int d = requested.dim();
  SymMatrix realized(d);
  if (mode == DeviceMode::Strict) {
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double snapped;
        if (!representable(requested(i, j), spec, i, j, &snapped)) {
          std::ostringstream os;
          os << "entry (" << i << ", " << j << ") = " << requested(i, j)
             << " is not representable under the quantization model";
          throw PrecisionError(os.str(), i, j);
        }
        realized.set(i, j, snapped);
      }
  } else {
    realized = round_nearest(requested.sym(), spec);
  }

  CovMatrix cov = [&] {
    try {
      return CovMatrix(std::move(realized));
    } catch (const NotPsdError& e) {
      throw InfeasibilityError(
          std::string("rounded matrix is not PSD: ") + e.what());
    }
  }();

  SampleBatch batch;
  if (backend == SamplerBackend::Exact) {
    batch = sample_exact(cov, n, rng);
  } else {
    LangevinConfig cfg = langevin ? *langevin : LangevinConfig::defaults_for(cov);
    batch = sample_langevin(cov, n, cfg, rng);
  }
  batch.neighbor_index.assign(n, 0);
  return DeviceResult{std::move(batch), std::move(cov)};
}

SampleBatch device_sample(const CovMatrix& requested, const QuantSpec& spec,
                          std::size_t n, DeviceMode mode,
                          SamplerBackend backend, Rng& rng,
                          const LangevinConfig* langevin) {
  return device_sample_detailed(requested, spec, n, mode, backend, rng,
                                langevin)
      .batch;
}

}  // namespace thermies
