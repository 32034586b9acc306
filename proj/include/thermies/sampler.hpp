#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "thermies/quant.hpp"
#include "thermies/rng.hpp"
#include "thermies/sym_matrix.hpp"

namespace thermies {

/// N draws of a d-vector, row-major, with the generating seed and an
/// optional per-sample tag of the ensemble member that produced it.
struct SampleBatch {
  int dim = 0;
  std::size_t count = 0;
  std::vector<double> data;                // count x dim
  std::uint64_t seed = 0;
  std::vector<std::int32_t> neighbor_index;  // empty when untracked

  const double* row(std::size_t k) const {
    return data.data() + k * static_cast<std::size_t>(dim);
  }
  double at(std::size_t k, int i) const {
    return data[k * static_cast<std::size_t>(dim) + i];
  }
};

/// Euler-Maruyama discretization parameters for the overdamped dynamics
/// dx = -Sigma^{-1} x dt + sqrt(2) dW.
struct LangevinConfig {
  double dt = 0.0;
  std::size_t burn_in = 0;
  std::size_t thin = 1;

  /// dt = 0.1 * lambda_min, burn-in ~20 relaxation times of the slowest
  /// mode, thinning chosen so retained samples decorrelate (autocorrelation
  /// below 0.1).
  static LangevinConfig defaults_for(const CovMatrix& cov);
};

/// n i.i.d. draws X = L Z with L the Cholesky factor of cov.
SampleBatch sample_exact(const CovMatrix& cov, std::size_t n, Rng& rng);

/// n draws from the discretized Langevin chain, recorded every `thin` steps
/// after `burn_in` steps from x0 = 0. Stationary covariance carries an
/// O(dt) bias. Throws ConfigError when dt >= 2 * lambda_min(cov).
SampleBatch sample_langevin(const CovMatrix& cov, std::size_t n,
                            const LangevinConfig& config, Rng& rng);

enum class DeviceMode { Strict, RoundNearest };
enum class SamplerBackend { Exact, Langevin };

/// Elementwise rounding to the nearest representable value; ties round up.
SymMatrix round_nearest(const SymMatrix& a, const QuantSpec& spec);

struct DeviceResult {
  SampleBatch batch;
  CovMatrix realized;  // the distribution actually sampled
};

/// Imprecision-limited device simulator. Strict mode requires every entry of
/// `requested` to be representable (1e-12 relative snap) and throws
/// PrecisionError naming the offending entry otherwise; RoundNearest mode
/// silently rounds first (the unmitigated baseline).
DeviceResult device_sample_detailed(const CovMatrix& requested,
                                    const QuantSpec& spec, std::size_t n,
                                    DeviceMode mode, SamplerBackend backend,
                                    Rng& rng,
                                    const LangevinConfig* langevin = nullptr);

SampleBatch device_sample(const CovMatrix& requested, const QuantSpec& spec,
                          std::size_t n, DeviceMode mode,
                          SamplerBackend backend, Rng& rng,
                          const LangevinConfig* langevin = nullptr);

}  // namespace thermies
