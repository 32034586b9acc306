#pragma once

#include <cstdint>
#include <vector>

#include "thermies/quant.hpp"
#include "thermies/rng.hpp"
#include "thermies/sampler.hpp"
#include "thermies/sym_matrix.hpp"

namespace thermies {

/// Sampling-based matrix inversion: the matrix to invert is encoded as the
/// precision matrix of the sampled Gaussian, so the sample covariance
/// estimates its inverse.
struct InversionConfig {
  CovMatrix matrix;                  // A, inverted via P = A encoding
  QuantSpec spec;
  std::size_t ensemble_draws = 4;    // M (mitigated path)
  std::size_t total_samples = 0;     // N
  std::vector<std::size_t> checkpoints;  // ascending, last <= N
  int repetitions = 1;
  std::uint64_t seed = 0;
  SamplerBackend backend = SamplerBackend::Exact;
  bool absolute_error = false;       // default: relative Frobenius
  int workers = 1;
};

struct ErrorCurve {
  std::vector<std::size_t> checkpoints;
  std::vector<double> mean_error;
  std::vector<double> std_error;  // across repetitions; zero for single runs
  bool mitigated = false;
};

struct InversionRepRow {
  int rep;
  std::size_t checkpoint;
  bool mitigated;
  double error;
};

struct InversionExperimentResult {
  ErrorCurve mitigated;
  ErrorCurve unmitigated;
  std::vector<InversionRepRow> per_rep;
};

/// Log-spaced checkpoint defaults ending at n.
std::vector<std::size_t> default_checkpoints(std::size_t n, int count = 10);

/// Single repetition of one path. Unmitigated: round the precision matrix
/// to nearest once and sample it. Mitigated: M rounding draws, N/M samples
/// each (remainder to the first members), pooled round-robin so every
/// checkpoint prefix is balanced across members. Error at each checkpoint is
/// || Sigma_hat - A^{-1} ||_F / || A^{-1} ||_F against the digital inverse.
ErrorCurve thermo_invert(const CovMatrix& a, const QuantSpec& spec,
                         bool mitigated, std::size_t m_draws, std::size_t n,
                         const std::vector<std::size_t>& checkpoints, Rng& rng,
                         SamplerBackend backend = SamplerBackend::Exact,
                         bool absolute_error = false);

/// Repeated seeded runs of both paths with shared per-repetition base seeds;
/// aggregates mean and standard deviation per checkpoint.
InversionExperimentResult inversion_experiment(const InversionConfig& config);

/// Deterministic 8x8-style test matrix whose hardware-grid encodings stay
/// in range and positive definite under every rounding.
CovMatrix make_inversion_fixture(int dim, std::uint64_t seed);

/// The hardware grid used by the inversion experiments.
QuantSpec inversion_hardware_grid();

}  // namespace thermies
