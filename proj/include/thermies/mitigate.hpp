#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "thermies/quant.hpp"
#include "thermies/rng.hpp"
#include "thermies/sampler.hpp"
#include "thermies/sym_matrix.hpp"

namespace thermies {

/// How an error-mitigated sampling run is budgeted: M ensemble draws,
/// n samples per draw, N = M * n total.
struct MitigationPlan {
  MitigationPlan(CovMatrix target_, QuantSpec spec_,
                 std::size_t ensemble_draws_ = 1,
                 std::size_t samples_per_draw_ = 1)
      : target(std::move(target_)),
        spec(std::move(spec_)),
        ensemble_draws(ensemble_draws_),
        samples_per_draw(samples_per_draw_) {}

  CovMatrix target;
  QuantSpec spec;
  std::size_t ensemble_draws = 1;    // M
  std::size_t samples_per_draw = 1;  // n
  SamplerBackend backend = SamplerBackend::Exact;
  PsdPolicy psd_policy = PsdPolicy::Redraw;
  std::optional<LangevinConfig> langevin;
  std::uint64_t seed = 0;

  std::size_t total_samples() const { return ensemble_draws * samples_per_draw; }
};

/// Univariate protocol: mix N(0, m*eps) and N(0, (m+1)*eps) with weight
/// w = sigma2_t/eps - m so the mixture variance equals sigma2_t exactly.
/// w_override replaces the computed weight when provided.
/// Throws InfeasibilityError when sigma2_t < eps.
SampleBatch thermies_univariate(double sigma2_t, double epsilon,
                                std::optional<double> w_override,
                                std::size_t n, Rng& rng);

/// Per-sample protocol (M = N, n = 1): a fresh neighbor is drawn for every
/// output sample. neighbor_index records the draw ordinal.
SampleBatch thermies_sample(const MitigationPlan& plan, std::size_t total,
                            Rng& rng);

struct RepetitionResult {
  SampleBatch batch;               // member-major, N = M * n samples
  std::vector<CovMatrix> drawn;    // the M realized neighbor matrices
};

/// Protocol with repetition: M neighbors, n samples from each. Members run
/// on independent sub-streams and are merged by member index, so the result
/// does not depend on the worker count.
RepetitionResult thermies_repetition(const MitigationPlan& plan, Rng& rng,
                                     int workers = 1);

enum class EstimateMode { ExactEnumeration, MonteCarlo };

/// Mitigated estimate of a (vector-valued) function of the covariance:
/// exact mode returns sum_b w_b g(Sigma^b); Monte Carlo averages g over
/// mc_draws sampled neighbors. Throws EvaluationError when g is non-finite
/// on a member.
std::vector<double> mitigated_estimate(
    const std::function<std::vector<double>(const CovMatrix&)>& g,
    const CovMatrix& target, const QuantSpec& spec, EstimateMode mode,
    std::size_t mc_draws = 0, Rng* rng = nullptr);

}  // namespace thermies
