#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "thermies/rng.hpp"
#include "thermies/sym_matrix.hpp"

namespace thermies {

enum class QuantMode { Uniform, Grid };

/// Quantization model of the sampling device.
///
/// Uniform mode: every representable covariance entry is an integer multiple
/// of the imprecision step epsilon. Grid mode: diagonal and off-diagonal
/// entries are restricted to explicit sorted value lists (the hardware-grid
/// variant).
class QuantSpec {
 public:
  static QuantSpec uniform(double epsilon);
  static QuantSpec hardware_grid(std::vector<double> diag_values,
                                 std::vector<double> offdiag_values);

  QuantMode mode() const { return mode_; }
  double epsilon() const { return epsilon_; }
  const std::vector<double>& diag_values() const { return diag_values_; }
  const std::vector<double>& offdiag_values() const { return offdiag_values_; }
  const std::vector<double>& values_for(int i, int j) const {
    return i == j ? diag_values_ : offdiag_values_;
  }

 private:
  QuantSpec() = default;
  QuantMode mode_ = QuantMode::Uniform;
  double epsilon_ = 0.0;
  std::vector<double> diag_values_;
  std::vector<double> offdiag_values_;
};

/// Adjacent grid values bracketing x with the round-up probability
/// w = (x - lo) / (hi - lo). Exact hits (within 1e-12 relative) snap to
/// lo == hi, w == 0. Throws GridRangeError when x is outside the grid.
struct GridBracket {
  double lo = 0.0;
  double hi = 0.0;
  double weight = 0.0;
};
GridBracket grid_bracket(double x, const std::vector<double>& values);

/// Elementwise fractional parts R = target/eps - floor(target/eps) in [0,1).
/// Mathematical floor, so negative entries work (floor(-0.3) = -1 gives
/// residual 0.7). Exactly representable entries get residual 0.
class ResidualMatrix {
 public:
  explicit ResidualMatrix(SymMatrix r);
  int dim() const { return mat_.dim(); }
  double operator()(int i, int j) const { return mat_(i, j); }
  const SymMatrix& sym() const { return mat_; }

 private:
  SymMatrix mat_;
};

ResidualMatrix residual(const CovMatrix& target, const QuantSpec& spec);

/// One realized rounding of the target: lo/hi choice per upper-triangle
/// position, mirrored. weight is populated only for enumerated members.
struct NeighborDraw {
  SymMatrix bits;           // 0 = rounded down, 1 = rounded up
  CovMatrix matrix;
  std::optional<double> weight;
};

enum class PsdPolicy { Redraw, Clip, Error };

/// Precomputed rounding model for one target: per-position lo/hi values and
/// round-up probabilities. Feasibility (every neighbor guaranteed PSD) is
/// decided once at construction; infeasible targets get a stderr warning and
/// per-draw PSD policing.
class NeighborSampler {
 public:
  NeighborSampler(CovMatrix target, QuantSpec spec,
                  PsdPolicy policy = PsdPolicy::Redraw, int max_redraws = 100);

  const CovMatrix& target() const { return target_; }
  const QuantSpec& spec() const { return spec_; }
  bool feasible() const { return feasible_; }

  NeighborDraw draw(Rng& rng) const;

  /// Number of positions that actually need a Bernoulli draw.
  int effective_bits() const { return static_cast<int>(effective_.size()); }

  // Position tables in vectorize_upper order; exposed for the streaming
  // experiment paths that cannot afford per-draw matrix construction.
  const std::vector<double>& lo_upper() const { return lo_; }
  const std::vector<double>& hi_upper() const { return hi_; }
  const std::vector<double>& up_prob_upper() const { return prob_; }

 private:
  SymMatrix realize(Rng& rng, SymMatrix* bits) const;
  CovMatrix police(SymMatrix candidate, Rng& rng, SymMatrix* bits) const;

  CovMatrix target_;
  QuantSpec spec_;
  PsdPolicy policy_;
  int max_redraws_;
  bool feasible_ = false;
  std::vector<double> lo_, hi_, prob_;   // length D, vectorize_upper order
  std::vector<int> effective_;           // indices with prob in (0,1)
};

/// One-shot convenience wrapper around NeighborSampler::draw.
NeighborDraw draw_neighbor(const CovMatrix& target, const QuantSpec& spec,
                           Rng& rng, PsdPolicy policy = PsdPolicy::Redraw);

/// Exhaustive nearest-neighbor ensemble with multilinear interpolation
/// weights. Members are generated on demand; index bit k (most significant
/// first) selects round-up at the k-th effective position.
class NeighborEnsemble {
 public:
  static constexpr int kMaxEffectiveBits = 24;

  NeighborEnsemble(CovMatrix target, QuantSpec spec);

  std::uint64_t size() const { return std::uint64_t{1} << effective_bits(); }
  int effective_bits() const { return sampler_.effective_bits(); }
  const CovMatrix& target() const { return sampler_.target(); }
  const QuantSpec& spec() const { return sampler_.spec(); }

  NeighborDraw member(std::uint64_t index) const;
  double member_weight(std::uint64_t index) const;

  /// Visit (index, weight, entries-as-SymMatrix) without PSD construction.
  void for_each_raw(
      const std::function<void(std::uint64_t, double, const SymMatrix&)>& fn)
      const;

  std::vector<NeighborDraw> members() const;

  double weight_sum() const;
  /// sum_b w_b Sigma^b, the covariance-matching check quantity.
  SymMatrix weighted_covariance() const;

 private:
  SymMatrix member_entries(std::uint64_t index, SymMatrix* bits) const;
  NeighborSampler sampler_;
};

/// Multilinear weight of one full-length bit assignment (all D upper
/// positions, vectorize_upper order): prod of R_i (bit 1) or 1 - R_i (bit 0).
double neighbor_weight(const CovMatrix& target, const QuantSpec& spec,
                       const std::vector<int>& bits);

}  // namespace thermies
