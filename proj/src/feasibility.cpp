#include "thermies/feasibility.hpp"

#include <cmath>

#include "thermies/errors.hpp"

namespace thermies {

int required_bit_depth(int d, double kappa) {
  if (d < 1) throw InvalidArgumentError("dimension must be >= 1");
  if (kappa < 1.0) throw InvalidArgumentError("condition number must be >= 1");
  double v = std::log2(2.0 * kappa * std::pow(d, 1.5) + 4.0);
  double nearest = std::round(v);
  if (std::abs(v - nearest) <= 1e-12 * std::max(1.0, std::abs(v)))
    return static_cast<int>(nearest);
  return static_cast<int>(std::ceil(v));
}

double feasible_kappa_max(int d, int xi) {
  if (d < 1) throw InvalidArgumentError("dimension must be >= 1");
  if (xi < 3) throw InvalidArgumentError("bit depth must be >= 3");
  return (std::ldexp(1.0, xi - 1) - 2.0) / std::pow(d, 1.5);
}

FeasibilityPoint feasibility_point(int d, double kappa, int xi) {
  if (xi < 2) throw InvalidArgumentError("bit depth must be >= 2");
  FeasibilityPoint p;
  p.d = d;
  p.kappa = kappa;
  p.xi = xi;
  p.feasible =
      std::ldexp(1.0, xi - 1) - 1.0 >= kappa * std::pow(d, 1.5) + 1.0;
  return p;
}

ScaledTarget scale_for_feasibility(const CovMatrix& target, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("epsilon must be positive");
  if (target.lambda_min() <= psd_tolerance(target.sym()))
    throw SingularMatrixError(
        "feasibility scaling needs a non-singular target");
  double scale = target.dim() * epsilon / target.lambda_min();
  return ScaledTarget{target.scaled(scale), scale};
}

}  // namespace thermies
