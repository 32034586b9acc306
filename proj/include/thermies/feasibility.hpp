#pragma once

#include <vector>

#include "thermies/sym_matrix.hpp"

namespace thermies {

/// One point of the (d, kappa, xi) feasibility trade-off for signed
/// fixed-point covariance entries.
struct FeasibilityPoint {
  int d = 0;
  double kappa = 1.0;
  int xi = 0;
  bool feasible = false;  // 2^(xi-1) - 1 >= kappa * d^(3/2) + 1
};

/// Smallest bit depth satisfying the representability constraint:
/// ceil(log2(2 kappa d^(3/2) + 4)). Log values within 1e-12 of an integer
/// round down.
int required_bit_depth(int d, double kappa);

/// Largest condition number representable at bit depth xi:
/// (2^(xi-1) - 2) / d^(3/2). May drop below 1, which signals infeasibility
/// at any conditioning; the caller interprets.
double feasible_kappa_max(int d, int xi);

FeasibilityPoint feasibility_point(int d, double kappa, int xi);

struct ScaledTarget {
  CovMatrix scaled;
  double scale = 1.0;  // scaled = scale * target
};

/// Rescale so lambda_min(scaled) = d * epsilon, the normalization under
/// which every nearest neighbor is guaranteed PSD.
ScaledTarget scale_for_feasibility(const CovMatrix& target, double epsilon);

}  // namespace thermies
