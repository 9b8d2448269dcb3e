#pragma once

// Storage-optimal (n, L) splits under the constraint n * L = s, baseline
// allocation schemes, and the optimized-error exponent.

#include <string>
#include <vector>

#include "sslab/scaling_fit.hpp"

namespace sslab {

enum class AllocationScheme { optimal, fixed_level, original_format };

const char* scheme_name(AllocationScheme scheme);

struct Allocation {
  double s = 0.0;
  double n_star = 0.0;
  double L_star = 0.0;
  long long n_int = 0;  // floor(n_star)
  double predicted_err = 0.0;
  AllocationScheme scheme = AllocationScheme::optimal;
};

// Closed form: L* = C s^(alpha/(alpha+beta)), n* = s / L*, with
// C = (beta B / (alpha A))^(1/(alpha+beta)).
Allocation optimal_allocation(const ScalingLawParams& params, double s);

// Independent check: log-spaced scan over L followed by golden-section
// refinement of the predicted error.
Allocation brute_force_allocation(const ScalingLawParams& params, double s,
                                  int grid_points = 400);

struct OptimizedErrorCurve {
  std::vector<std::pair<double, double>> points;  // (s, predicted error)
  double fitted_exponent = 0.0;                   // slope of the optimized excess error
};

// Optimal allocations across budgets plus the regression slope of
// log(err - err_star) against log s (negated).
OptimizedErrorCurve optimized_error_curve(const ScalingLawParams& params,
                                          const std::vector<double>& budgets);

// alpha*beta/(alpha+beta), the exponent the optimized curve should follow.
double harmonic_exponent(const ScalingLawParams& params);

// Spend the budget at a fixed bytes-per-example level.
Allocation fixed_level_plan(const ScalingLawParams& params, double s, double L_fixed);

// Keep examples at their original size and discard until the budget fits.
Allocation original_format_plan(const ScalingLawParams& params, double s, double L_original);

}  // namespace sslab
