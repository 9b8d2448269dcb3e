#include "sslab/storage_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sslab/errors.hpp"

namespace sslab {

const char* scheme_name(AllocationScheme scheme) {
  switch (scheme) {
    case AllocationScheme::optimal:
      return "optimal";
    case AllocationScheme::fixed_level:
      return "fixed_level";
    case AllocationScheme::original_format:
      return "original_format";
  }
  return "unknown";
}

namespace {

Allocation make_allocation(const ScalingLawParams& params, double s, double L,
                           AllocationScheme scheme) {
  Allocation alloc;
  alloc.s = s;
  alloc.L_star = L;
  alloc.n_star = s / L;
  alloc.n_int = static_cast<long long>(std::floor(alloc.n_star));
  alloc.predicted_err = predict(params, alloc.n_star, L);
  alloc.scheme = scheme;
  return alloc;
}

}  // namespace

Allocation optimal_allocation(const ScalingLawParams& params, double s) {
  params.validate();
  if (!(s > 0.0)) throw DomainError("storage budget must be > 0");
  const double exponent_sum = params.alpha + params.beta;
  const double c = std::pow(params.beta * params.B / (params.alpha * params.A),
                            1.0 / exponent_sum);
  const double L_star = c * std::pow(s, params.alpha / exponent_sum);
  return make_allocation(params, s, L_star, AllocationScheme::optimal);
}

Allocation brute_force_allocation(const ScalingLawParams& params, double s, int grid_points) {
  params.validate();
  if (!(s > 0.0)) throw DomainError("storage budget must be > 0");
  if (grid_points < 100) throw DomainError("brute force needs at least 100 grid points");

  const auto objective = [&](double log_L) { return predict(params, s / std::exp(log_L), std::exp(log_L)); };

  // Scan a wide window in log L, widening if the minimum sits on the edge.
  double lo = 0.5 * std::log(s) - 8.0 * std::numbers::ln10;
  double hi = 0.5 * std::log(s) + 8.0 * std::numbers::ln10;
  int best_index = 0;
  for (int expansion = 0; expansion < 12; ++expansion) {
    double best_value = std::numeric_limits<double>::infinity();
    best_index = 0;
    for (int i = 0; i < grid_points; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
      const double value = objective(lo + t * (hi - lo));
      if (value < best_value) {
        best_value = value;
        best_index = i;
      }
    }
    if (best_index == 0) {
      const double width = hi - lo;
      lo -= width;
      continue;
    }
    if (best_index == grid_points - 1) {
      const double width = hi - lo;
      hi += width;
      continue;
    }
    break;
  }
  if (best_index == 0 || best_index == grid_points - 1)
    throw DomainError("brute-force search window could not bracket the optimum");

  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  double a = lo + step * static_cast<double>(best_index - 1);
  double b = lo + step * static_cast<double>(best_index + 1);

  // Golden-section on the bracketing interval.
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int iter = 0; iter < 120 && (b - a) > 1e-13; ++iter) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = objective(x2);
    }
  }
  const double log_L = 0.5 * (a + b);
  return make_allocation(params, s, std::exp(log_L), AllocationScheme::optimal);
}

double harmonic_exponent(const ScalingLawParams& params) {
  params.validate();
  return params.alpha * params.beta / (params.alpha + params.beta);
}

OptimizedErrorCurve optimized_error_curve(const ScalingLawParams& params,
                                          const std::vector<double>& budgets) {
  params.validate();
  if (budgets.size() < 4) throw DomainError("need at least 4 budgets");
  const auto [min_it, max_it] = std::minmax_element(budgets.begin(), budgets.end());
  if (!(*min_it > 0.0)) throw DomainError("budgets must be > 0");
  if (!(*max_it / *min_it >= 10.0)) throw DomainError("budgets must span at least one decade");

  OptimizedErrorCurve curve;
  curve.points.reserve(budgets.size());
  double sum_x = 0.0, sum_y = 0.0, sum_xx = 0.0, sum_xy = 0.0;
  for (double s : budgets) {
    const Allocation alloc = optimal_allocation(params, s);
    curve.points.emplace_back(s, alloc.predicted_err);
    const double excess = alloc.predicted_err - params.err_star;
    if (!(excess > 0.0))
      throw DomainError("optimized error does not exceed err_star; exponent fit is degenerate");
    const double x = std::log(s);
    const double y = std::log(excess);
    sum_x += x;
    sum_y += y;
    sum_xx += x * x;
    sum_xy += x * y;
  }
  const double count = static_cast<double>(budgets.size());
  const double slope = (count * sum_xy - sum_x * sum_y) / (count * sum_xx - sum_x * sum_x);
  curve.fitted_exponent = -slope;
  return curve;
}

Allocation fixed_level_plan(const ScalingLawParams& params, double s, double L_fixed) {
  params.validate();
  if (!(s > 0.0)) throw DomainError("storage budget must be > 0");
  if (!(L_fixed > 0.0)) throw DomainError("L_fixed must be > 0");
  if (s < L_fixed) throw BudgetTooSmall("budget below a single example at this level");
  return make_allocation(params, s, L_fixed, AllocationScheme::fixed_level);
}

Allocation original_format_plan(const ScalingLawParams& params, double s, double L_original) {
  Allocation alloc = fixed_level_plan(params, s, L_original);
  alloc.scheme = AllocationScheme::original_format;
  return alloc;
}

}  // namespace sslab
