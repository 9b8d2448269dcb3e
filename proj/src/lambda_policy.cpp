#include "sslab/lambda_policy.hpp"

#include <cmath>

#include "sslab/errors.hpp"

namespace sslab {

namespace {

double kappa_of(const SpectrumConfig& config) {
  return std::log(config.p) / std::log(static_cast<double>(config.q));
}

}  // namespace

double theorem_lambda(const SpectrumConfig& config, int n) {
  if (n < 1) throw DomainError("n must be >= 1");
  const double kappa = kappa_of(config);
  return std::pow(static_cast<double>(n), (kappa + 1.0) / (2.0 * kappa + 1.0));
}

LambdaPolicy LambdaPolicy::fixed(double value) {
  if (!(value > 0.0)) throw NonPositiveLambda("fixed lambda must be > 0");
  LambdaPolicy policy;
  policy.kind = Kind::fixed;
  policy.fixed_value = value;
  return policy;
}

LambdaPolicy LambdaPolicy::theorem_schedule() {
  LambdaPolicy policy;
  policy.kind = Kind::theorem_schedule;
  return policy;
}

LambdaPolicy LambdaPolicy::boundary_schedule() {
  LambdaPolicy policy;
  policy.kind = Kind::boundary_schedule;
  return policy;
}

LambdaPolicy LambdaPolicy::matched_schedule() {
  LambdaPolicy policy;
  policy.kind = Kind::matched_schedule;
  return policy;
}

LambdaPolicy LambdaPolicy::oracle_grid(int points, double lo, double hi) {
  if (points < 2) throw DomainError("oracle grid needs at least 2 points");
  if (!(lo > 0.0 && hi > lo)) throw DomainError("oracle grid range must satisfy 0 < lo < hi");
  LambdaPolicy policy;
  policy.kind = Kind::oracle_grid;
  policy.grid_points = points;
  policy.grid_lo_factor = lo;
  policy.grid_hi_factor = hi;
  return policy;
}

std::vector<double> LambdaPolicy::grid(const SpectrumConfig& config, int n, int m) const {
  if (n < 1) throw DomainError("n must be >= 1");
  if (m < 0 || m >= config.m_max) throw LevelOutOfRange("m must satisfy 0 <= m < m_max");
  switch (kind) {
    case Kind::fixed:
      return {fixed_value};
    case Kind::theorem_schedule:
      return {theorem_lambda(config, n)};
    case Kind::boundary_schedule:
      return {std::pow(static_cast<double>(n), 1.0 - kappa_of(config))};
    case Kind::matched_schedule:
      return {std::pow(static_cast<double>(n), -kappa_of(config))};
    case Kind::oracle_grid:
      break;
  }
  const double m_eff =
      std::min(static_cast<double>(m),
               std::log(static_cast<double>(n)) / std::log(static_cast<double>(config.q)));
  const double pivot = static_cast<double>(n) * std::pow(config.p, -m_eff);
  const double log_lo = std::log(grid_lo_factor * pivot);
  const double log_hi = std::log(grid_hi_factor * pivot);
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    grid[static_cast<std::size_t>(i)] = std::exp(log_lo + t * (log_hi - log_lo));
  }
  return grid;
}

}  // namespace sslab
