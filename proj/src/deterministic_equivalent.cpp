#include "sslab/deterministic_equivalent.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sslab/errors.hpp"

namespace sslab {

namespace {

// RHS of the fixed-point equation, sum_{l<=m} s_l q^l / (s_l + x).
double spectral_sum(const SpectrumConfig& config, int m, double x) {
  double sum = 0.0;
  double block = 1.0;
  for (int l = 0; l <= m; ++l) {
    const double s = std::pow(config.p, -l);
    sum += s * block / (s + x);
    block *= config.q;
  }
  return sum;
}

void check_level(const SpectrumConfig& config, int m) {
  if (m < 0 || m >= config.m_max) throw LevelOutOfRange("m must satisfy 0 <= m < m_max");
}

}  // namespace

double solve_lambda_star(const SpectrumConfig& config, int n, int m, double lambda) {
  config.validate();
  check_level(config, m);
  if (n < 1) throw DomainError("n must be >= 1");
  if (!(lambda > 0.0)) throw NonPositiveLambda("lambda must be > 0");

  const double nn = static_cast<double>(n);
  const double width = static_cast<double>(total_dim(config.q, m + 1));
  auto gap = [&](double x) { return (nn - lambda / x) - spectral_sum(config, m, x); };

  double lo = lambda / (nn + width);
  double hi = (nn > width) ? lambda / (nn - width) + 1.0 : lambda / (1e-12 * nn) + 1.0;
  if (!(gap(lo) < 0.0)) lo = std::numeric_limits<double>::min();
  int expansions = 0;
  while (gap(hi) <= 0.0) {
    hi *= 2.0;
    if (++expansions > 200) {
      std::ostringstream msg;
      msg << "no sign change bracketing lambda_star (n=" << n << ", m=" << m
          << ", lambda=" << lambda << ")";
      throw BracketFailure(msg.str());
    }
  }

  // Monotone increasing gap, so the bracketed root is unique.
  const double residual_target = 1e-10 * nn;
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double g = gap(mid);
    if (g < 0.0)
      lo = mid;
    else
      hi = mid;
    const bool tight = hi - lo <= 1e-12 || hi - lo <= 4e-16 * mid;
    if (tight && std::abs(gap(0.5 * (lo + hi))) <= residual_target) break;
  }
  mid = 0.5 * (lo + hi);
  if (std::abs(gap(mid)) > residual_target)
    throw BracketFailure("lambda_star residual above tolerance");
  return mid;
}

double dof(const SpectrumConfig& config, int m, double lambda_star) {
  config.validate();
  check_level(config, m);
  if (!(lambda_star > 0.0)) throw NonPositiveLambda("lambda_star must be > 0");
  double sum = 0.0;
  double block = 1.0;
  for (int l = 0; l <= m; ++l) {
    const double s = std::pow(config.p, -l);
    const double ratio = s / (s + lambda_star);
    sum += ratio * ratio * block;
    block *= config.q;
  }
  return sum;
}

double bias_term(const SpectrumConfig& config, const std::vector<double>& theta_sq_norms, int n,
                 int m, double lambda_star) {
  config.validate();
  check_level(config, m);
  if (!(lambda_star > 0.0)) throw NonPositiveLambda("lambda_star must be > 0");
  if (theta_sq_norms.size() < static_cast<std::size_t>(m + 1))
    throw ShapeMismatch("need ||theta_l||^2 for every level l <= m");
  const double d = dof(config, m, lambda_star);
  const double nn = static_cast<double>(n);
  if (!(nn > d)) throw DegenerateDof("n <= D(m): deterministic equivalent not available");
  double sum = 0.0;
  for (int l = 0; l <= m; ++l) {
    const double s = std::pow(config.p, -l);
    sum += s * theta_sq_norms[static_cast<std::size_t>(l)] / ((s + lambda_star) * (s + lambda_star));
  }
  return nn * lambda_star * lambda_star / (nn - d) * sum;
}

double variance_term(double n, double dof) {
  if (dof < 0.0) throw DomainError("dof must be >= 0");
  if (!(n > dof)) throw DegenerateDof("n <= D(m): deterministic equivalent not available");
  return dof / (n - dof);
}

double tail_term(const SpectrumConfig& config, int m) {
  config.validate();
  check_level(config, m);
  const double x = config.r / config.p;
  double sum = 0.0;
  for (int l = m + 1; l < config.m_max; ++l) sum += std::pow(x, l);
  return sum;
}

std::vector<double> pinned_theta_sq_norms(const SpectrumConfig& config) {
  std::vector<double> norms(static_cast<std::size_t>(config.m_max));
  for (int l = 0; l < config.m_max; ++l) norms[static_cast<std::size_t>(l)] = std::pow(config.r, l);
  return norms;
}

EquivalentRisk predicted_error(const SpectrumConfig& config,
                               const std::vector<double>& theta_sq_norms, int n, int m,
                               double lambda) {
  EquivalentRisk risk;
  risk.n = n;
  risk.m = m;
  risk.lambda = lambda;
  risk.lambda_star = solve_lambda_star(config, n, m, lambda);
  risk.dof = dof(config, m, risk.lambda_star);
  risk.bias = bias_term(config, theta_sq_norms, n, m, risk.lambda_star);
  risk.variance = variance_term(static_cast<double>(n), risk.dof);
  risk.tail = tail_term(config, m);
  risk.tilde_tau_sq = config.tau * config.tau + risk.tail;
  risk.total = config.tau * config.tau + risk.bias + risk.tilde_tau_sq * risk.variance + risk.tail;
  return risk;
}

EquivalentRisk predicted_error_best(const SpectrumConfig& config,
                                    const std::vector<double>& theta_sq_norms, int n, int m,
                                    const LambdaPolicy& policy) {
  const std::vector<double> grid = policy.grid(config, n, m);
  bool found = false;
  EquivalentRisk best;
  for (double lambda : grid) {
    EquivalentRisk risk;
    try {
      risk = predicted_error(config, theta_sq_norms, n, m, lambda);
    } catch (const DegenerateDof&) {
      continue;
    }
    if (!found || risk.total < best.total) {
      best = risk;
      found = true;
    }
  }
  if (!found) throw DegenerateDof("every lambda candidate was degenerate for this cell");
  return best;
}

}  // namespace sslab
