#pragma once

// Closed-form risk prediction for ridge on the truncated block model: the
// effective regularization lambda_star, degrees of freedom, bias and variance
// terms, and the discarded-level tail, assembled into a total that tracks the
// Monte Carlo mean.

#include <cstdint>
#include <vector>

#include "sslab/lambda_policy.hpp"
#include "sslab/multiscale_model.hpp"

namespace sslab {

struct EquivalentRisk {
  int n = 0;
  int m = 0;
  double lambda = 0.0;
  double lambda_star = 0.0;
  double dof = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double tail = 0.0;
  double tilde_tau_sq = 0.0;  // tau^2 + tail
  double total = 0.0;         // tau^2 + bias + tilde_tau_sq * variance + tail
};

// Unique positive solution of n - lambda/x = sum_{l<=m} s_l q^l / (s_l + x)
// with s_l = p^-l. Monotone in x, solved by bisection; the returned root
// satisfies |LHS - RHS| <= 1e-10 * n.
double solve_lambda_star(const SpectrumConfig& config, int n, int m, double lambda);

// D(m) = sum_{l<=m} s_l^2 q^l / (s_l + lambda_star)^2.
double dof(const SpectrumConfig& config, int m, double lambda_star);

// n lambda_star^2 / (n - D) * sum_{l<=m} s_l ||theta_l||^2 / (s_l + lambda_star)^2.
// theta_sq_norms[l] = ||theta_l||^2, needed for l = 0..m.
double bias_term(const SpectrumConfig& config, const std::vector<double>& theta_sq_norms, int n,
                 int m, double lambda_star);

// D / (n - D); requires n > dof.
double variance_term(double n, double dof);

// Discarded-level error sum_{l=m+1}^{m_max-1} (r/p)^l for the pinned
// spectrum; zero at m = m_max - 1.
double tail_term(const SpectrumConfig& config, int m);

// ||theta_l||^2 = r^l for l = 0..m_max-1.
std::vector<double> pinned_theta_sq_norms(const SpectrumConfig& config);

EquivalentRisk predicted_error(const SpectrumConfig& config,
                               const std::vector<double>& theta_sq_norms, int n, int m,
                               double lambda);

// Smallest predicted total over the policy's lambda candidates for the cell.
EquivalentRisk predicted_error_best(const SpectrumConfig& config,
                                    const std::vector<double>& theta_sq_norms, int n, int m,
                                    const LambdaPolicy& policy);

}  // namespace sslab
