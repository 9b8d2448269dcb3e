#pragma once

// Fits err(n, L) = err_star + A n^-alpha + B L^-beta to an observation grid.
// Variable projection: the exponents are searched over a multi-start grid and
// refined locally, while (err_star, A, B) come from an exact nonnegative
// least-squares solve at each candidate.

#include <Eigen/Core>
#include <utility>

#include "sslab/multiscale_model.hpp"
#include "sslab/observation_grid.hpp"

namespace sslab {

struct ScalingLawParams {
  double err_star = 0.0;
  double A = 1.0;
  double B = 1.0;
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
};

double predict(const ScalingLawParams& params, double n, double L);

struct FitOptions {
  int alpha_starts = 20;
  int beta_starts = 20;
  double exponent_lo = 0.01;
  double exponent_hi = 4.0;
  // 1/stderr^2 weights when every row carries one; unit weights otherwise.
  bool use_weights = true;
  int simplex_max_iter = 600;
  int polish_max_iter = 60;
};

struct FitReport {
  ScalingLawParams params;
  double rss = 0.0;
  double r_squared = 0.0;
  int n_obs = 0;
  bool converged = false;
  int starts_tried = 0;
};

FitReport fit(const ObservationGrid& grid, const FitOptions& options = {});

// Exponents implied by the block model: alpha = 2 log p / (2 log p + log q),
// beta = log(p/r) / log q.
std::pair<double, double> theoretical_exponents(const SpectrumConfig& config);

// min ||A x - b||_2 subject to x >= 0, exact for a small column count
// (support enumeration). Used for the inner (err_star, A, B) solve.
Eigen::VectorXd nonneg_lstsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace sslab
