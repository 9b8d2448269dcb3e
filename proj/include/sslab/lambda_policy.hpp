#pragma once

// Ridge regularization policies used by both the simulator and the
// closed-form risk predictions.

#include <cstdint>
#include <vector>

#include "sslab/multiscale_model.hpp"

namespace sslab {

// lambda = n^((kappa+1)/(2 kappa+1)) with kappa = log p / log q.
double theorem_lambda(const SpectrumConfig& config, int n);

// Three power schedules are exposed side by side (they come from different
// stated validity ranges; none is canonical here): the growing theorem rate
// n^((kappa+1)/(2 kappa+1)), the near-constant boundary rate n^(1-kappa), and
// the matched rate n^-kappa that tracks the effective-regularization scale.
struct LambdaPolicy {
  enum class Kind { fixed, theorem_schedule, boundary_schedule, matched_schedule, oracle_grid };

  Kind kind = Kind::oracle_grid;
  double fixed_value = 1.0;

  // Oracle grid: log-spaced candidates spanning [lo, hi] * n * p^-m_eff with
  // m_eff = min(m, log_q n).
  int grid_points = 25;
  double grid_lo_factor = 1e-6;
  double grid_hi_factor = 1e2;

  static LambdaPolicy fixed(double value);
  static LambdaPolicy theorem_schedule();   // lambda = n^((kappa+1)/(2 kappa+1))
  static LambdaPolicy boundary_schedule();  // lambda = n^(1-kappa)
  static LambdaPolicy matched_schedule();   // lambda = n^-kappa
  static LambdaPolicy oracle_grid(int points = 25, double lo = 1e-6, double hi = 1e2);

  // Candidate list for one (n, m) cell; a single entry unless oracle_grid.
  std::vector<double> grid(const SpectrumConfig& config, int n, int m) const;
};

}  // namespace sslab
