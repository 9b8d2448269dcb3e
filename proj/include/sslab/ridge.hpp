#pragma once

// Ridge regression on truncated features and its exact population test error
// under the block model, plus the Monte Carlo cell/grid drivers.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cstdint>
#include <optional>
#include <vector>

#include "sslab/lambda_policy.hpp"
#include "sslab/multiscale_model.hpp"
#include "sslab/observation_grid.hpp"

namespace sslab {

enum class RidgeForm { automatic, primal, dual };

struct RidgeFit {
  BlockVector theta_hat;  // levels 0..m
  double lambda = 0.0;
  int n = 0;
  int m = 0;
};

// Exact minimizer of sum_i (y_i - <b, x_i>)^2 + lambda ||b||^2. The design
// matrix holds truncated features (n rows, one block-structured row per
// sample); q fixes the block boundaries. lambda = 0 requires full column
// rank. Primal solves the L x L normal equations, dual the n x n kernel
// system; automatic picks the smaller one.
RidgeFit fit_ridge(const Eigen::Ref<const Eigen::MatrixXd>& design,
                   const Eigen::Ref<const Eigen::VectorXd>& labels, double lambda, int q,
                   RidgeForm form = RidgeForm::automatic);

// Expectation of the squared test residual over a fresh sample:
// tau^2 + sum_{l<=m} p^-l ||theta_hat_l - theta_l||^2
//       + sum_{l>m}  p^-l ||theta_l||^2.
double population_test_error(const RidgeFit& fit, const BlockVector& theta,
                             const SpectrumConfig& config);

struct CellStats {
  double mean = 0.0;
  double std_error = 0.0;
  int replicates = 0;
  // Oracle-grid minima that landed on a grid endpoint (possible bracketing
  // problem when nonzero).
  int lambda_edge_hits = 0;
};

// Draws `replicates` fresh training sets, fits ridge under the policy, and
// averages the exact population test error. theta_override substitutes the
// pinned ground truth (e.g. a zero signal). Results do not depend on
// `threads`.
CellStats simulate_cell(const SpectrumConfig& config, int n, int m, const LambdaPolicy& policy,
                        int replicates, std::uint64_t seed,
                        const BlockVector* theta_override = nullptr, unsigned threads = 1);

// One row per (n, m) pair, column L from the block dimensions. Cells draw
// from independent streams keyed by their grid position, so the grid is
// reproducible for any parallel schedule.
ObservationGrid sweep(const SpectrumConfig& config, const std::vector<int>& n_list,
                      const std::vector<int>& m_list, const LambdaPolicy& policy, int replicates,
                      std::uint64_t seed, const BlockVector* theta_override = nullptr,
                      unsigned threads = 0);

std::uint64_t sweep_cell_seed(std::uint64_t seed, std::size_t n_index, std::size_t m_index);

namespace detail {

// Population test error of the ridge fit on one fixed dataset, as a function
// of lambda. One orthogonal reduction of the smaller Gram matrix up front,
// then each lambda costs a tridiagonal solve plus O(min(n,L)^2).
class RidgeErrorCurve {
 public:
  RidgeErrorCurve(const Eigen::Ref<const Eigen::MatrixXd>& design,
                  const Eigen::Ref<const Eigen::VectorXd>& labels, const BlockVector& theta,
                  int m, const SpectrumConfig& config);

  double error_at(double lambda);

 private:
  Eigen::VectorXd ridge_coefficients(double lambda);

  bool primal_ = true;
  Eigen::Index n_ = 0;
  Eigen::Index dim_ = 0;  // L, truncated coordinate count
  Eigen::MatrixXd design_;
  Eigen::VectorXd rhs_;        // X^T y (primal) or y (dual)
  Eigen::MatrixXd gram_;       // small-side Gram, kept only for tiny systems
  bool use_tridiagonal_ = false;
  Eigen::Tridiagonalization<Eigen::MatrixXd> tridiag_;
  Eigen::VectorXd tri_diag_;
  Eigen::VectorXd tri_sub_;
  Eigen::VectorXd reduced_rhs_;  // Q^T rhs

  Eigen::VectorXd theta_trunc_;
  std::vector<double> level_weights_;          // p^-l for l = 0..m
  std::vector<Eigen::Index> level_offsets_;
  std::vector<Eigen::Index> level_dims_;
  double base_error_ = 0.0;  // tau^2 + discarded-level signal energy

  Eigen::VectorXd scratch_u_, scratch_v_, scratch_theta_;
};

}  // namespace detail

}  // namespace sslab
