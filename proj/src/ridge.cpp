#include "sslab/ridge.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sslab/errors.hpp"
#include "sslab/parallel.hpp"

namespace sslab {

namespace {

// Infer the level count from a truncated coordinate count.
int levels_from_dim(Eigen::Index dim, int q) {
  Eigen::Index total = 0;
  Eigen::Index block = 1;
  for (int levels = 1; levels < 64; ++levels) {
    total += block;
    if (total == dim) return levels;
    if (total > dim) break;
    block *= q;
  }
  throw ShapeMismatch("design width is not a truncated block dimension for this q");
}

// Solve (T + lambda I) u = b for symmetric positive-definite tridiagonal T
// given as (diag, sub). Plain LDL^T without pivoting; the shift keeps pivots
// positive.
void solve_shifted_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                               double lambda, const Eigen::VectorXd& b, Eigen::VectorXd& u) {
  const Eigen::Index k = diag.size();
  u.resize(k);
  if (k == 1) {
    const double pivot = diag(0) + lambda;
    if (!(pivot > 0.0)) throw SingularSystem("non-positive pivot in tridiagonal solve");
    u(0) = b(0) / pivot;
    return;
  }
  static thread_local Eigen::VectorXd pivots, z;
  pivots.resize(k);
  z.resize(k);
  pivots(0) = diag(0) + lambda;
  if (!(pivots(0) > 0.0)) throw SingularSystem("non-positive pivot in tridiagonal solve");
  z(0) = b(0);
  for (Eigen::Index i = 1; i < k; ++i) {
    const double l = sub(i - 1) / pivots(i - 1);
    pivots(i) = diag(i) + lambda - l * sub(i - 1);
    if (!(pivots(i) > 0.0)) throw SingularSystem("non-positive pivot in tridiagonal solve");
    z(i) = b(i) - l * z(i - 1);
  }
  u(k - 1) = z(k - 1) / pivots(k - 1);
  for (Eigen::Index i = k - 2; i >= 0; --i) u(i) = (z(i) - sub(i) * u(i + 1)) / pivots(i);
}

Eigen::MatrixXd small_gram(const Eigen::Ref<const Eigen::MatrixXd>& design, bool primal) {
  const Eigen::Index k = primal ? design.cols() : design.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  if (primal)
    gram.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  else
    gram.selfadjointView<Eigen::Lower>().rankUpdate(design);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  return gram;
}

}  // namespace

RidgeFit fit_ridge(const Eigen::Ref<const Eigen::MatrixXd>& design,
                   const Eigen::Ref<const Eigen::VectorXd>& labels, double lambda, int q,
                   RidgeForm form) {
  const Eigen::Index n = design.rows();
  const Eigen::Index dim = design.cols();
  if (n < 1 || dim < 1) throw ShapeMismatch("empty design matrix");
  if (labels.size() != n) throw ShapeMismatch("label count does not match sample count");
  if (q < 2) throw DomainError("q must be >= 2");
  if (lambda < 0.0) throw DomainError("lambda must be >= 0");
  const int levels = levels_from_dim(dim, q);

  Eigen::VectorXd theta;
  if (lambda == 0.0) {
    // Least squares; the minimizer is unique only with full column rank.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < dim)
      throw SingularSystem("lambda = 0 with rank-deficient design has no unique minimizer");
    theta = qr.solve(labels);
  } else {
    bool primal = dim <= n;
    if (form == RidgeForm::primal) primal = true;
    if (form == RidgeForm::dual) primal = false;
    if (primal) {
      Eigen::MatrixXd gram = small_gram(design, true);
      gram.diagonal().array() += lambda;
      Eigen::LLT<Eigen::MatrixXd> llt(gram);
      if (llt.info() != Eigen::Success) throw SingularSystem("primal normal equations not SPD");
      theta = llt.solve(design.transpose() * labels);
    } else {
      Eigen::MatrixXd kernel = small_gram(design, false);
      kernel.diagonal().array() += lambda;
      Eigen::LLT<Eigen::MatrixXd> llt(kernel);
      if (llt.info() != Eigen::Success) throw SingularSystem("dual kernel system not SPD");
      theta = design.transpose() * llt.solve(labels);
    }
  }

  RidgeFit fit;
  fit.theta_hat.q = q;
  fit.theta_hat.level_count = levels;
  fit.theta_hat.coeffs = std::move(theta);
  fit.theta_hat.check_consistent();
  fit.lambda = lambda;
  fit.n = static_cast<int>(n);
  fit.m = levels - 1;
  return fit;
}

double population_test_error(const RidgeFit& fit, const BlockVector& theta,
                             const SpectrumConfig& config) {
  fit.theta_hat.check_consistent();
  theta.check_consistent();
  if (fit.theta_hat.q != config.q || theta.q != config.q)
    throw ShapeMismatch("block-growth factors differ");
  if (theta.level_count != config.m_max)
    throw ShapeMismatch("signal must carry all m_max levels");
  if (fit.m >= config.m_max) throw ShapeMismatch("fit has more levels than the model");

  double err = config.tau * config.tau;
  for (int l = 0; l <= fit.m; ++l)
    err += std::pow(config.p, -l) * (fit.theta_hat.block(l) - theta.block(l)).squaredNorm();
  for (int l = fit.m + 1; l < config.m_max; ++l)
    err += std::pow(config.p, -l) * theta.block(l).squaredNorm();
  return err;
}

namespace detail {

RidgeErrorCurve::RidgeErrorCurve(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                 const Eigen::Ref<const Eigen::VectorXd>& labels,
                                 const BlockVector& theta, int m, const SpectrumConfig& config) {
  theta.check_consistent();
  if (theta.level_count != config.m_max)
    throw ShapeMismatch("signal must carry all m_max levels");
  if (m < 0 || m >= config.m_max) throw LevelOutOfRange("truncation level out of range");

  n_ = design.rows();
  dim_ = design.cols();
  if (dim_ != total_dim(config.q, m + 1))
    throw ShapeMismatch("design width does not match the truncation level");
  if (labels.size() != n_) throw ShapeMismatch("label count does not match sample count");

  design_ = design;
  primal_ = dim_ <= n_;
  rhs_ = primal_ ? Eigen::VectorXd(design_.transpose() * labels) : Eigen::VectorXd(labels);

  const Eigen::Index k = primal_ ? dim_ : n_;
  Eigen::MatrixXd gram = small_gram(design_, primal_);
  use_tridiagonal_ = k >= 3;
  if (use_tridiagonal_) {
    tridiag_.compute(gram);
    tri_diag_ = tridiag_.diagonal();
    tri_sub_ = tridiag_.subDiagonal();
    reduced_rhs_ = tridiag_.matrixQ().transpose() * rhs_;
  } else {
    gram_ = std::move(gram);
  }

  const BlockDims dims = block_dims(config.q, m + 1);
  level_offsets_.resize(dims.dims.size());
  level_dims_ = dims.dims;
  level_weights_.resize(dims.dims.size());
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < dims.dims.size(); ++l) {
    level_offsets_[l] = offset;
    offset += dims.dims[l];
    level_weights_[l] = std::pow(config.p, -static_cast<int>(l));
  }

  theta_trunc_ = theta.coeffs.head(dim_);
  base_error_ = config.tau * config.tau;
  for (int l = m + 1; l < config.m_max; ++l)
    base_error_ += std::pow(config.p, -l) * theta.block(l).squaredNorm();
}

Eigen::VectorXd RidgeErrorCurve::ridge_coefficients(double lambda) {
  if (!(lambda > 0.0)) throw NonPositiveLambda("error curve needs lambda > 0");
  if (use_tridiagonal_) {
    solve_shifted_tridiagonal(tri_diag_, tri_sub_, lambda, reduced_rhs_, scratch_u_);
    scratch_v_ = tridiag_.matrixQ() * scratch_u_;
  } else {
    Eigen::MatrixXd shifted = gram_;
    shifted.diagonal().array() += lambda;
    scratch_v_ = shifted.ldlt().solve(rhs_);
  }
  if (primal_) return scratch_v_;
  return design_.transpose() * scratch_v_;
}

double RidgeErrorCurve::error_at(double lambda) {
  scratch_theta_ = ridge_coefficients(lambda);
  double err = base_error_;
  for (std::size_t l = 0; l < level_dims_.size(); ++l) {
    err += level_weights_[l] * (scratch_theta_.segment(level_offsets_[l], level_dims_[l]) -
                                theta_trunc_.segment(level_offsets_[l], level_dims_[l]))
                                   .squaredNorm();
  }
  return err;
}

}  // namespace detail

namespace {

struct ReplicateResult {
  double error = 0.0;
  bool edge = false;
};

ReplicateResult run_replicate(const SpectrumConfig& config, int n, int m,
                              const std::vector<double>& lambda_grid, std::uint64_t data_seed,
                              const BlockVector& theta) {
  const Eigen::MatrixXd features = sample_features(config, n, data_seed);
  const Eigen::VectorXd labels = sample_labels(theta, features, config.tau, data_seed);
  detail::RidgeErrorCurve curve(truncate_features(features, config.q, m), labels, theta, m,
                                config);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const double err = curve.error_at(lambda_grid[i]);
    if (err < best) {
      best = err;
      best_index = i;
    }
  }
  ReplicateResult out;
  out.error = best;
  out.edge = lambda_grid.size() > 1 && (best_index == 0 || best_index + 1 == lambda_grid.size());
  return out;
}

CellStats aggregate(const std::vector<ReplicateResult>& results) {
  CellStats stats;
  stats.replicates = static_cast<int>(results.size());
  double sum = 0.0;
  for (const auto& r : results) {
    sum += r.error;
    stats.lambda_edge_hits += r.edge ? 1 : 0;
  }
  stats.mean = sum / static_cast<double>(results.size());
  if (results.size() > 1) {
    double ss = 0.0;
    for (const auto& r : results) ss += (r.error - stats.mean) * (r.error - stats.mean);
    const double var = ss / static_cast<double>(results.size() - 1);
    stats.std_error = std::sqrt(var / static_cast<double>(results.size()));
  }
  return stats;
}

}  // namespace

CellStats simulate_cell(const SpectrumConfig& config, int n, int m, const LambdaPolicy& policy,
                        int replicates, std::uint64_t seed, const BlockVector* theta_override,
                        unsigned threads) {
  config.validate();
  if (n < 1) throw DomainError("n must be >= 1");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  if (m < 0 || m >= config.m_max) throw LevelOutOfRange("m must satisfy 0 <= m < m_max");

  const BlockVector theta = theta_override ? *theta_override : make_ground_truth(config);
  const std::vector<double> lambda_grid = policy.grid(config, n, m);

  std::vector<ReplicateResult> results(static_cast<std::size_t>(replicates));
  parallel_for(
      results.size(),
      [&](std::size_t rep) {
        const std::uint64_t data_seed = derive_seed(seed, StreamTag::replicate, rep);
        results[rep] = run_replicate(config, n, m, lambda_grid, data_seed, theta);
      },
      threads);
  return aggregate(results);
}

std::uint64_t sweep_cell_seed(std::uint64_t seed, std::size_t n_index, std::size_t m_index) {
  return derive_seed(seed, StreamTag::sweep_cell, n_index, m_index);
}

ObservationGrid sweep(const SpectrumConfig& config, const std::vector<int>& n_list,
                      const std::vector<int>& m_list, const LambdaPolicy& policy, int replicates,
                      std::uint64_t seed, const BlockVector* theta_override, unsigned threads) {
  config.validate();
  if (n_list.empty() || m_list.empty()) throw DomainError("n and m lists must be non-empty");
  if (replicates < 1) throw DomainError("replicates must be >= 1");
  for (int n : n_list)
    if (n < 1) throw DomainError("n must be >= 1");
  for (int m : m_list)
    if (m < 0 || m >= config.m_max) throw LevelOutOfRange("m must satisfy 0 <= m < m_max");

  const BlockVector theta = theta_override ? *theta_override : make_ground_truth(config);

  struct Cell {
    std::size_t n_index, m_index;
    std::vector<double> lambda_grid;
    std::uint64_t cell_seed;
  };
  std::vector<Cell> cells;
  cells.reserve(n_list.size() * m_list.size());
  for (std::size_t i = 0; i < n_list.size(); ++i)
    for (std::size_t j = 0; j < m_list.size(); ++j)
      cells.push_back({i, j, policy.grid(config, n_list[i], m_list[j]),
                       sweep_cell_seed(seed, i, j)});

  // One work item per (cell, replicate); slots are disjoint, so any schedule
  // produces the same grid.
  const std::size_t reps = static_cast<std::size_t>(replicates);
  std::vector<std::vector<ReplicateResult>> results(cells.size());
  for (auto& cell_results : results) cell_results.resize(reps);
  parallel_for(
      cells.size() * reps,
      [&](std::size_t item) {
        const std::size_t c = item / reps;
        const std::size_t rep = item % reps;
        const Cell& cell = cells[c];
        const std::uint64_t data_seed = derive_seed(cell.cell_seed, StreamTag::replicate, rep);
        results[c][rep] = run_replicate(config, n_list[cell.n_index], m_list[cell.m_index],
                                        cell.lambda_grid, data_seed, theta);
      },
      threads);

  ObservationGrid grid;
  grid.rows.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const CellStats stats = aggregate(results[c]);
    GridRow row;
    row.n = n_list[cells[c].n_index];
    row.L = static_cast<double>(total_dim(config.q, m_list[cells[c].m_index] + 1));
    row.err = stats.mean;
    row.std_error = stats.std_error;
    row.replicates = stats.replicates;
    grid.rows.push_back(row);
  }
  grid.check();
  return grid;
}

}  // namespace sslab
