#include "sslab/scaling_fit.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "sslab/errors.hpp"

namespace sslab {

void ScalingLawParams::validate() const {
  const bool finite = std::isfinite(err_star) && std::isfinite(A) && std::isfinite(B) &&
                      std::isfinite(alpha) && std::isfinite(beta);
  if (!finite) throw DomainError("scaling-law parameters must be finite");
  if (!(err_star >= 0.0)) throw DomainError("err_star must be >= 0");
  if (!(A > 0.0 && B > 0.0)) throw DomainError("A and B must be > 0");
  if (!(alpha > 0.0 && beta > 0.0)) throw DomainError("alpha and beta must be > 0");
}

double predict(const ScalingLawParams& params, double n, double L) {
  params.validate();
  if (!(n > 0.0) || !(L > 0.0)) throw DomainError("predict needs n > 0 and L > 0");
  return params.err_star + params.A * std::pow(n, -params.alpha) +
         params.B * std::pow(L, -params.beta);
}

std::pair<double, double> theoretical_exponents(const SpectrumConfig& config) {
  config.validate();
  const double log_p = std::log(config.p);
  const double log_q = std::log(static_cast<double>(config.q));
  const double alpha = 2.0 * log_p / (2.0 * log_p + log_q);
  const double beta = std::log(config.p / config.r) / log_q;
  return {alpha, beta};
}

Eigen::VectorXd nonneg_lstsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index cols = A.cols();
  if (cols > 12) throw DomainError("nonneg_lstsq supports at most 12 columns");
  if (A.rows() != b.size()) throw ShapeMismatch("row count mismatch in nonneg_lstsq");

  Eigen::VectorXd best = Eigen::VectorXd::Zero(cols);
  double best_rss = b.squaredNorm();  // empty support

  for (unsigned mask = 1; mask < (1u << cols); ++mask) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < cols; ++j)
      if (mask & (1u << j)) support.push_back(j);

    Eigen::MatrixXd As(A.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) As.col(static_cast<Eigen::Index>(k)) = A.col(support[k]);

    const Eigen::MatrixXd gram = As.transpose() * As;
    const Eigen::VectorXd rhs = As.transpose() * b;
    const Eigen::VectorXd coef = gram.ldlt().solve(rhs);
    if (!coef.allFinite()) continue;
    if ((coef.array() < 0.0).any()) continue;

    const double rss = (As * coef - b).squaredNorm();
    if (rss < best_rss) {
      best_rss = rss;
      best.setZero();
      for (std::size_t k = 0; k < support.size(); ++k) best(support[k]) = coef(static_cast<Eigen::Index>(k));
    }
  }
  return best;
}

namespace {

struct FitProblem {
  Eigen::VectorXd n_values;
  Eigen::VectorXd L_values;
  Eigen::VectorXd errors;
  Eigen::VectorXd sqrt_weights;

  // Inner solve: weighted NNLS over (err_star, A, B) at fixed exponents.
  // Returns the weighted rss.
  double inner_solve(double alpha, double beta, Eigen::Vector3d& coef) const {
    const Eigen::Index rows = errors.size();
    Eigen::MatrixXd basis(rows, 3);
    basis.col(0) = sqrt_weights;
    basis.col(1) = sqrt_weights.array() * Eigen::pow(n_values.array(), -alpha);
    basis.col(2) = sqrt_weights.array() * Eigen::pow(L_values.array(), -beta);
    const Eigen::VectorXd target = sqrt_weights.array() * errors.array();
    const Eigen::VectorXd solution = nonneg_lstsq(basis, target);
    coef = solution.head<3>();
    return (basis * solution - target).squaredNorm();
  }
};

struct Candidate {
  double alpha = 0.0;
  double beta = 0.0;
  double rss = std::numeric_limits<double>::infinity();
  Eigen::Vector3d coef = Eigen::Vector3d::Zero();

  // Strict rss improvement; used inside the local refinement, where a
  // secondary tie-break would walk along flat valleys.
  bool improves(const Candidate& other) const {
    if (!std::isfinite(other.rss)) return std::isfinite(rss);
    if (!std::isfinite(rss)) return false;
    return rss < other.rss;
  }

  // Start selection: smaller rss wins, near-ties prefer the flatter
  // extrapolation (smaller alpha + beta).
  bool better_than(const Candidate& other) const {
    if (!std::isfinite(other.rss)) return std::isfinite(rss);
    if (!std::isfinite(rss)) return false;
    const double tol = 1e-12 * std::max(1.0, other.rss);
    if (rss < other.rss - tol) return true;
    if (rss > other.rss + tol) return false;
    return alpha + beta < other.alpha + other.beta;
  }
};

Candidate evaluate(const FitProblem& problem, double alpha, double beta) {
  Candidate c;
  c.alpha = alpha;
  c.beta = beta;
  c.rss = problem.inner_solve(alpha, beta, c.coef);
  return c;
}

// Nelder-Mead on (log alpha, log beta); out-of-box points score +inf.
Candidate refine_simplex(const FitProblem& problem, const Candidate& start, double lo, double hi,
                         int max_iter, bool& converged) {
  using Point = Eigen::Vector2d;
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);

  auto score = [&](const Point& x, Candidate& out) {
    if (x(0) < log_lo || x(0) > log_hi || x(1) < log_lo || x(1) > log_hi) {
      out.rss = std::numeric_limits<double>::infinity();
      return;
    }
    out = evaluate(problem, std::exp(x(0)), std::exp(x(1)));
  };

  std::array<Point, 3> simplex;
  std::array<Candidate, 3> values;
  simplex[0] = Point(std::log(start.alpha), std::log(start.beta));
  simplex[1] = simplex[0] + Point(0.05, 0.0);
  simplex[2] = simplex[0] + Point(0.0, 0.05);
  for (int i = 0; i < 3; ++i) {
    simplex[i] = simplex[i].cwiseMax(log_lo).cwiseMin(log_hi);
    score(simplex[i], values[i]);
  }

  converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a].improves(values[b]); });
    const Point& best = simplex[order[0]];
    const Point& worst = simplex[order[2]];

    const double spread = (simplex[order[1]] - best).norm() + (worst - best).norm();
    if (spread < 1e-13) {
      converged = true;
      break;
    }

    const Point centroid = 0.5 * (best + simplex[order[1]]);
    Point reflected = centroid + (centroid - worst);
    Candidate reflected_value;
    score(reflected, reflected_value);

    if (reflected_value.improves(values[order[0]])) {
      Point expanded = centroid + 2.0 * (centroid - worst);
      Candidate expanded_value;
      score(expanded, expanded_value);
      if (expanded_value.improves(reflected_value)) {
        simplex[order[2]] = expanded;
        values[order[2]] = expanded_value;
      } else {
        simplex[order[2]] = reflected;
        values[order[2]] = reflected_value;
      }
    } else if (reflected_value.improves(values[order[1]])) {
      simplex[order[2]] = reflected;
      values[order[2]] = reflected_value;
    } else {
      Point contracted = centroid + 0.5 * (worst - centroid);
      Candidate contracted_value;
      score(contracted, contracted_value);
      if (contracted_value.improves(values[order[2]])) {
        simplex[order[2]] = contracted;
        values[order[2]] = contracted_value;
      } else {
        for (int i : {order[1], order[2]}) {
          simplex[i] = best + 0.5 * (simplex[i] - best);
          score(simplex[i], values[i]);
        }
      }
    }
  }

  Candidate best = values[0];
  for (int i = 1; i < 3; ++i)
    if (values[i].improves(best)) best = values[i];
  return best;
}

// Levenberg-Marquardt polish on the exponents with the linear coefficients
// re-solved at every trial point (the envelope makes the reduced gradient
// exact when the inner constraints are inactive).
Candidate polish_lm(const FitProblem& problem, Candidate current, double lo, double hi,
                    int max_iter) {
  double mu = 1e-3;
  const Eigen::Index rows = problem.errors.size();
  for (int iter = 0; iter < max_iter; ++iter) {
    const double alpha = current.alpha;
    const double beta = current.beta;
    const Eigen::ArrayXd n_pow = Eigen::pow(problem.n_values.array(), -alpha);
    const Eigen::ArrayXd L_pow = Eigen::pow(problem.L_values.array(), -beta);
    const Eigen::ArrayXd w = problem.sqrt_weights.array();

    Eigen::VectorXd residual =
        (w * (current.coef(0) + current.coef(1) * n_pow + current.coef(2) * L_pow -
              problem.errors.array()))
            .matrix();
    Eigen::MatrixXd jacobian(rows, 2);
    jacobian.col(0) = (-current.coef(1) * w * n_pow * problem.n_values.array().log()).matrix();
    jacobian.col(1) = (-current.coef(2) * w * L_pow * problem.L_values.array().log()).matrix();

    const Eigen::Matrix2d jtj = jacobian.transpose() * jacobian;
    const Eigen::Vector2d jtr = jacobian.transpose() * residual;
    if (jtr.norm() <= 1e-14 * std::max(1.0, current.rss)) break;

    bool stepped = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::Matrix2d damped = jtj;
      damped.diagonal() += mu * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector2d delta = damped.ldlt().solve(-jtr);
      if (!delta.allFinite()) {
        mu *= 10.0;
        continue;
      }
      const double trial_alpha = std::clamp(alpha + delta(0), lo, hi);
      const double trial_beta = std::clamp(beta + delta(1), lo, hi);
      const Candidate trial = evaluate(problem, trial_alpha, trial_beta);
      if (trial.rss < current.rss) {
        current = trial;
        mu = std::max(mu * 0.3, 1e-12);
        stepped = true;
        break;
      }
      mu *= 10.0;
    }
    if (!stepped) break;
  }
  return current;
}

}  // namespace

FitReport fit(const ObservationGrid& grid, const FitOptions& options) {
  grid.check();
  if (grid.rows.size() < 5 || grid.distinct_n() < 2 || grid.distinct_L() < 2)
    throw InsufficientGrid("need >= 5 rows spanning >= 2 distinct n and >= 2 distinct L");
  if (options.alpha_starts < 2 || options.beta_starts < 2)
    throw DomainError("need at least 2 starts per exponent");
  if (!(options.exponent_lo > 0.0 && options.exponent_hi > options.exponent_lo))
    throw DomainError("invalid exponent search box");

  const Eigen::Index rows = static_cast<Eigen::Index>(grid.rows.size());
  FitProblem problem;
  problem.n_values.resize(rows);
  problem.L_values.resize(rows);
  problem.errors.resize(rows);
  problem.sqrt_weights.resize(rows);

  const bool weighted = options.use_weights && grid.has_std_error() &&
                        std::all_of(grid.rows.begin(), grid.rows.end(),
                                    [](const GridRow& r) { return *r.std_error > 0.0; });
  for (Eigen::Index i = 0; i < rows; ++i) {
    const GridRow& row = grid.rows[static_cast<std::size_t>(i)];
    problem.n_values(i) = static_cast<double>(row.n);
    problem.L_values(i) = row.L;
    problem.errors(i) = row.err;
    problem.sqrt_weights(i) = weighted ? 1.0 / *row.std_error : 1.0;
  }

  const double err_spread = problem.errors.maxCoeff() - problem.errors.minCoeff();
  if (err_spread <= 1e-12 * std::max(1.0, problem.errors.cwiseAbs().maxCoeff()))
    throw DegenerateFit("all observed errors are equal");

  // Multi-start over a log grid of exponents.
  const double log_lo = std::log(options.exponent_lo);
  const double log_hi = std::log(options.exponent_hi);
  Candidate best;
  for (int i = 0; i < options.alpha_starts; ++i) {
    const double ta = static_cast<double>(i) / static_cast<double>(options.alpha_starts - 1);
    const double alpha = std::exp(log_lo + ta * (log_hi - log_lo));
    for (int j = 0; j < options.beta_starts; ++j) {
      const double tb = static_cast<double>(j) / static_cast<double>(options.beta_starts - 1);
      const double beta = std::exp(log_lo + tb * (log_hi - log_lo));
      const Candidate c = evaluate(problem, alpha, beta);
      if (c.better_than(best)) best = c;
    }
  }

  // Two rounds of simplex + LM polish; the second round matters when the
  // exponents are nearly collinear with the intercept (small alpha or beta).
  bool simplex_converged = false;
  for (int round = 0; round < 2; ++round) {
    const Candidate refined = refine_simplex(problem, best, options.exponent_lo,
                                             options.exponent_hi, options.simplex_max_iter,
                                             simplex_converged);
    if (refined.improves(best)) best = refined;
    const Candidate polished = polish_lm(problem, best, options.exponent_lo,
                                         options.exponent_hi, options.polish_max_iter);
    if (polished.improves(best)) best = polished;
  }

  FitReport report;
  report.params.err_star = best.coef(0);
  report.params.A = best.coef(1);
  report.params.B = best.coef(2);
  report.params.alpha = best.alpha;
  report.params.beta = best.beta;
  report.rss = std::max(best.rss, 0.0);
  report.n_obs = static_cast<int>(rows);
  report.converged = simplex_converged;
  report.starts_tried = options.alpha_starts * options.beta_starts;

  const Eigen::ArrayXd w2 = problem.sqrt_weights.array().square();
  const double weighted_mean = (w2 * problem.errors.array()).sum() / w2.sum();
  const double tss = (w2 * (problem.errors.array() - weighted_mean).square()).sum();
  report.r_squared = tss > 0.0 ? 1.0 - report.rss / tss : 0.0;
  return report;
}

}  // namespace sslab
