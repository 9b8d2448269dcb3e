#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sslab/errors.hpp"
#include "sslab/rng.hpp"
#include "sslab/storage_optimizer.hpp"

using namespace sslab;

namespace {

ScalingLawParams classification_params() {
  ScalingLawParams params;
  params.err_star = 0.0;
  params.A = 6.7;
  params.B = 1.4e3;
  params.alpha = 0.33;
  params.beta = 1.06;
  return params;
}

ScalingLawParams random_params(StreamRng& rng) {
  ScalingLawParams params;
  params.err_star = 0.5 * rng.next_uniform();
  params.A = std::exp(rng.next_symmetric(std::log(100.0)));
  params.B = std::exp(rng.next_symmetric(std::log(100.0)));
  params.alpha = std::exp(rng.next_symmetric(std::log(6.0))) * 0.4;
  params.beta = std::exp(rng.next_symmetric(std::log(6.0))) * 0.4;
  params.alpha = std::clamp(params.alpha, 0.05, 3.0);
  params.beta = std::clamp(params.beta, 0.05, 3.0);
  return params;
}

}  // namespace

TEST_CASE("symmetric parameters split the budget evenly") {
  ScalingLawParams params;
  params.err_star = 0.0;
  params.A = 1.0;
  params.B = 1.0;
  params.alpha = 1.0;
  params.beta = 1.0;
  const Allocation alloc = optimal_allocation(params, 100.0);
  CHECK(alloc.L_star == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(alloc.n_star == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("classification budget reproduces the reference split") {
  const Allocation alloc = optimal_allocation(classification_params(), 48480000.0);
  CHECK(std::abs(alloc.n_star - 6838.0) / 6838.0 <= 0.05);
  CHECK(std::abs(alloc.L_star - 7087.0) / 7087.0 <= 0.05);
  CHECK(alloc.scheme == AllocationScheme::optimal);
}

TEST_CASE("closed form satisfies constraint, stationarity, and homogeneity") {
  StreamRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ScalingLawParams params = random_params(rng);
    const double s = std::exp(std::log(1e3) + rng.next_uniform() * std::log(1e6));
    const Allocation alloc = optimal_allocation(params, s);

    CHECK(std::abs(alloc.n_star * alloc.L_star - s) / s <= 1e-9);

    const double lhs = params.alpha * params.A * std::pow(alloc.n_star, -params.alpha);
    const double rhs = params.beta * params.B * std::pow(alloc.L_star, -params.beta);
    CHECK(std::abs(lhs - rhs) / rhs <= 1e-8);

    const double k = 7.5;
    const Allocation scaled = optimal_allocation(params, k * s);
    const double exponent = params.alpha / (params.alpha + params.beta);
    CHECK(scaled.L_star / alloc.L_star ==
          doctest::Approx(std::pow(k, exponent)).epsilon(1e-12));
  }
}

TEST_CASE("brute force matches the closed form") {
  ScalingLawParams unit;
  unit.err_star = 0.0;
  unit.A = 1.0;
  unit.B = 1.0;
  unit.alpha = 1.0;
  unit.beta = 1.0;
  const Allocation brute = brute_force_allocation(unit, 100.0);
  CHECK(brute.L_star == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(brute.n_star == doctest::Approx(10.0).epsilon(1e-6));

  StreamRng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const ScalingLawParams params = random_params(rng);
    const double s = std::exp(std::log(1e4) + rng.next_uniform() * std::log(1e5));
    const Allocation closed = optimal_allocation(params, s);
    const Allocation scanned = brute_force_allocation(params, s);
    CHECK(std::abs(scanned.predicted_err - closed.predicted_err) /
              closed.predicted_err <=
          1e-3);
  }
  CHECK_THROWS_AS(brute_force_allocation(unit, 100.0, 50), DomainError);
}

TEST_CASE("objective derivative changes sign exactly once") {
  StreamRng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const ScalingLawParams params = random_params(rng);
    const double s = 1e6;
    // Scan a window guaranteed to straddle the optimum.
    const double center = std::log(optimal_allocation(params, s).L_star);
    int sign_changes = 0;
    double last_delta = 0.0;
    double last_value = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double log_L = center + 12.0 * (static_cast<double>(i) / 400.0 - 0.5);
      const double L = std::exp(log_L);
      const double value = predict(params, s / L, L);
      if (i > 0) {
        const double delta = value - last_value;
        if (last_delta != 0.0 && delta != 0.0 &&
            std::signbit(delta) != std::signbit(last_delta))
          ++sign_changes;
        if (delta != 0.0) last_delta = delta;
      }
      last_value = value;
    }
    CHECK(sign_changes == 1);
  }
}

TEST_CASE("local optimality of the closed-form split") {
  const ScalingLawParams params = classification_params();
  const double s = 9.696e7;
  const Allocation alloc = optimal_allocation(params, s);
  const double at_opt = alloc.predicted_err;
  CHECK(at_opt <= predict(params, s / (2.0 * alloc.L_star), 2.0 * alloc.L_star));
  CHECK(at_opt <= predict(params, s / (0.5 * alloc.L_star), 0.5 * alloc.L_star));
}

TEST_CASE("optimized error decays with the harmonic-mean exponent") {
  ScalingLawParams unit;
  unit.err_star = 0.0;
  unit.A = 1.0;
  unit.B = 1.0;
  unit.alpha = 1.0;
  unit.beta = 1.0;
  const std::vector<double> budgets = {1e3, 1e4, 1e5, 1e6, 1e7};
  const OptimizedErrorCurve curve = optimized_error_curve(unit, budgets);
  CHECK(curve.fitted_exponent == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(harmonic_exponent(unit) == doctest::Approx(0.5).epsilon(1e-15));

  const ScalingLawParams cls = classification_params();
  const OptimizedErrorCurve cls_curve =
      optimized_error_curve(cls, {1e7, 1e8, 1e9, 1e10});
  const double nu = harmonic_exponent(cls);
  CHECK(nu == doctest::Approx(0.33 * 1.06 / 1.39).epsilon(1e-12));
  CHECK(std::abs(cls_curve.fitted_exponent - nu) <= 1e-4);

  StreamRng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const ScalingLawParams params = random_params(rng);
    CHECK(harmonic_exponent(params) < std::min(params.alpha, params.beta));
  }

  CHECK_THROWS_AS(optimized_error_curve(unit, {1e3, 1e4, 1e5}), DomainError);
  CHECK_THROWS_AS(optimized_error_curve(unit, {1e3, 2e3, 3e3, 4e3}), DomainError);

  // Budgets so large the excess underflows: numerically degenerate.
  ScalingLawParams floored = unit;
  floored.err_star = 0.3;
  CHECK_THROWS_AS(optimized_error_curve(floored, {1e300, 2e300, 1e301, 1e302, 1e303}),
                  DomainError);
}

TEST_CASE("fixed-level baselines never beat the optimum") {
  const ScalingLawParams params = classification_params();
  const double s = 48480000.0;
  const Allocation best = optimal_allocation(params, s);

  const Allocation at_opt = fixed_level_plan(params, s, best.L_star);
  CHECK(at_opt.predicted_err == doctest::Approx(best.predicted_err).epsilon(1e-12));
  CHECK(at_opt.scheme == AllocationScheme::fixed_level);

  // Original-format bytes per example for the classification set.
  const Allocation original = original_format_plan(params, s, 42804.0);
  CHECK(original.n_star == doctest::Approx(s / 42804.0).epsilon(1e-12));
  CHECK(original.n_int == 1132);
  CHECK(original.predicted_err > best.predicted_err);
  CHECK(original.scheme == AllocationScheme::original_format);

  StreamRng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const double L = best.L_star * std::exp(rng.next_symmetric(std::log(50.0)));
    if (s < L) continue;
    CHECK(fixed_level_plan(params, s, L).predicted_err >= best.predicted_err - 1e-12);
  }
}

TEST_CASE("segmentation-style original format leaves very few examples") {
  ScalingLawParams params;
  params.err_star = 0.1;
  params.A = 4.3;
  params.B = 4.3e5;
  params.alpha = 0.59;
  params.beta = 1.6;
  const Allocation alloc = original_format_plan(params, 36360000.0, 1711011.0);
  CHECK(alloc.n_int == 21);
  CHECK(alloc.n_int < 100);
}

TEST_CASE("budget smaller than one example is rejected") {
  const ScalingLawParams params = classification_params();
  CHECK_THROWS_AS(fixed_level_plan(params, 1000.0, 2000.0), BudgetTooSmall);
  CHECK_THROWS_AS(original_format_plan(params, 1000.0, 2000.0), BudgetTooSmall);
  CHECK_THROWS_AS(fixed_level_plan(params, 1000.0, 0.0), DomainError);
  CHECK_THROWS_AS(optimal_allocation(params, 0.0), DomainError);
}
