#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "df/fixedpoint.hpp"

namespace fp = df::fixedpoint;

namespace {

double sdist(double a, double b) { return std::abs(a - b); }

} // namespace

TEST_SUITE("fixedpoint") {

TEST_CASE("scalar affine contraction hits the closed-form limit") {
  // x -> a + k x has the unique fixed point a / (1 - k).
  const double k = 0.4, a = 1.2, limit = a / (1.0 - k);
  auto step = [&](double x) { return a + k * x; };
  fp::FixConfig cfg;
  cfg.tol = 1e-13;
  auto [x, trace] = fp::iterate_to_fix(step, sdist, 10.0, cfg);
  CHECK(trace.converged);
  CHECK(std::abs(x - limit) < 1e-12);
  // Ratios equal k in exact arithmetic; cancellation noise grows as the
  // residual approaches the tolerance, so gate the tight check on size.
  for (size_t i = 0; i < trace.ratios.size(); ++i) {
    CHECK(std::abs(trace.ratios[i] - k) < 1e-2);
    if (trace.residuals[i] > 1e-8)
      CHECK(trace.ratios[i] == doctest::Approx(k).epsilon(1e-6));
  }
}

TEST_CASE("projection onto a convex set converges in one productive step") {
  auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  auto [x, trace] = fp::iterate_to_fix(clamp01, sdist, -3.0, fp::FixConfig{});
  CHECK(x == 0.0);
  CHECK(trace.iterations == 1);
  CHECK(trace.converged);
}

TEST_CASE("a fixed input returns unchanged with zero productive iterations") {
  auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  auto [x, trace] = fp::iterate_to_fix(clamp01, sdist, 0.5, fp::FixConfig{});
  CHECK(x == 0.5);
  CHECK(trace.iterations == 0);
  CHECK(trace.converged);
}

TEST_CASE("ratio cap turns an expanding map into RatioAboveOne") {
  auto doubling = [](double x) { return 2.0 * x; };
  fp::FixConfig cfg;
  cfg.k_cap = 0.9;
  CHECK_THROWS_AS(fp::iterate_to_fix(doubling, sdist, 1.0, cfg),
                  fp::RatioAboveOne);
  try {
    fp::iterate_to_fix(doubling, sdist, 1.0, cfg);
  } catch (const fp::RatioAboveOne& e) {
    CHECK(e.ratio == doctest::Approx(2.0));
    CHECK(e.trace.residuals.size() >= 2);
  }
}

TEST_CASE("iteration budget exhaustion carries the residual history") {
  auto slow = [](double x) { return 0.9999 * x; };
  fp::FixConfig cfg;
  cfg.tol = 1e-300;
  cfg.max_iter = 10;
  CHECK_THROWS_AS(fp::iterate_to_fix(slow, sdist, 1.0, cfg),
                  fp::MaxIterExceeded);
  try {
    fp::iterate_to_fix(slow, sdist, 1.0, cfg);
  } catch (const fp::MaxIterExceeded& e) {
    CHECK(e.trace.iterations == 10);
    CHECK(e.trace.residuals.size() == 11);
    CHECK_FALSE(e.trace.converged);
  }
}

TEST_CASE("error_bound rejects parameters outside its domain") {
  CHECK_THROWS_AS(fp::error_bound(1.0, 1.0, 0), df::DomainError);
  CHECK_THROWS_AS(fp::error_bound(0.0, 1.0, 0), df::DomainError);
  CHECK_THROWS_AS(fp::error_bound(-0.1, 1.0, 0), df::DomainError);
  CHECK_THROWS_AS(fp::error_bound(0.5, -1.0, 0), df::DomainError);
  CHECK_THROWS_AS(fp::error_bound(0.5, 1.0, -1), df::DomainError);
  CHECK(fp::error_bound(0.5, 2.0, 0) == doctest::Approx(4.0));
  CHECK(fp::error_bound(0.5, 2.0, 3) == doctest::Approx(0.5));
}

TEST_CASE("geometric tail bound dominates the true distance to the limit") {
  const double k = 0.7, a = 0.3, limit = a / (1.0 - k);
  std::mt19937 gen(123);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    double x = u(gen);
    std::vector<double> iterates{x};
    while (std::abs((a + k * x) - x) > 1e-14) {
      x = a + k * x;
      iterates.push_back(x);
    }
    double r0 = std::abs(iterates.size() > 1 ? iterates[1] - iterates[0] : 0.0);
    if (r0 == 0.0) continue;
    for (size_t p = 0; p < iterates.size(); ++p) {
      double true_dist = std::abs(iterates[p] - limit);
      double bound = fp::error_bound(k, r0, int(p));
      CHECK(true_dist <= bound * (1.0 + 1e-12) + 1e-15);
    }
  }
}

TEST_CASE("propagate_differential composes the one-step differential") {
  // For the affine map the differential is multiplication by k at every
  // point, so the chain over p points is k^p.
  const double k = 0.6;
  auto dstep = [&](double /*x*/, double h) { return k * h; };
  std::vector<double> trajectory = {5.0, 3.2, 2.1, 1.6, 1.3};
  double h = fp::propagate_differential(dstep, trajectory, 2.0);
  CHECK(h == doctest::Approx(2.0 * std::pow(k, 5)).epsilon(1e-12));
  std::vector<double> empty;
  CHECK(fp::propagate_differential(dstep, empty, 2.0) == 2.0);
}

} // TEST_SUITE
