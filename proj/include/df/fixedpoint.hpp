#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "df/errors.hpp"

namespace df::fixedpoint {

struct FixConfig {
  double tol = 1e-11;
  int max_iter = 500;
  // When set, every observed residual ratio is checked against this cap with
  // a relative slack of ratio_slack.
  std::optional<double> k_cap;
  double ratio_slack = 1e-9;
};

struct IterationTrace {
  std::vector<double> residuals; // residuals[p] = dist(step(x_p), x_p)
  std::vector<double> ratios;    // residuals[p+1]/residuals[p] where defined
  int iterations = 0;            // productive steps taken
  bool converged = false;
};

struct MaxIterExceeded : Error {
  IterationTrace trace;
  explicit MaxIterExceeded(IterationTrace t)
      : Error(message(t)), trace(std::move(t)) {}

private:
  static std::string message(const IterationTrace& t) {
    std::ostringstream os;
    os << "fixed-point iteration did not converge after " << t.iterations
       << " steps";
    if (!t.residuals.empty()) os << " (last residual " << t.residuals.back() << ")";
    return os.str();
  }
};

struct RatioAboveOne : Error {
  IterationTrace trace;
  double ratio;
  RatioAboveOne(IterationTrace t, double rr)
      : Error(message(rr)), trace(std::move(t)), ratio(rr) {}

private:
  static std::string message(double rr) {
    std::ostringstream os;
    os << "observed residual ratio " << rr << " exceeds the declared cap";
    return os.str();
  }
};

// Iterates x <- step(x) until dist(step(x), x) <= tol and returns that x
// together with the residual history.  The returned iterate is the first one
// whose own residual passes the tolerance, so a point that is already fixed
// comes back unchanged with zero productive iterations.
template <class X, class Step, class Dist>
std::pair<X, IterationTrace> iterate_to_fix(Step&& step, Dist&& dist, X x,
                                            const FixConfig& cfg = {}) {
  IterationTrace trace;
  for (int p = 0;; ++p) {
    X next = step(x);
    const double r = dist(next, x);
    if (!std::isfinite(r)) throw DomainError("iterate_to_fix: non-finite residual");
    if (!trace.residuals.empty() && trace.residuals.back() > 0.0) {
      const double ratio = r / trace.residuals.back();
      trace.ratios.push_back(ratio);
      if (cfg.k_cap && ratio > *cfg.k_cap * (1.0 + cfg.ratio_slack)) {
        trace.residuals.push_back(r);
        throw RatioAboveOne(std::move(trace), ratio);
      }
    }
    trace.residuals.push_back(r);
    if (r <= cfg.tol) {
      trace.converged = true;
      trace.iterations = p;
      return {std::move(x), std::move(trace)};
    }
    if (p >= cfg.max_iter) throw MaxIterExceeded(std::move(trace));
    x = std::move(next);
    trace.iterations = p + 1;
  }
}

// Geometric tail bound on the distance from the p-th iterate to the limit,
// valid when successive residuals contract by a factor k in (0, 1):
//   dist(limit, x_p) <= k^p / (1 - k) * first_residual.
inline double error_bound(double k, double first_residual, int p) {
  if (!(k > 0.0 && k < 1.0))
    throw DomainError("error_bound: contraction factor must lie in (0, 1)");
  if (first_residual < 0.0)
    throw DomainError("error_bound: residual must be nonnegative");
  if (p < 0) throw DomainError("error_bound: negative iteration index");
  return std::pow(k, p) / (1.0 - k) * first_residual;
}

// Chain rule along an iteration trajectory [x_0, ..., x_{p-1}]:
//   d(T^p)(x_0) h = dT(x_{p-1}) ... dT(x_0) h.
// diff_step(x, h) must evaluate the differential of one step at x.
template <class X, class Tangent, class DiffStep>
Tangent propagate_differential(DiffStep&& diff_step,
                               const std::vector<X>& trajectory, Tangent h) {
  for (const X& x : trajectory) h = diff_step(x, h);
  return h;
}

} // namespace df::fixedpoint
