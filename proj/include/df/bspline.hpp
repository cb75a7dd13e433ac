#pragma once

#include <vector>

#include "df/common.hpp"

namespace df::bspline {

// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
// on the Legendre recurrence.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

// B-spline basis of a given order on a fixed breakpoint sequence with full
// end-knot multiplicity.  eval() returns the `order` basis functions that
// are nonzero at x together with first and second derivatives.
class Basis {
public:
  Basis(int order, std::vector<double> breakpoints);

  int order() const { return order_; }
  int size() const { return n_; }
  const std::vector<double>& breakpoints() const { return breaks_; }

  struct Local {
    int first = 0; // global index of the first nonzero spline
    std::vector<double> val, d1, d2;
  };
  Local eval(double x) const;

private:
  int order_;
  int n_;
  std::vector<double> breaks_;
  std::vector<double> knots_;
};

// Exponentially clustered breakpoints on [0, rmax]: spacing grows by a fixed
// ratio controlled by stretch (stretch = 0 gives a uniform grid).
std::vector<double> stretched_breakpoints(int intervals, double rmax,
                                          double stretch);

} // namespace df::bspline
