#include "df/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "df/errors.hpp"

namespace df::bspline {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("quadrature order must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess for the i-th root, then Newton.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

std::vector<double> stretched_breakpoints(int intervals, double rmax,
                                          double stretch) {
  if (intervals < 1 || rmax <= 0.0)
    throw DomainError("breakpoint grid needs intervals >= 1 and rmax > 0");
  std::vector<double> t(intervals + 1);
  t[0] = 0.0;
  t[intervals] = rmax;
  if (stretch <= 0.0) {
    for (int j = 1; j < intervals; ++j) t[j] = rmax * j / double(intervals);
    return t;
  }
  double denom = std::expm1(stretch);
  for (int j = 1; j < intervals; ++j)
    t[j] = rmax * std::expm1(stretch * j / double(intervals)) / denom;
  return t;
}

Basis::Basis(int order, std::vector<double> breakpoints)
    : order_(order), breaks_(std::move(breakpoints)) {
  if (order_ < 3) throw DomainError("spline order must be at least 3");
  if (breaks_.size() < 2) throw DomainError("need at least one interval");
  for (size_t j = 1; j < breaks_.size(); ++j)
    if (!(breaks_[j] > breaks_[j - 1]))
      throw DomainError("breakpoints must be strictly increasing");
  int m = int(breaks_.size()) - 1;
  n_ = m + order_ - 1;
  knots_.reserve(n_ + order_);
  for (int i = 0; i < order_; ++i) knots_.push_back(breaks_.front());
  for (int j = 1; j < m; ++j) knots_.push_back(breaks_[j]);
  for (int i = 0; i < order_; ++i) knots_.push_back(breaks_.back());
}

Basis::Local Basis::eval(double x) const {
  const int k = order_;
  // Locate the knot span, clamping x into the closed domain.
  int mu = int(std::upper_bound(knots_.begin(), knots_.end(), x) -
               knots_.begin()) -
           1;
  mu = std::clamp(mu, k - 1, n_ - 1);

  // Cox-de Boor triangle; keep the order k-2 and k-1 rows for derivatives.
  std::vector<double> amp(k, 0.0), low2, low1;
  amp[0] = 1.0;
  for (int j = 1; j < k; ++j) {
    if (j == k - 2) low2.assign(amp.begin(), amp.begin() + j);
    if (j == k - 1) low1.assign(amp.begin(), amp.begin() + j);
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double right = knots_[mu + r + 1] - x;
      double left = x - knots_[mu - j + r + 1];
      double temp = amp[r] / (right + left);
      amp[r] = saved + right * temp;
      saved = left * temp;
    }
    amp[j] = saved;
  }

  Local out;
  out.first = mu - k + 1;
  out.val.assign(amp.begin(), amp.end());
  out.d1.assign(k, 0.0);
  out.d2.assign(k, 0.0);

  // amp row j holds B_{mu-j+r, j+1}; value of B_{i,ord} is row[i - (mu-ord+1)].
  auto at = [&](const std::vector<double>& row, int ord, int i) -> double {
    int r = i - (mu - ord + 1);
    if (r < 0 || r >= int(row.size())) return 0.0;
    return row[size_t(r)];
  };
  auto dspan = [&](int i, int ord) -> double {
    double d = knots_[i + ord - 1] - knots_[i];
    return d > 0.0 ? d : 0.0;
  };
  auto d1_of = [&](const std::vector<double>& row, int ord, int i) -> double {
    double a = 0.0, b = 0.0;
    double da = dspan(i, ord), db = dspan(i + 1, ord);
    if (da > 0.0) a = at(row, ord - 1, i) / da;
    if (db > 0.0) b = at(row, ord - 1, i + 1) / db;
    return (ord - 1) * (a - b);
  };
  for (int r = 0; r < k; ++r) {
    int i = out.first + r;
    out.d1[r] = d1_of(low1, k, i);
    if (k >= 3) {
      double a = 0.0, b = 0.0;
      double da = dspan(i, k), db = dspan(i + 1, k);
      if (da > 0.0) a = d1_of(low2, k - 1, i) / da;
      if (db > 0.0) b = d1_of(low2, k - 1, i + 1) / db;
      out.d2[r] = (k - 1) * (a - b);
    }
  }
  return out;
}

} // namespace df::bspline
