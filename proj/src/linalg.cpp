#include "df/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "df/errors.hpp"

namespace df::linalg {

namespace {

// Multiply each column by a unit phase so that its largest-magnitude entry
// (lowest index on near-ties) becomes real and positive.
void fix_phases(Matrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double m = std::abs(v(r, c));
      if (m > best * (1.0 + 1e-12)) {
        best = m;
        pivot = r;
      }
    }
    if (best > 0.0) {
      const Complex ph = v(pivot, c) / best;
      v.col(c) *= std::conj(ph);
    }
  }
}

} // namespace

HermEig herm_eig(const Matrix& a, double cluster_tol) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("herm_eig: matrix is not square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()));
  if (es.info() != Eigen::Success)
    throw EigensolverFailure("herm_eig: backend did not converge");
  HermEig out{es.eigenvalues(), es.eigenvectors()};

  // Canonicalize degenerate clusters: the spectral projector of a cluster is
  // basis-independent, so an orthonormal basis extracted from it by pivoted
  // QR is reproducible no matter what the backend returned.
  const Eigen::Index n = out.evals.size();
  Eigen::Index lo = 0;
  while (lo < n) {
    Eigen::Index hi = lo;
    while (hi + 1 < n && out.evals[hi + 1] - out.evals[hi] < cluster_tol) ++hi;
    if (hi > lo) {
      const Eigen::Index m = hi - lo + 1;
      const Matrix block = out.vecs.middleCols(lo, m);
      const Matrix proj = block * block.adjoint();
      Eigen::ColPivHouseholderQR<Matrix> qr(proj);
      Matrix q = qr.householderQ();
      out.vecs.middleCols(lo, m) = q.leftCols(m);
    }
    lo = hi + 1;
  }
  fix_phases(out.vecs);
  return out;
}

Matrix spectral_apply(const HermEig& e, const std::function<double(double)>& f) {
  RealVector fe(e.evals.size());
  for (Eigen::Index i = 0; i < fe.size(); ++i) fe[i] = f(e.evals[i]);
  return e.vecs * fe.asDiagonal() * e.vecs.adjoint();
}

Matrix spectral_apply(const Matrix& a, const std::function<double(double)>& f) {
  return spectral_apply(herm_eig(a), f);
}

double opnorm_hermitian(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()),
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw EigensolverFailure("opnorm_hermitian: backend did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double opnorm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == a.cols() && is_hermitian(a, 1e-13 * (1.0 + a.cwiseAbs().maxCoeff())))
    return opnorm_hermitian(a);
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

double trace_norm_hermitian(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()),
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw EigensolverFailure("trace_norm_hermitian: backend did not converge");
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == a.cols() && is_hermitian(a, 1e-13 * (1.0 + a.cwiseAbs().maxCoeff())))
    return trace_norm_hermitian(a);
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

} // namespace df::linalg
