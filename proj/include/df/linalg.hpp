#pragma once

#include <functional>

#include "df/common.hpp"

namespace df::linalg {

// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending
// order.  Eigenvectors are made reproducible: every column carries a fixed
// phase convention, and within a degenerate cluster (adjacent eigenvalue gap
// below cluster_tol) the columns are replaced by a pivoted orthonormal basis
// of the cluster subspace, so the output does not depend on how the backend
// resolved the degeneracy.
struct HermEig {
  RealVector evals;
  Matrix vecs;
};

inline constexpr double kClusterTol = 1e-10;

HermEig herm_eig(const Matrix& a, double cluster_tol = kClusterTol);

// f applied through the spectral decomposition.
Matrix spectral_apply(const HermEig& e, const std::function<double(double)>& f);
Matrix spectral_apply(const Matrix& a, const std::function<double(double)>& f);

// Largest singular value.  Uses the eigenvalue route for Hermitian input.
double opnorm(const Matrix& a);
double opnorm_hermitian(const Matrix& a);

// Sum of singular values.
double trace_norm(const Matrix& a);
double trace_norm_hermitian(const Matrix& a);

inline bool is_hermitian(const Matrix& a, double tol) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

} // namespace df::linalg
