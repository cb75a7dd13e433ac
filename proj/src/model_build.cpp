#include <algorithm>
#include <cmath>

#include "df/errors.hpp"
#include "df/linalg.hpp"
#include "df/model.hpp"
#include "df/sampling.hpp"

namespace df::model {

Matrix weight_from_d(const Matrix& d) {
  return linalg::spectral_apply(d, [](double x) { return std::sqrt(std::abs(x)); });
}

void validate_model(const ModelSpace& m, double tol) {
  if (m.dim <= 0) throw DomainError("validate_model: empty model");
  const auto square = [&](const Matrix& a, const char* name) {
    if (a.rows() != m.dim || a.cols() != m.dim)
      throw DimensionMismatch(std::string("validate_model: ") + name +
                              " has wrong shape");
  };
  square(m.d, "d");
  square(m.v, "v");
  square(m.weight_half, "weight_half");
  if (!linalg::is_hermitian(m.d, tol))
    throw DomainError("validate_model: d is not Hermitian");
  if (!linalg::is_hermitian(m.v, tol))
    throw DomainError("validate_model: v is not Hermitian");
  for (const Matrix& l : m.factors) {
    square(l, "factor");
    if (!linalg::is_hermitian(l, tol))
      throw DomainError("validate_model: interaction factor is not Hermitian");
  }
  const auto de = linalg::herm_eig(m.d);
  if (de.evals.cwiseAbs().minCoeff() < 1.0 - 1e-9)
    throw DomainError("validate_model: free operator has spectrum inside the gap");
  const Matrix w2 = m.weight_half * m.weight_half;
  const Matrix absd = linalg::spectral_apply(de, [](double x) { return std::abs(x); });
  if ((w2 - absd).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + absd.cwiseAbs().maxCoeff()))
    throw DomainError("validate_model: weight_half^2 does not match |d|");
  if (!(m.q >= 0.0) || !(m.alpha > 0.0))
    throw DomainError("validate_model: invalid alpha or q");
}

ModelSpace build_synthetic(std::uint64_t seed, int dim, int interaction_rank,
                           double potential_scale, double q, double alpha) {
  if (dim < 4 || dim % 2 != 0)
    throw DomainError("build_synthetic: dim must be even and at least 4");
  if (interaction_rank < 1)
    throw DomainError("build_synthetic: need at least one interaction factor");
  if (potential_scale < 0.0 || q < 0.0 || alpha <= 0.0)
    throw DomainError("build_synthetic: negative parameter");

  sampling::Rng rng(seed);
  ModelSpace m;
  m.dim = dim;
  m.alpha = alpha;
  m.q = q;

  // Symmetric spectrum outside the gap: half the levels at +e, half at -e.
  RealVector evals(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) evals[i] = 1.0 + 2.0 * rng.uniform();
  for (int i = 0; i < half; ++i) evals[half + i] = -(1.0 + 2.0 * rng.uniform());
  m.d = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) m.d(i, i) = evals[i];

  Matrix dinv = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) dinv(i, i) = 1.0 / evals[i];

  m.v = Matrix::Zero(dim, dim);
  if (potential_scale > 0.0) {
    Matrix g = sampling::random_hermitian(rng, dim);
    const double gnorm = linalg::opnorm(g * dinv);
    if (gnorm > 0.0) m.v = (potential_scale / gnorm) * g;
  }

  // Scale the factor set so that sum_a ||L_a||^2 = pi/4.  For any density
  // this gives ||direct(gamma)|| + ||exchange(gamma)|| <= (pi/2) tr|gamma|,
  // which is the matrix-level form of the potential bounds the contraction
  // constants rely on.  Factors are kept positive semidefinite (squares of
  // Hermitian draws) so the direct term dominates the exchange term exactly
  // as it does for a pointwise-nonnegative kernel.
  m.factors.reserve(interaction_rank);
  double sq = 0.0;
  for (int a = 0; a < interaction_rank; ++a) {
    Matrix h = sampling::random_hermitian(rng, dim);
    m.factors.push_back(linalg::hermitize(h * h));
    const double n = linalg::opnorm_hermitian(m.factors.back());
    sq += n * n;
  }
  if (sq > 0.0) {
    const double scale = std::sqrt(kPi / 4.0 / sq);
    for (Matrix& l : m.factors) l *= scale;
  }

  // Recorded charge: makes 1 - alpha*max(q, z) equal 1 - kappa in
  // exact-kappa mode, so the spectral lower bound lambda_r is a theorem for
  // this model rather than a continuum analogy.
  m.z = potential_scale / alpha + 2.0 * q;

  m.weight_half = weight_from_d(m.d);
  m.basis_meta = {{"builder", "synthetic"},
                  {"seed", seed},
                  {"interaction_rank", interaction_rank},
                  {"potential_scale", potential_scale},
                  {"w_bound_certified", true}};
  validate_model(m);
  return m;
}

ModelSpace build_radial_hydrogenic(double z, const std::vector<int>& channels,
                                   int n_per_channel, double box_radius,
                                   double alpha, double q) {
  RadialConfig cfg;
  cfg.z = z;
  cfg.channels = channels;
  cfg.n_per_channel = n_per_channel;
  cfg.box_radius = box_radius;
  cfg.alpha = alpha;
  cfg.q = q;
  return build_radial_hydrogenic(cfg);
}

} // namespace df::model
