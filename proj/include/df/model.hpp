#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "df/common.hpp"

namespace df::model {

// A finite-dimensional one-particle model: the free operator d with
// symmetric spectrum outside (-1, 1), an external potential v, and a
// two-electron interaction held in factored form,
//   (ij|kl) = sum_a factors[a](i,j) * conj(factors[a](l,k)),
// every factor Hermitian.  weight_half is |d|^{1/2} through the spectral
// decomposition of d; it weights the trace norm used throughout.
struct ModelSpace {
  int dim = 0;
  Matrix d;
  Matrix v;
  std::vector<Matrix> factors;
  double alpha = kDefaultAlpha;
  double z = 0.0;
  double q = 0.0;
  Matrix weight_half;
  nlohmann::ordered_json basis_meta;
};

// Structural validation used by builders and load_model: Hermiticity of all
// blocks, spectral gap of d, weight consistency.  Throws on violation.
void validate_model(const ModelSpace& m, double tol = 1e-9);

// Recompute weight_half from d.
Matrix weight_from_d(const Matrix& d);

// Random dense model, deterministic in seed: d = diag(+e, -e') with all
// |eigenvalues| >= 1, Hermitian v scaled so that ||v d^{-1}|| equals
// potential_scale exactly, and interaction factors scaled so that
// sum_a ||factors[a]||^2 <= pi/4, which makes the mean-field bounds used by
// the contraction analysis hold at the matrix level for every density.
// The recorded nuclear charge is z = ||v d^{-1}||/alpha + 2 q, so the
// spectral lower bound lambda_0 = 1 - alpha*max(q, z) coincides with
// 1 - kappa in exact-kappa mode.
ModelSpace build_synthetic(std::uint64_t seed, int dim, int interaction_rank,
                           double potential_scale, double q,
                           double alpha = kDefaultAlpha);

struct RadialConfig {
  double z = 1.0;
  std::vector<int> channels = {-1}; // relativistic quantum numbers kappa
  int n_per_channel = 60;
  double box_radius = 0.0; // in Compton units; <= 0 picks 50/(alpha*z)
  double alpha = kDefaultAlpha;
  double q = 1.0;
  int spline_order = 8;
  int points_per_interval = 0; // <= 0 picks spline_order + 8
  double grid_stretch = 9.0;   // exponential knot clustering toward r = 0
  double nucleus_width = 0.0;  // > 0 smears the point charge with a Gaussian
  bool with_interaction = true;
  double factor_cut = 1e-13;   // relative eigenvalue cut for factor compression
};

// Radial Dirac model in a kinetically balanced B-spline basis.  Large and
// small components are orthonormalized separately, which forces the free
// operator into the form [[I, P], [P^T, -I]] whose spectrum is exactly
// +/- sqrt(1 + s_i^2), hence the gap invariant holds by construction.  The
// interaction is the monopole part of the Coulomb repulsion, assembled on
// the quadrature grid in exact factored form and then compressed.
ModelSpace build_radial_hydrogenic(const RadialConfig& cfg);
ModelSpace build_radial_hydrogenic(double z, const std::vector<int>& channels,
                                   int n_per_channel, double box_radius,
                                   double alpha, double q);

// Mean-field contractions against the factored interaction:
//   direct(gamma)   = sum_a factors[a] * tr(factors[a] * gamma)
//   exchange(gamma) = sum_a factors[a] * gamma * factors[a]
// Both run the factor loop in fixed accumulation order, so results do not
// depend on the number of threads.
Matrix contract_direct(const ModelSpace& m, const Matrix& gamma);
Matrix contract_exchange(const ModelSpace& m, const Matrix& gamma);
Matrix contract_direct_serial(const ModelSpace& m, const Matrix& gamma);
Matrix contract_exchange_serial(const ModelSpace& m, const Matrix& gamma);

// Versioned binary container with a trailing 64-bit checksum over all
// preceding bytes; see README for the exact layout.  Round-trips bit-exactly.
void save_model(const ModelSpace& m, const std::string& path);
ModelSpace load_model(const std::string& path);
std::vector<std::uint8_t> serialize_model(const ModelSpace& m);
std::uint64_t model_checksum(const ModelSpace& m);

} // namespace df::model
