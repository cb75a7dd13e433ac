#pragma once

#include <optional>

#include "df/dfcore.hpp"
#include "df/fixedpoint.hpp"

namespace df::retraction {

struct RetractionConfig {
  double tol_x = 1e-11;
  int max_iter = 500;
  bool enforce_k = false; // cap observed ratios by the certified k
  double r = 0.0;
  double r_fraction = 0.9;
  core::KappaMode kappa_mode = core::KappaMode::matrix_exact;
  double membership_tol = 1e-3; // slack for the projector-sweep domain check
};

struct AdmissibleState {
  core::DensityMatrix gamma;
  core::MeanField field; // mean field at gamma
  double residual = 0.0; // x_norm(T gamma - gamma) at the returned point
  fixedpoint::IterationTrace trace;
};

// Retraction onto the fixed-point set of the projector sweep: iterates
// gamma -> P+ gamma P+ in the weighted trace metric until the residual
// passes tol_x.  Admissible inputs return unchanged.
AdmissibleState theta(const model::ModelSpace& m,
                      const core::DensityMatrix& gamma0,
                      const RetractionConfig& cfg = {});

// R - (||gamma W||_tr + A * ||T gamma - gamma||_X): positive margin means
// gamma lies in the certified contraction neighborhood.
double u_margin(const model::ModelSpace& m, const core::DensityMatrix& gamma,
                const core::ConstantsReport& constants);

// Analytic differential of one projector sweep at gamma along Hermitian h:
//   dT(gamma) h = (dP) gamma P+ + P+ gamma (dP) + P+ h P+,
// with dP the first-order change of the positive spectral projector under
// the mean-field increment alpha*(direct(h) - exchange(h)).
Matrix dt_map(const model::ModelSpace& m, const core::MeanField& field,
              const Matrix& gamma, const Matrix& h);

struct DthetaReport {
  Matrix dtheta_h;          // central finite difference of theta
  double pp_residual = 0.0; // ||P+ (dtheta h) P+ - P+ h P+||_X
  double mm_residual = 0.0; // ||P- (dtheta h) P-||_X
  double step_check = 0.0;  // half-step consistency of the difference quotient
  bool warning = false;     // step_check inconsistent with an O(eps) quotient
};

// Finite-difference differential of theta at a fixed point, with the block
// identities of the limiting differential evaluated on the result.  The
// quotient is recomputed at eps/2; a mismatch well above the expected O(eps)
// scale only raises the warning flag.
DthetaReport dtheta_fd(const model::ModelSpace& m,
                       const AdmissibleState& at_fixed_point, const Matrix& h,
                       double eps = 1e-6, const RetractionConfig& cfg = {});

} // namespace df::retraction
