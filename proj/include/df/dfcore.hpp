#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "df/common.hpp"
#include "df/linalg.hpp"
#include "df/model.hpp"

namespace df::core {

// One-particle density: Hermitian, 0 <= gamma <= 1, tr gamma <= q.
// Construction through checked() enforces the constraints up to tol.
struct DensityMatrix {
  Matrix mat;

  DensityMatrix() = default;
  explicit DensityMatrix(Matrix g) : mat(std::move(g)) {}
  static DensityMatrix checked(const model::ModelSpace& m, Matrix g,
                               double tol = 1e-10);
};

// Membership check for {0 <= gamma <= 1, tr gamma <= q} with slack tol.
bool is_density(const model::ModelSpace& m, const Matrix& g, double tol,
                std::string* why = nullptr);

// Self-consistent one-particle operator at gamma together with its spectral
// data and the positive spectral projector.
struct MeanField {
  Matrix h;          // d + v + alpha*(direct(gamma) - exchange(gamma))
  RealVector evals;  // ascending
  Matrix evecs;      // canonicalized columns
  Matrix pplus;      // spectral projector onto (0, inf)
};

MeanField mean_field(const model::ModelSpace& m, const DensityMatrix& gamma);
MeanField mean_field_of(const model::ModelSpace& m, const Matrix& gamma);

// Quadratic energy and its unit-shifted variant tr((h-1)gamma)-style value
// actually minimized by the ground-state solver.
double energy(const model::ModelSpace& m, const DensityMatrix& gamma);
double energy_shifted(const model::ModelSpace& m, const DensityMatrix& gamma);

// One step of the projector sweep: gamma -> P+ gamma P+ with P+ taken at
// the mean field of gamma.
DensityMatrix t_map(const model::ModelSpace& m, const DensityMatrix& gamma,
                    double membership_tol = 1e-3);

// Weighted trace norm ||W a W||_tr with W = |d|^{1/2}; finite-rank stand-in
// for the energy-space distance.  Defined for any Hermitian a.
double x_norm(const model::ModelSpace& m, const Matrix& a);
// Weighted operator norm ||W a||_op used for projector increments.
double y_norm(const model::ModelSpace& m, const Matrix& a);
// One-sided weighted trace norm ||a W||_tr (enters the neighborhood margin).
double one_sided_weight_norm(const model::ModelSpace& m, const Matrix& a);

enum class KappaMode { hardy_bound, matrix_exact };

std::string to_string(KappaMode mode);

// kappa = ||v d^{-1}|| + 2 alpha q (matrix_exact) or 2 alpha (z + q)
// (hardy_bound).
double kappa_of(const model::ModelSpace& m, KappaMode mode);

struct FeasibilityRow {
  double alpha = 0.0, z = 0.0, q = 0.0;
  double kappa = 0.0;
  double lambda0 = 0.0;
  double margin = 0.0;    // 1 - kappa - (pi/4) alpha q
  double cond2_lhs = 0.0; // pi alpha q
  double cond2_rhs = 0.0; // 2 sqrt((1-kappa) lambda0 margin)
  bool cond1_ok = false;  // alpha z < 2 / (pi/2 + 2/pi)
  bool cond2_ok = false;
  bool margin_ok = false;
  bool feasible = false;
};

// Pure arithmetic form of the smallness condition; usable for parameter
// tables without a built model.
FeasibilityRow check_feasibility(double alpha, double z, double q,
                                 double kappa);

// All derived constants of the contraction analysis for the r-enlarged set.
struct ConstantsReport {
  KappaMode mode = KappaMode::matrix_exact;
  double r = 0.0;
  double r_fraction = 0.0;
  double kappa = 0.0;
  double lambda0 = 0.0;
  double kappa_r = 0.0;
  double lambda_r = 0.0;
  double a_r = 0.0;      // projector Lipschitz constant
  double r_max = 0.0;    // 1 / (2 a_r)
  double r_chosen = 0.0; // r_fraction * r_max
  double k = 0.0;        // 2 a_r r_chosen
  double a_big = 0.0;    // max((2 + a_r (q+r))/2, 1/(1 - 2 a_r r_chosen))
  FeasibilityRow condition;
  bool feasible = false;
};

ConstantsReport constants(const model::ModelSpace& m, double r = 0.0,
                          double r_fraction = 0.9,
                          KappaMode mode = KappaMode::matrix_exact);

// q / (1 - kappa - (pi/4) alpha q): weighted-norm radius containing every
// admissible state with nonpositive shifted energy.
double sublevel_bound(const model::ModelSpace& m,
                      KappaMode mode = KappaMode::matrix_exact);

struct WindowBoundReport {
  double lhs = 0.0;   // ||d gamma d||_tr
  double bound = 0.0; // (1-kappa)^{-2} nu^2 tr(gamma)
  double ratio = 0.0;
  bool pre_ok = false; // gamma really lives under the spectral window
  bool ok = false;
};

// Checks ||d gamma d||_tr <= (1-kappa)^{-2} nu^2 tr(gamma) for gamma
// dominated by the spectral window 1_{[0, nu]} of the mean field `ref`.
WindowBoundReport d_gamma_d_bound_check(const model::ModelSpace& m,
                                        const DensityMatrix& gamma,
                                        const MeanField& ref, double nu,
                                        KappaMode mode = KappaMode::matrix_exact);

struct HardyRow {
  std::string name;
  double worst_ratio = 0.0;
  bool asserted = false; // enforced rows; the rest are informational
  bool ok = true;
};

struct HardyReport {
  std::vector<HardyRow> rows;
  int samples = 0;
  bool all_asserted_ok = true;
};

// Samples densities and reports worst LHS/RHS ratios for the discrete
// analogues of the potential-theoretic operator bounds.  Rows that follow
// from matrix-level spectral calculus are asserted when the model certifies
// its factor scaling (basis_meta["w_bound_certified"]); the two rows with
// continuum constants are always informational.
HardyReport hardy_checks(const model::ModelSpace& m, int samples,
                         std::uint64_t seed, double r = 0.0,
                         KappaMode mode = KappaMode::matrix_exact);

} // namespace df::core
