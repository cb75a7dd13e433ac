#pragma once

#include <string>
#include <vector>

#include "df/dfcore.hpp"
#include "df/retraction.hpp"

namespace df::ground {

enum class InitKind { scaled_projector, zero_seed, custom };

struct SolveConfig {
  double tol_gap = 1e-10;
  int max_outer = 200;
  InitKind init = InitKind::scaled_projector;
  core::DensityMatrix custom_init;
  retraction::RetractionConfig retraction;
  double armijo_c1 = 1e-4;
  int max_backtrack = 20; // s = 1, 1/2, ..., 2^-max_backtrack
  bool collect_iterates = false;
};

// Steepest admissible filling of the mean field: eigenvalues in (0, 1) are
// occupied in ascending order with occupation 1 until the charge budget q is
// spent (fractional occupation on the last level, split equally across a
// degenerate cluster); eigenvalues outside (0, 1) get occupation 0.
Matrix aufbau_direction(const core::MeanField& field, double q,
                        double cluster_tol = linalg::kClusterTol);

// tr((h - 1) gamma) - tr((h - 1) g) with g the aufbau filling of the mean
// field at gamma; nonnegative for admissible gamma, zero exactly at
// solutions of the self-consistent equation.
double optimality_gap(const model::ModelSpace& m,
                      const core::DensityMatrix& gamma,
                      const core::MeanField& field);

struct SolveReport {
  core::DensityMatrix gamma;
  core::MeanField field;
  double e_q = 0.0; // shifted energy at the returned state
  double gap = 0.0;
  double mu = 0.0; // highest mean-field eigenvalue carrying occupation
  RealVector occupations;
  RealVector field_evals;
  double commutator_residual = 0.0;
  double structure_deviation = 0.0;
  std::vector<double> energy_history;
  int outer_iterations = 0;
  bool converged = false;
  std::string status; // "converged", "max_outer_exceeded", "line_search_stalled"
  bool q_exceeds_z = false;
  core::ConstantsReport feasibility;
  std::vector<core::DensityMatrix> iterates; // when collect_iterates
};

SolveReport solve_ground_state(const model::ModelSpace& m,
                               const SolveConfig& cfg = {});

struct ElResidual {
  double commutator_norm = 0.0;     // ||[h, gamma]||_op
  double structure_deviation = 0.0; // distance of occupations from the
                                    // window filling 1_(0,mu) + partial at mu
  double mu = 0.0;
};

ElResidual euler_lagrange_residual(const model::ModelSpace& m,
                                   const core::DensityMatrix& gamma,
                                   double occ_tol = 1e-8);

// Ground-state energies for a list of charge budgets on the same model.
std::vector<std::pair<double, double>> binding_curve(
    const model::ModelSpace& m, const std::vector<double>& qs,
    const SolveConfig& cfg = {});

struct CountWindow {
  int count_low = 0; // eigenvalues of the mean field in [0, 1 - e]
  int count_mid = 0; // eigenvalues in [0, 1 - e/2]
};

CountWindow eigen_count_window(const model::ModelSpace& m,
                               const core::DensityMatrix& gamma, double e);

} // namespace df::ground
