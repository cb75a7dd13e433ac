#include "df/groundstate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "df/errors.hpp"

namespace df::ground {

Matrix aufbau_direction(const core::MeanField& field, double q,
                        double cluster_tol) {
  const int n = static_cast<int>(field.evals.size());
  RealVector occ = RealVector::Zero(n);
  double budget = q;
  int i = 0;
  while (i < n && budget > 0.0) {
    const double ev = field.evals[i];
    if (ev <= 0.0 || ev >= 1.0) {
      ++i;
      continue;
    }
    // Degenerate cluster inside the window shares its filling equally.
    int j = i;
    while (j + 1 < n && field.evals[j + 1] < 1.0 &&
           field.evals[j + 1] - field.evals[j] < cluster_tol)
      ++j;
    const int size = j - i + 1;
    const double fill = std::min(budget, static_cast<double>(size));
    for (int t = i; t <= j; ++t) occ[t] = fill / size;
    budget -= fill;
    i = j + 1;
  }
  Matrix g = Matrix::Zero(n, n);
  for (int t = 0; t < n; ++t)
    if (occ[t] != 0.0)
      g += occ[t] * field.evecs.col(t) * field.evecs.col(t).adjoint();
  return linalg::hermitize(g);
}

double optimality_gap(const model::ModelSpace& m,
                      const core::DensityMatrix& gamma,
                      const core::MeanField& field) {
  const Matrix pm = Matrix::Identity(m.dim, m.dim) - field.pplus;
  if (linalg::opnorm(pm * gamma.mat) > 1e-6)
    throw NotAdmissible(
        "optimality_gap: state has weight on the negative spectral subspace");
  const Matrix g = aufbau_direction(field, m.q);
  const Matrix shifted = field.h - Matrix::Identity(m.dim, m.dim);
  return (shifted * (gamma.mat - g)).trace().real();
}

namespace {

core::ConstantsReport feasibility_or_partial(const model::ModelSpace& m,
                                             const SolveConfig& cfg) {
  try {
    return core::constants(m, cfg.retraction.r, cfg.retraction.r_fraction,
                           cfg.retraction.kappa_mode);
  } catch (const KappaTooLarge&) {
    core::ConstantsReport c;
    c.mode = cfg.retraction.kappa_mode;
    c.r = cfg.retraction.r;
    c.r_fraction = cfg.retraction.r_fraction;
    c.kappa = core::kappa_of(m, cfg.retraction.kappa_mode);
    c.kappa_r = c.kappa + 2.0 * m.alpha * cfg.retraction.r;
    c.lambda0 = 1.0 - m.alpha * std::max(m.q, m.z);
    c.lambda_r = c.lambda0 - m.alpha * cfg.retraction.r;
    c.a_r = c.r_max = c.r_chosen = c.k = c.a_big =
        std::numeric_limits<double>::quiet_NaN();
    c.condition = core::check_feasibility(m.alpha, m.z, m.q, c.kappa);
    c.feasible = false;
    return c;
  }
}

retraction::AdmissibleState initial_state(const model::ModelSpace& m,
                                          const SolveConfig& cfg) {
  core::DensityMatrix seed(Matrix::Zero(m.dim, m.dim));
  switch (cfg.init) {
    case InitKind::zero_seed:
      break;
    case InitKind::scaled_projector: {
      const core::MeanField bare = core::mean_field(m, seed);
      const double eps = std::min(1.0, m.q);
      seed.mat = eps * aufbau_direction(bare, m.q);
      break;
    }
    case InitKind::custom:
      if (cfg.custom_init.mat.rows() != m.dim)
        throw DomainError("solve_ground_state: custom init has wrong shape");
      seed = cfg.custom_init;
      break;
  }
  return retraction::theta(m, seed, cfg.retraction);
}

struct StructureReport {
  double deviation = 0.0;
  double mu = 0.0;
  RealVector occupations;
};

StructureReport occupation_structure(const core::MeanField& field,
                                     const Matrix& gamma, double occ_tol) {
  const int n = static_cast<int>(field.evals.size());
  StructureReport rep;
  rep.occupations = RealVector(n);
  for (int i = 0; i < n; ++i)
    rep.occupations[i] =
        (field.evecs.col(i).adjoint() * gamma * field.evecs.col(i))(0).real();

  int top = -1;
  for (int i = 0; i < n; ++i)
    if (rep.occupations[i] > occ_tol) top = i;
  rep.mu = top >= 0 ? field.evals[top] : 0.0;

  for (int i = 0; i < n; ++i) {
    const double occ = rep.occupations[i];
    const double ev = field.evals[i];
    double dev = 0.0;
    if (top < 0 || ev <= linalg::kClusterTol) {
      dev = std::abs(occ);
    } else if (ev < rep.mu - linalg::kClusterTol) {
      dev = std::abs(occ - 1.0);
    } else if (ev <= rep.mu + linalg::kClusterTol) {
      dev = std::max({0.0, occ - 1.0, -occ});
    } else {
      dev = std::abs(occ);
    }
    rep.deviation = std::max(rep.deviation, dev);
  }
  return rep;
}

} // namespace

SolveReport solve_ground_state(const model::ModelSpace& m,
                               const SolveConfig& cfg) {
  SolveReport rep;
  rep.feasibility = feasibility_or_partial(m, cfg);
  rep.q_exceeds_z = m.q > m.z;

  retraction::AdmissibleState state = initial_state(m, cfg);
  double e_cur = core::energy_shifted(m, state.gamma);
  rep.energy_history.push_back(e_cur);
  if (cfg.collect_iterates) rep.iterates.push_back(state.gamma);
  rep.status = "max_outer_exceeded";

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    rep.outer_iterations = outer;
    const Matrix g = aufbau_direction(state.field, m.q);
    const Matrix shifted =
        state.field.h - Matrix::Identity(m.dim, m.dim);
    rep.gap = (shifted * (state.gamma.mat - g)).trace().real();
    if (rep.gap <= cfg.tol_gap) {
      rep.converged = true;
      rep.status = "converged";
      break;
    }

    bool accepted = false;
    double s = 1.0;
    for (int back = 0; back <= cfg.max_backtrack; ++back, s *= 0.5) {
      const Matrix blend = (1.0 - s) * state.gamma.mat + s * g;
      retraction::AdmissibleState cand;
      try {
        cand = retraction::theta(m, core::DensityMatrix(blend), cfg.retraction);
      } catch (const fixedpoint::MaxIterExceeded&) {
        continue;
      }
      const double e_cand = core::energy_shifted(m, cand.gamma);
      if (e_cand <= e_cur - cfg.armijo_c1 * s * rep.gap) {
        state = std::move(cand);
        e_cur = e_cand;
        rep.energy_history.push_back(e_cur);
        if (cfg.collect_iterates) rep.iterates.push_back(state.gamma);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = "line_search_stalled";
      break;
    }
  }

  rep.gamma = state.gamma;
  rep.field = state.field;
  rep.e_q = e_cur;
  rep.field_evals = state.field.evals;
  const auto structure =
      occupation_structure(state.field, state.gamma.mat, 1e-8);
  rep.occupations = structure.occupations;
  rep.mu = structure.mu;
  rep.structure_deviation = structure.deviation;
  rep.commutator_residual = linalg::opnorm(
      state.field.h * state.gamma.mat - state.gamma.mat * state.field.h);
  return rep;
}

ElResidual euler_lagrange_residual(const model::ModelSpace& m,
                                   const core::DensityMatrix& gamma,
                                   double occ_tol) {
  const core::MeanField field = core::mean_field(m, gamma);
  const auto structure = occupation_structure(field, gamma.mat, occ_tol);
  ElResidual res;
  res.commutator_norm =
      linalg::opnorm(field.h * gamma.mat - gamma.mat * field.h);
  res.structure_deviation = structure.deviation;
  res.mu = structure.mu;
  return res;
}

std::vector<std::pair<double, double>> binding_curve(
    const model::ModelSpace& m, const std::vector<double>& qs,
    const SolveConfig& cfg) {
  std::vector<std::pair<double, double>> out;
  out.reserve(qs.size());
  for (const double q : qs) {
    model::ModelSpace mq = m;
    mq.q = q;
    const SolveReport rep = solve_ground_state(mq, cfg);
    out.emplace_back(q, rep.e_q);
  }
  return out;
}

CountWindow eigen_count_window(const model::ModelSpace& m,
                               const core::DensityMatrix& gamma, double e) {
  if (!(e > 0.0 && e < 1.0))
    throw DomainError("eigen_count_window: e must lie in (0, 1)");
  const core::MeanField field = core::mean_field(m, gamma);
  CountWindow cw;
  for (Eigen::Index i = 0; i < field.evals.size(); ++i) {
    const double ev = field.evals[i];
    if (ev >= 0.0 && ev <= 1.0 - e) ++cw.count_low;
    if (ev >= 0.0 && ev <= 1.0 - e / 2.0) ++cw.count_mid;
  }
  return cw;
}

} // namespace df::ground
