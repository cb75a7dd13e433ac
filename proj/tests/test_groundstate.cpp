#include <cmath>
#include <vector>

#include <doctest.h>

#include "df/errors.hpp"
#include "df/groundstate.hpp"
#include "df/linalg.hpp"
#include "df/sampling.hpp"

using df::Complex;
using df::Matrix;
using df::RealVector;
namespace core = df::core;
namespace gs = df::ground;
namespace mod = df::model;
namespace la = df::linalg;
namespace ret = df::retraction;

namespace {

core::MeanField diag_field(const RealVector& evals) {
  core::MeanField f;
  f.evals = evals;
  int n = int(evals.size());
  f.evecs = Matrix::Identity(n, n);
  f.h = evals.cast<Complex>().asDiagonal();
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    if (evals[i] > 0.0) p(i, i) = 1.0;
  f.pplus = p;
  return f;
}

} // namespace

TEST_SUITE("groundstate") {

TEST_CASE("aufbau fills ascending levels and splits degeneracies equally") {
  RealVector evals(6);
  evals << -1.2, 0.3, 0.5, 0.5, 0.9, 1.5;
  Matrix g = gs::aufbau_direction(diag_field(evals), 2.5);
  RealVector expect(6);
  expect << 0.0, 1.0, 0.75, 0.75, 0.0, 0.0;
  for (int i = 0; i < 6; ++i)
    CHECK(std::real(g(i, i)) == doctest::Approx(expect[i]).epsilon(1e-13));
  CHECK(std::real(g.trace()) == doctest::Approx(2.5));
  // Off-diagonal entries vanish in the eigenbasis.
  g.diagonal().setZero();
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("aufbau returns zero when no level sits inside the gap window") {
  RealVector evals(3);
  evals << -2.0, 1.0, 1.5; // 1.0 itself does not qualify
  Matrix g = gs::aufbau_direction(diag_field(evals), 2.0);
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("aufbau caps occupation when the budget exceeds capacity") {
  RealVector evals(4);
  evals << 0.2, 0.4, 0.6, 1.2;
  Matrix g = gs::aufbau_direction(diag_field(evals), 10.0);
  CHECK(std::real(g.trace()) == doctest::Approx(3.0));
  CHECK(std::abs(g(3, 3)) == 0.0);
}

TEST_CASE("optimality gap rejects states off the positive subspace") {
  auto m = mod::build_synthetic(501, 10, 8, 0.25, 1.0);
  core::DensityMatrix zero(Matrix::Zero(m.dim, m.dim));
  auto field = core::mean_field_of(m, zero.mat);
  Matrix bad = field.evecs.col(0) * field.evecs.col(0).adjoint();
  CHECK_THROWS_AS(
      gs::optimality_gap(m, core::DensityMatrix(bad), field),
      df::NotAdmissible);
}

TEST_CASE("single-electron ground state matches the bare spectral oracle") {
  // With q = 1 the repulsion cancels against its own exchange on pure
  // states, so the minimizer is the lowest bound state of d + v.
  mod::RadialConfig cfg;
  cfg.z = 10.0;
  cfg.n_per_channel = 30;
  cfg.q = 1.0;
  auto m = mod::build_radial_hydrogenic(cfg);
  REQUIRE(!m.factors.empty());

  auto bare = la::herm_eig(Matrix(m.d + m.v));
  double lowest = 0.0;
  for (int i = 0; i < m.dim; ++i)
    if (bare.evals[i] > 0.0) {
      lowest = bare.evals[i];
      break;
    }

  gs::SolveConfig scfg;
  scfg.tol_gap = 1e-11;
  auto rep = gs::solve_ground_state(m, scfg);
  CHECK(rep.converged);
  CHECK(rep.status == "converged");
  CHECK(rep.e_q == doctest::Approx(lowest - 1.0).epsilon(1e-8));
  CHECK(rep.mu == doctest::Approx(lowest).epsilon(1e-8));
  CHECK(rep.occupations.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.e_q < -1e-12);
  CHECK(rep.commutator_residual <= 1e-8 * la::opnorm(rep.field.h));
  CHECK(rep.structure_deviation <= 1e-8);
}

TEST_CASE("synthetic feasible solves satisfy the stationarity structure") {
  auto m = mod::build_synthetic(507, 16, 12, 0.2, 2.0);
  gs::SolveConfig cfg;
  auto rep = gs::solve_ground_state(m, cfg);
  CHECK(rep.converged);
  CHECK(rep.gap <= cfg.tol_gap);
  CHECK(rep.feasibility.feasible);
  // Energy history never increases (backtracking line search).
  for (size_t i = 1; i < rep.energy_history.size(); ++i)
    CHECK(rep.energy_history[i] <= rep.energy_history[i - 1] + 1e-12);
  CHECK(rep.occupations.sum() <= m.q + 1e-8);
  CHECK(rep.commutator_residual <= 1e-8 * la::opnorm(rep.field.h));
  CHECK(rep.structure_deviation <= 1e-8);
  // Occupations live in [0, 1].
  for (int i = 0; i < rep.occupations.size(); ++i) {
    CHECK(rep.occupations[i] >= -1e-10);
    CHECK(rep.occupations[i] <= 1.0 + 1e-10);
  }
  auto el = gs::euler_lagrange_residual(m, rep.gamma);
  CHECK(el.commutator_norm == doctest::Approx(rep.commutator_residual));
  CHECK(el.structure_deviation ==
        doctest::Approx(rep.structure_deviation).epsilon(1e-9));
}

TEST_CASE("binding curve decreases with the charge budget") {
  mod::RadialConfig cfg;
  cfg.z = 10.0;
  cfg.n_per_channel = 24;
  auto m = mod::build_radial_hydrogenic(cfg);
  gs::SolveConfig scfg;
  scfg.tol_gap = 1e-9;
  auto curve = gs::binding_curve(m, {0.5, 1.0, 1.5}, scfg);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].second < -1e-12);
  CHECK(curve[1].second < curve[0].second);
  CHECK(curve[2].second < curve[1].second);
}

TEST_CASE("eigenvalue window counts at strong coupling match the spectrum") {
  mod::RadialConfig cfg;
  cfg.z = 10.0;
  cfg.alpha = 0.08; // strong coupling pushes bound levels well below 1
  cfg.n_per_channel = 45;
  cfg.q = 1.0;
  cfg.with_interaction = false;
  auto m = mod::build_radial_hydrogenic(cfg);
  core::DensityMatrix zero(Matrix::Zero(m.dim, m.dim));
  auto cw = gs::eigen_count_window(m, zero, 0.05);
  // Levels 0.6000, 0.8944 fall below 0.95; 0.9557 joins below 0.975.
  CHECK(cw.count_low == 2);
  CHECK(cw.count_mid == 3);
  CHECK(cw.count_low >= int(std::ceil(m.q)));

  CHECK_THROWS_AS(gs::eigen_count_window(m, zero, 0.0), df::DomainError);
  CHECK_THROWS_AS(gs::eigen_count_window(m, zero, 1.0), df::DomainError);
}

TEST_CASE("descent direction has the predicted directional derivative") {
  auto m = mod::build_synthetic(612, 12, 10, 0.25, 1.5);
  df::sampling::Rng rng(9);
  for (int t = 0; t < 3; ++t) {
    auto base =
        ret::theta(m, core::DensityMatrix(
                          df::sampling::random_density(rng, m.dim, m.q)));
    Matrix g = gs::aufbau_direction(base.field, m.q);
    double gap = gs::optimality_gap(m, base.gamma, base.field);
    if (gap < 1e-6) continue;

    auto phi = [&](double s) {
      Matrix mix = (1.0 - s) * base.gamma.mat + s * g;
      auto st = ret::theta(m, core::DensityMatrix(mix));
      return core::energy_shifted(m, st.gamma);
    };
    // One-sided second-order difference; the mixture leaves the admissible
    // cone for s < 0.
    const double eps = 1e-4;
    double deriv = (4.0 * phi(eps) - 3.0 * phi(0.0) - phi(2.0 * eps)) /
                   (2.0 * eps);
    CHECK(deriv == doctest::Approx(-gap).epsilon(1e-5));
  }
}

TEST_CASE("overfilled models report the excess charge flag") {
  mod::RadialConfig cfg;
  cfg.z = 1.0;
  cfg.n_per_channel = 24;
  cfg.q = 2.5; // q > Z
  auto m = mod::build_radial_hydrogenic(cfg);
  gs::SolveConfig scfg;
  scfg.tol_gap = 1e-8;
  scfg.max_outer = 120;
  auto rep = gs::solve_ground_state(m, scfg);
  CHECK(rep.q_exceeds_z);
}

} // TEST_SUITE
