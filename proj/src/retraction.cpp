#include "df/retraction.hpp"

#include <cmath>

#include "df/errors.hpp"

namespace df::retraction {

namespace {

core::MeanField field_and_project(const model::ModelSpace& m, const Matrix& g,
                                  Matrix* projected) {
  core::MeanField f = core::mean_field_of(m, g);
  *projected = linalg::hermitize(f.pplus * g * f.pplus);
  return f;
}

} // namespace

AdmissibleState theta(const model::ModelSpace& m,
                      const core::DensityMatrix& gamma0,
                      const RetractionConfig& cfg) {
  std::string why;
  if (!core::is_density(m, gamma0.mat, cfg.membership_tol, &why))
    throw PreconditionViolated("theta: " + why);

  fixedpoint::FixConfig fix;
  fix.tol = cfg.tol_x;
  fix.max_iter = cfg.max_iter;
  if (cfg.enforce_k) {
    const auto c = core::constants(m, cfg.r, cfg.r_fraction, cfg.kappa_mode);
    fix.k_cap = c.k;
  }

  auto step = [&](const Matrix& g) {
    Matrix out;
    field_and_project(m, g, &out);
    return out;
  };
  auto dist = [&](const Matrix& a, const Matrix& b) {
    return core::x_norm(m, a - b);
  };

  auto [limit, trace] =
      fixedpoint::iterate_to_fix<Matrix>(step, dist, gamma0.mat, fix);

  AdmissibleState st;
  st.gamma = core::DensityMatrix(std::move(limit));
  st.field = core::mean_field(m, st.gamma);
  st.residual = trace.residuals.empty() ? 0.0 : trace.residuals.back();
  st.trace = std::move(trace);
  return st;
}

double u_margin(const model::ModelSpace& m, const core::DensityMatrix& gamma,
                const core::ConstantsReport& constants) {
  const Matrix t = core::t_map(m, gamma).mat;
  const double head = core::one_sided_weight_norm(m, gamma.mat);
  const double resid = core::x_norm(m, t - gamma.mat);
  return constants.r_chosen - (head + constants.a_big * resid);
}

Matrix dt_map(const model::ModelSpace& m, const core::MeanField& field,
              const Matrix& gamma, const Matrix& h) {
  if (h.rows() != m.dim || h.cols() != m.dim)
    throw DimensionMismatch("dt_map: direction has wrong shape");
  Matrix dh = Matrix::Zero(m.dim, m.dim);
  if (!m.factors.empty())
    dh = m.alpha *
         (model::contract_direct(m, h) - model::contract_exchange(m, h));

  // First-order change of the positive spectral projector: divided
  // differences of the step function across the spectral gap.
  const Matrix b = field.evecs.adjoint() * dh * field.evecs;
  Matrix c = Matrix::Zero(m.dim, m.dim);
  for (int i = 0; i < m.dim; ++i) {
    const double fi = field.evals[i] > 0.0 ? 1.0 : 0.0;
    for (int j = 0; j < m.dim; ++j) {
      const double fj = field.evals[j] > 0.0 ? 1.0 : 0.0;
      if (fi != fj)
        c(i, j) = b(i, j) * (fi - fj) / (field.evals[i] - field.evals[j]);
    }
  }
  const Matrix dp = field.evecs * c * field.evecs.adjoint();
  return linalg::hermitize(dp * gamma * field.pplus +
                           field.pplus * gamma * dp +
                           field.pplus * h * field.pplus);
}

namespace {

Matrix theta_quotient(const model::ModelSpace& m, const Matrix& base,
                      const Matrix& h, double eps,
                      const RetractionConfig& cfg) {
  RetractionConfig inner = cfg;
  inner.tol_x = std::min(cfg.tol_x, 1e-13);
  inner.enforce_k = false;
  try {
    const Matrix plus =
        theta(m, core::DensityMatrix(base + eps * h), inner).gamma.mat;
    const Matrix minus =
        theta(m, core::DensityMatrix(base - eps * h), inner).gamma.mat;
    return (plus - minus) / (2.0 * eps);
  } catch (const fixedpoint::MaxIterExceeded&) {
    throw StepTooLarge("dtheta_fd: perturbed retraction did not converge");
  } catch (const PreconditionViolated&) {
    throw StepTooLarge("dtheta_fd: perturbed state left the density set");
  }
}

} // namespace

DthetaReport dtheta_fd(const model::ModelSpace& m,
                       const AdmissibleState& at_fixed_point, const Matrix& h,
                       double eps, const RetractionConfig& cfg) {
  if (eps <= 0.0) throw DomainError("dtheta_fd: eps must be positive");
  if (!linalg::is_hermitian(h, 1e-10))
    throw DomainError("dtheta_fd: direction must be Hermitian");

  const Matrix& base = at_fixed_point.gamma.mat;
  DthetaReport rep;
  rep.dtheta_h = theta_quotient(m, base, h, eps, cfg);
  const Matrix half = theta_quotient(m, base, h, eps / 2.0, cfg);
  rep.step_check = core::x_norm(m, rep.dtheta_h - half);
  const double scale = std::max(1.0, core::x_norm(m, h));
  rep.warning = rep.step_check > 10.0 * eps * scale;

  const Matrix& pp = at_fixed_point.field.pplus;
  const Matrix pm = Matrix::Identity(m.dim, m.dim) - pp;
  rep.pp_residual =
      core::x_norm(m, pp * rep.dtheta_h * pp - pp * h * pp);
  rep.mm_residual = core::x_norm(m, pm * rep.dtheta_h * pm);
  return rep;
}

} // namespace df::retraction
