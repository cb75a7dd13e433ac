#include "df/dfcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "df/errors.hpp"
#include "df/sampling.hpp"

namespace df::core {

namespace {

double min_abs_eval(const RealVector& evals) {
  return evals.cwiseAbs().minCoeff();
}

Matrix d_inverse(const model::ModelSpace& m) {
  return linalg::spectral_apply(m.d, [](double x) { return 1.0 / x; });
}

} // namespace

std::string to_string(KappaMode mode) {
  return mode == KappaMode::hardy_bound ? "hardy_bound" : "matrix_exact";
}

bool is_density(const model::ModelSpace& m, const Matrix& g, double tol,
                std::string* why) {
  const auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (g.rows() != m.dim || g.cols() != m.dim)
    return fail("density has wrong shape");
  if (!linalg::is_hermitian(g, tol)) return fail("density is not Hermitian");
  const auto eig = linalg::herm_eig(g);
  if (eig.evals.minCoeff() < -tol)
    return fail("density has a negative eigenvalue");
  if (eig.evals.maxCoeff() > 1.0 + tol)
    return fail("density has an eigenvalue above one");
  const Complex tr = g.trace();
  if (std::abs(tr.imag()) > tol) return fail("density trace is not real");
  if (tr.real() > m.q + tol) return fail("density trace exceeds the budget q");
  return true;
}

DensityMatrix DensityMatrix::checked(const model::ModelSpace& m, Matrix g,
                                     double tol) {
  std::string why;
  if (!is_density(m, g, tol, &why))
    throw DomainError("DensityMatrix: " + why);
  return DensityMatrix(std::move(g));
}

MeanField mean_field_of(const model::ModelSpace& m, const Matrix& gamma) {
  if (gamma.rows() != m.dim || gamma.cols() != m.dim)
    throw DimensionMismatch("mean_field: density has wrong shape");
  Matrix h = m.d + m.v;
  if (!m.factors.empty())
    h += m.alpha * (model::contract_direct(m, gamma) -
                    model::contract_exchange(m, gamma));
  MeanField f;
  f.h = linalg::hermitize(h);
  auto eig = linalg::herm_eig(f.h);
  if (min_abs_eval(eig.evals) < 1e-12)
    throw ZeroEigenvalue(
        "mean_field: eigenvalue at zero, positive projector undefined");
  f.pplus = linalg::spectral_apply(eig, [](double x) { return x > 0.0 ? 1.0 : 0.0; });
  f.evals = std::move(eig.evals);
  f.evecs = std::move(eig.vecs);
  return f;
}

MeanField mean_field(const model::ModelSpace& m, const DensityMatrix& gamma) {
  return mean_field_of(m, gamma.mat);
}

double energy(const model::ModelSpace& m, const DensityMatrix& gamma) {
  const Matrix& g = gamma.mat;
  if (g.rows() != m.dim || g.cols() != m.dim)
    throw DimensionMismatch("energy: density has wrong shape");
  double e = ((m.d + m.v) * g).trace().real();
  if (!m.factors.empty()) {
    const double direct = (model::contract_direct(m, g) * g).trace().real();
    const double exch = (model::contract_exchange(m, g) * g).trace().real();
    e += 0.5 * m.alpha * (direct - exch);
  }
  return e;
}

double energy_shifted(const model::ModelSpace& m, const DensityMatrix& gamma) {
  return energy(m, gamma) - gamma.mat.trace().real();
}

DensityMatrix t_map(const model::ModelSpace& m, const DensityMatrix& gamma,
                    double membership_tol) {
  std::string why;
  if (!is_density(m, gamma.mat, membership_tol, &why))
    throw PreconditionViolated("t_map: " + why);
  const MeanField f = mean_field(m, gamma);
  return DensityMatrix(
      linalg::hermitize(f.pplus * gamma.mat * f.pplus));
}

double x_norm(const model::ModelSpace& m, const Matrix& a) {
  if (a.rows() != m.dim || a.cols() != m.dim)
    throw DimensionMismatch("x_norm: wrong shape");
  return linalg::trace_norm_hermitian(
      linalg::hermitize(m.weight_half * a * m.weight_half));
}

double y_norm(const model::ModelSpace& m, const Matrix& a) {
  if (a.rows() != m.dim || a.cols() != m.dim)
    throw DimensionMismatch("y_norm: wrong shape");
  return linalg::opnorm(m.weight_half * a);
}

double one_sided_weight_norm(const model::ModelSpace& m, const Matrix& a) {
  if (a.rows() != m.dim || a.cols() != m.dim)
    throw DimensionMismatch("one_sided_weight_norm: wrong shape");
  return linalg::trace_norm(a * m.weight_half);
}

double kappa_of(const model::ModelSpace& m, KappaMode mode) {
  if (mode == KappaMode::hardy_bound) return 2.0 * m.alpha * (m.z + m.q);
  return linalg::opnorm(m.v * d_inverse(m)) + 2.0 * m.alpha * m.q;
}

FeasibilityRow check_feasibility(double alpha, double z, double q,
                                 double kappa) {
  FeasibilityRow row;
  row.alpha = alpha;
  row.z = z;
  row.q = q;
  row.kappa = kappa;
  row.lambda0 = 1.0 - alpha * std::max(q, z);
  row.margin = 1.0 - kappa - (kPi / 4.0) * alpha * q;
  row.cond1_ok = alpha * z < 2.0 / (kPi / 2.0 + 2.0 / kPi);
  row.cond2_lhs = kPi * alpha * q;
  row.margin_ok = row.margin > 0.0;
  const double prod = (1.0 - kappa) * row.lambda0 * row.margin;
  row.cond2_rhs = (row.margin_ok && kappa < 1.0 && row.lambda0 > 0.0)
                      ? 2.0 * std::sqrt(prod)
                      : 0.0;
  row.cond2_ok = row.cond2_lhs < row.cond2_rhs;
  row.feasible = row.cond1_ok && row.cond2_ok && row.margin_ok;
  return row;
}

ConstantsReport constants(const model::ModelSpace& m, double r,
                          double r_fraction, KappaMode mode) {
  if (r < 0.0) throw DomainError("constants: negative enlargement r");
  if (!(r_fraction > 0.0 && r_fraction < 1.0))
    throw DomainError("constants: r_fraction must lie in (0, 1)");
  ConstantsReport c;
  c.mode = mode;
  c.r = r;
  c.r_fraction = r_fraction;
  c.kappa = kappa_of(m, mode);
  c.kappa_r = c.kappa + 2.0 * m.alpha * r;
  c.lambda0 = 1.0 - m.alpha * std::max(m.q, m.z);
  c.lambda_r = c.lambda0 - m.alpha * r;
  if (c.kappa_r >= 1.0) {
    std::ostringstream os;
    os << "constants: kappa_r = " << c.kappa_r
       << " >= 1, contraction constants undefined";
    throw KappaTooLarge(os.str());
  }
  if (c.lambda_r <= 0.0) {
    std::ostringstream os;
    os << "constants: spectral lower bound lambda_r = " << c.lambda_r
       << " <= 0, contraction constants undefined";
    throw KappaTooLarge(os.str());
  }
  c.a_r = (kPi * m.alpha / 4.0) / std::sqrt((1.0 - c.kappa_r) * c.lambda_r);
  c.r_max = 1.0 / (2.0 * c.a_r);
  c.r_chosen = r_fraction * c.r_max;
  c.k = 2.0 * c.a_r * c.r_chosen;
  c.a_big = std::max((2.0 + c.a_r * (m.q + r)) / 2.0, 1.0 / (1.0 - c.k));
  c.condition = check_feasibility(m.alpha, m.z, m.q, c.kappa);
  c.feasible = c.condition.feasible;
  return c;
}

double sublevel_bound(const model::ModelSpace& m, KappaMode mode) {
  const double kappa = kappa_of(m, mode);
  const double margin = 1.0 - kappa - (kPi / 4.0) * m.alpha * m.q;
  if (margin <= 0.0)
    throw KappaTooLarge("sublevel_bound: 1 - kappa - (pi/4) alpha q <= 0");
  return m.q / margin;
}

WindowBoundReport d_gamma_d_bound_check(const model::ModelSpace& m,
                                        const DensityMatrix& gamma,
                                        const MeanField& ref, double nu,
                                        KappaMode mode) {
  if (nu <= 0.0) throw DomainError("d_gamma_d_bound_check: nu must be positive");
  WindowBoundReport rep;
  const Matrix window = linalg::spectral_apply(
      linalg::HermEig{ref.evals, ref.evecs},
      [nu](double x) { return (x >= 0.0 && x <= nu) ? 1.0 : 0.0; });
  const Matrix outside = Matrix::Identity(m.dim, m.dim) - window;
  const auto geig = linalg::herm_eig(gamma.mat);
  const double scale = 1.0 + geig.evals.cwiseAbs().maxCoeff();
  rep.pre_ok = geig.evals.minCoeff() >= -1e-10 * scale &&
               geig.evals.maxCoeff() <= 1.0 + 1e-10 &&
               linalg::opnorm(outside * gamma.mat) <= 1e-8 * scale;
  const double kappa = kappa_of(m, mode);
  if (kappa >= 1.0)
    throw KappaTooLarge("d_gamma_d_bound_check: kappa >= 1");
  rep.lhs = linalg::trace_norm_hermitian(
      linalg::hermitize(m.d * gamma.mat * m.d));
  rep.bound = nu * nu * gamma.mat.trace().real() /
              ((1.0 - kappa) * (1.0 - kappa));
  rep.ratio = rep.bound > 0.0 ? rep.lhs / rep.bound : 0.0;
  rep.ok = rep.pre_ok && rep.lhs <= rep.bound * (1.0 + 1e-9);
  return rep;
}

HardyReport hardy_checks(const model::ModelSpace& m, int samples,
                         std::uint64_t seed, double r, KappaMode mode) {
  if (samples <= 0) throw DomainError("hardy_checks: samples must be positive");
  const double kappa = kappa_of(m, mode);
  const double kappa_r = kappa + 2.0 * m.alpha * r;
  const double lambda_r = 1.0 - m.alpha * std::max(m.q, m.z) - m.alpha * r;
  if (kappa_r >= 1.0)
    throw KappaTooLarge("hardy_checks: kappa_r >= 1, bounds undefined");

  const bool certified = m.basis_meta.value("w_bound_certified", false);
  const auto deig = linalg::herm_eig(m.d);
  const auto dpow = [&](double s) {
    return linalg::spectral_apply(deig,
                                  [s](double x) { return std::pow(std::abs(x), s); });
  };
  const Matrix d_half = dpow(0.5);
  const Matrix d_mhalf = dpow(-0.5);
  const Matrix d_inv = dpow(-1.0);

  HardyRow pot{"interaction_operator_bound", 0.0, false, true};
  HardyRow rel{"interaction_relative_bound", 0.0, false, true};
  HardyRow upper{"mean_field_upper", 0.0, certified, true};
  HardyRow lower{"mean_field_lower", 0.0, certified, true};
  HardyRow swap{"projector_weight_swap", 0.0, certified, true};
  HardyRow gap{"spectral_gap_lower", 0.0, certified, true};

  sampling::Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Matrix g = sampling::random_density(rng, m.dim, m.q);
    const double tr_g = g.trace().real();
    const Matrix w = model::contract_direct(m, g) - model::contract_exchange(m, g);
    const double w_norm = linalg::opnorm_hermitian(w);

    const double xg = x_norm(m, g);
    if (xg > 0.0)
      pot.worst_ratio = std::max(pot.worst_ratio, w_norm / ((kPi / 2.0) * xg));
    if (tr_g > 0.0)
      rel.worst_ratio = std::max(rel.worst_ratio,
                                 linalg::opnorm(w * d_inv) / (2.0 * tr_g));

    const MeanField f = mean_field_of(m, g);
    const linalg::HermEig feig{f.evals, f.evecs};
    for (const double s_pow : {0.5, 1.0}) {
      const Matrix h_s = linalg::spectral_apply(
          feig, [s_pow](double x) { return std::pow(std::abs(x), s_pow); });
      const Matrix h_ms = linalg::spectral_apply(
          feig, [s_pow](double x) { return std::pow(std::abs(x), -s_pow); });
      const Matrix d_ms = dpow(-s_pow);
      const Matrix d_s = dpow(s_pow);
      upper.worst_ratio =
          std::max(upper.worst_ratio,
                   linalg::opnorm(h_s * d_ms) / std::pow(1.0 + kappa_r, s_pow));
      lower.worst_ratio =
          std::max(lower.worst_ratio,
                   linalg::opnorm(d_s * h_ms) * std::pow(1.0 - kappa_r, s_pow));
    }
    swap.worst_ratio =
        std::max(swap.worst_ratio,
                 linalg::opnorm(d_mhalf * f.pplus * d_half) /
                     std::sqrt((1.0 + kappa_r) / (1.0 - kappa_r)));
    if (lambda_r > 0.0)
      gap.worst_ratio =
          std::max(gap.worst_ratio, lambda_r / f.evals.cwiseAbs().minCoeff());
  }

  HardyReport rep;
  rep.samples = samples;
  for (HardyRow row : {pot, rel, upper, lower, swap, gap}) {
    row.ok = !row.asserted || row.worst_ratio <= 1.0 + 1e-9;
    rep.all_asserted_ok = rep.all_asserted_ok && row.ok;
    rep.rows.push_back(row);
  }
  // Radial models verify the pointwise Coulomb bound against the kinetic
  // form at build time; surface the recorded result here.
  if (m.basis_meta.contains("kato_herbst_worst_ratio")) {
    HardyRow kh{"kato_herbst_vector_check",
                m.basis_meta["kato_herbst_worst_ratio"].get<double>(), true,
                true};
    kh.ok = kh.worst_ratio <= 1.0 + 1e-9;
    rep.all_asserted_ok = rep.all_asserted_ok && kh.ok;
    rep.rows.push_back(kh);
  }
  return rep;
}

} // namespace df::core
