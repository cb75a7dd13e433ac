#include <cmath>
#include <utility>
#include <vector>

#include "df/bspline.hpp"
#include "df/errors.hpp"
#include "df/linalg.hpp"
#include "df/model.hpp"
#include "df/sampling.hpp"

namespace df::model {

using Json = nlohmann::ordered_json;

namespace {

// Symmetric matrix power via spectral decomposition.  Small negative
// eigenvalues within floor_tol (relative) are clamped to zero; anything
// worse means the assembled matrix is numerically broken.
RealMatrix sym_power(const RealMatrix& a, double expo, double floor_tol,
                     const char* what) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(a);
  if (es.info() != Eigen::Success) throw EigensolverFailure(what);
  RealVector lam = es.eigenvalues();
  double top = lam.cwiseAbs().maxCoeff();
  if (!(top > 0.0)) throw QuadratureFailure(std::string(what) + ": zero matrix");
  RealVector f(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    double x = lam[i];
    if (x <= 0.0) {
      if (x < -floor_tol * top)
        throw QuadratureFailure(std::string(what) +
                                ": matrix not positive semidefinite");
      x = 0.0;
    }
    if (expo < 0.0 && x < floor_tol * top)
      throw QuadratureFailure(std::string(what) +
                              ": matrix numerically singular");
    f[i] = std::pow(x, expo);
  }
  return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().transpose();
}

struct ChannelBlock {
  int kappa = 0;
  int l_large = 0;
  int l_small = 0;
  int n = 0;
  RealMatrix p_block;      // coupling in the orthonormalized basis
  RealMatrix pot_large;    // nuclear attraction density, large component
  RealMatrix pot_small;
  RealMatrix kin_large;    // Laplacian quadratic form, orthonormalized
  RealMatrix kin_small;
  RealMatrix val_large;    // grid values of the orthonormal functions
  RealMatrix val_small;
};

} // namespace

ModelSpace build_radial_hydrogenic(const RadialConfig& cfg) {
  if (cfg.alpha <= 0.0) throw DomainError("alpha must be positive");
  if (cfg.z < 0.0) throw DomainError("z must be nonnegative");
  if (cfg.q < 0.0) throw DomainError("q must be nonnegative");
  if (cfg.alpha * cfg.z >= 1.0)
    throw SubcriticalityViolated("alpha*z must be below 1 for a point-like nucleus");
  if (cfg.channels.empty()) throw DomainError("need at least one channel");
  for (int kap : cfg.channels)
    if (kap == 0) throw DomainError("channel kappa must be nonzero");
  for (size_t a = 0; a < cfg.channels.size(); ++a)
    for (size_t b = a + 1; b < cfg.channels.size(); ++b)
      if (cfg.channels[a] == cfg.channels[b])
        throw DomainError("duplicate channel");
  const int k = cfg.spline_order;
  if (k < 4) throw DomainError("spline order must be at least 4");
  const int n = cfg.n_per_channel;
  if (n < k) throw DomainError("n_per_channel must be at least the spline order");
  int ng = cfg.points_per_interval > 0 ? cfg.points_per_interval : k + 8;
  if (ng < k + 2)
    throw DomainError("points_per_interval too small for exact quadrature");
  double rmax = cfg.box_radius;
  if (rmax <= 0.0) {
    if (cfg.z <= 0.0)
      throw DomainError("box_radius must be given when z is zero");
    rmax = 50.0 / (cfg.alpha * cfg.z); // a generous multiple of the 1s radius
  }
  if (cfg.nucleus_width < 0.0) throw DomainError("nucleus_width must be >= 0");
  if (cfg.grid_stretch < 0.0) throw DomainError("grid_stretch must be >= 0");

  int l_max = 0;
  for (int kap : cfg.channels)
    l_max = std::max(l_max, kap > 0 ? kap : -kap - 1);

  // One shared breakpoint grid sized for the largest angular momentum: the
  // channel with l = l_max drops l_max+1 splines at the origin and two at
  // the outer wall and still retains n functions.
  const int intervals = n + l_max + 4 - k;
  if (intervals < 2) throw DomainError("basis too small for this channel set");
  bspline::Basis basis(k, bspline::stretched_breakpoints(intervals, rmax,
                                                         cfg.grid_stretch));
  const int n_splines = basis.size();

  bspline::GaussRule rule = bspline::gauss_legendre(ng);
  const auto& breaks = basis.breakpoints();
  const int gpts = intervals * ng;
  RealVector rg(gpts), wg(gpts);
  for (int j = 0; j < intervals; ++j) {
    double mid = 0.5 * (breaks[j] + breaks[j + 1]);
    double half = 0.5 * (breaks[j + 1] - breaks[j]);
    for (int p = 0; p < ng; ++p) {
      rg[j * ng + p] = mid + half * rule.nodes[p];
      wg[j * ng + p] = half * rule.weights[p];
    }
  }

  // Nuclear charge density seen at radius r, i.e. the potential without the
  // -alpha*z prefactor.  A positive width smears the point charge with a
  // Gaussian, which stays below 1/r pointwise.
  auto nuc = [&](double r) {
    if (cfg.nucleus_width <= 0.0) return 1.0 / r;
    return std::erf(r / (cfg.nucleus_width * std::sqrt(2.0))) / r;
  };

  std::vector<ChannelBlock> blocks;
  blocks.reserve(cfg.channels.size());
  for (int kap : cfg.channels) {
    ChannelBlock cb;
    cb.kappa = kap;
    cb.l_large = kap > 0 ? kap : -kap - 1;
    cb.l_small = kap > 0 ? kap - 1 : -kap;
    cb.n = n;
    // Retained splines: skip l+1 at the origin so every kept function (and
    // its kinetic-balance partner divided by r) is polynomial on the first
    // interval, and skip the last two so value and slope vanish at the wall.
    const int keep_lo = cb.l_large + 1;
    if (keep_lo + n > n_splines - 2)
      throw DomainError("channel does not fit the shared breakpoint grid");

    RealMatrix raw_l = RealMatrix::Zero(gpts, n);  // B_i
    RealMatrix raw_s = RealMatrix::Zero(gpts, n);  // B_i' + kappa B_i / r
    RealMatrix sp = RealMatrix::Zero(n, n), sq = RealMatrix::Zero(n, n);
    RealMatrix cp = RealMatrix::Zero(n, n), cq = RealMatrix::Zero(n, n);
    RealMatrix tp = RealMatrix::Zero(n, n), tq = RealMatrix::Zero(n, n);
    std::vector<int> idx(k);
    std::vector<double> fl(k), fs(k), dl(k), ds(k);
    for (int g = 0; g < gpts; ++g) {
      double r = rg[g], w = wg[g];
      auto loc = basis.eval(r);
      int nnz = 0;
      for (int t = 0; t < k; ++t) {
        int col = loc.first + t - keep_lo;
        if (col < 0 || col >= n) continue;
        idx[nnz] = col;
        fl[nnz] = loc.val[t];
        dl[nnz] = loc.d1[t];
        fs[nnz] = loc.d1[t] + kap * loc.val[t] / r;
        ds[nnz] = loc.d2[t] + kap * (loc.d1[t] / r - loc.val[t] / (r * r));
        ++nnz;
      }
      double rho = nuc(r);
      double all = cb.l_large * (cb.l_large + 1.0) / (r * r);
      double als = cb.l_small * (cb.l_small + 1.0) / (r * r);
      for (int a = 0; a < nnz; ++a) {
        raw_l(g, idx[a]) = fl[a];
        raw_s(g, idx[a]) = fs[a];
        for (int b = 0; b < nnz; ++b) {
          double pll = w * fl[a] * fl[b];
          double pss = w * fs[a] * fs[b];
          sp(idx[a], idx[b]) += pll;
          sq(idx[a], idx[b]) += pss;
          cp(idx[a], idx[b]) += pll * rho;
          cq(idx[a], idx[b]) += pss * rho;
          tp(idx[a], idx[b]) += w * (dl[a] * dl[b] + all * fl[a] * fl[b]);
          tq(idx[a], idx[b]) += w * (ds[a] * ds[b] + als * fs[a] * fs[b]);
        }
      }
    }
    if (!sp.allFinite() || !sq.allFinite() || !cp.allFinite() ||
        !cq.allFinite() || !tp.allFinite() || !tq.allFinite())
      throw QuadratureFailure("non-finite radial matrix element");

    RealMatrix xp = sym_power(sp, -0.5, 1e-13, "large overlap");
    RealMatrix xq = sym_power(sq, -0.5, 1e-13, "small overlap");
    cb.p_block = xp * sq * xq;
    cb.pot_large = xp * cp * xp;
    cb.pot_small = xq * cq * xq;
    cb.kin_large = xp * tp * xp;
    cb.kin_small = xq * tq * xq;
    cb.val_large = raw_l * xp;
    cb.val_small = raw_s * xq;
    blocks.push_back(std::move(cb));
  }

  const int nch = int(blocks.size());
  const int dim = 2 * n * nch;
  ModelSpace ms;
  ms.dim = dim;
  ms.alpha = cfg.alpha;
  ms.z = cfg.z;
  ms.q = cfg.q;
  ms.d = Matrix::Zero(dim, dim);
  ms.v = Matrix::Zero(dim, dim);
  for (int c = 0; c < nch; ++c) {
    int off = 2 * n * c;
    const ChannelBlock& cb = blocks[size_t(c)];
    ms.d.block(off, off, n, n) = Matrix::Identity(n, n);
    ms.d.block(off + n, off + n, n, n) = -Matrix::Identity(n, n);
    ms.d.block(off, off + n, n, n) = cb.p_block.cast<Complex>();
    ms.d.block(off + n, off, n, n) = cb.p_block.transpose().cast<Complex>();
    ms.v.block(off, off, n, n) =
        (-cfg.alpha * cfg.z * cb.pot_large).cast<Complex>();
    ms.v.block(off + n, off + n, n, n) =
        (-cfg.alpha * cfg.z * cb.pot_small).cast<Complex>();
  }
  ms.weight_half = weight_from_d(ms.d);

  // Kinetic dominance of the Coulomb density: the square root of the
  // compressed Laplacian dominates the compressed |p|, so this sampled
  // bound is implied by the continuum inequality.
  double worst_ratio = 0.0;
  {
    sampling::Rng rng(0x6b68);
    for (const ChannelBlock& cb : blocks) {
      for (int side = 0; side < 2; ++side) {
        const RealMatrix& pot = side == 0 ? cb.pot_large : cb.pot_small;
        const RealMatrix& kin = side == 0 ? cb.kin_large : cb.kin_small;
        RealMatrix root = sym_power(kin, 0.5, 1e-11, "kinetic form");
        for (int s = 0; s < 1000; ++s) {
          Vector psi(n);
          for (int i = 0; i < n; ++i) psi[i] = rng.cnormal();
          double num = std::real(psi.dot(pot.cast<Complex>() * psi));
          double den =
              0.5 * kPi * std::real(psi.dot(root.cast<Complex>() * psi));
          if (den <= 0.0) throw QuadratureFailure("kinetic form not positive");
          worst_ratio = std::max(worst_ratio, num / den);
        }
      }
    }
    if (worst_ratio > 1.0 + 1e-9)
      throw QuadratureFailure("Coulomb density exceeds its kinetic bound");
  }

  // Two-body factors for the spherically averaged interaction.  On the
  // quadrature grid 1/max(r,r') telescopes into a positive combination of
  // indicator blocks, which factorizes the four-index tensor exactly over
  // cumulative Gram matrices; an eigenvalue cut then compresses the factor
  // list with a controlled trace-norm error.
  int kept_rank = 0;
  double dropped_weight = 0.0;
  if (cfg.with_interaction) {
    RealVector sc(gpts);
    for (int g = 0; g < gpts; ++g) {
      double next = g + 1 < gpts ? 1.0 / rg[g + 1] : 0.0;
      double c = 1.0 / rg[g] - next;
      if (!(c > 0.0)) throw QuadratureFailure("interaction kernel degenerate");
      sc[g] = std::sqrt(c);
    }
    RealMatrix cum = RealMatrix::Zero(gpts, gpts);
    for (const ChannelBlock& cb : blocks) {
      RealMatrix gram = cb.val_large * cb.val_large.transpose();
      cum.array() += gram.array().square();
      gram = cb.val_small * cb.val_small.transpose();
      cum.array() += gram.array().square();
    }
    cum = (wg * wg.transpose()).cwiseProduct(cum).eval();
    for (int g = 0; g < gpts; ++g)
      for (int h = 1; h < gpts; ++h) cum(g, h) += cum(g, h - 1);
    for (int g = 1; g < gpts; ++g) cum.row(g) += cum.row(g - 1);
    RealMatrix g2 = (sc * sc.transpose()).cwiseProduct(cum);
    g2 = 0.5 * (g2 + g2.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(g2);
    if (es.info() != Eigen::Success)
      throw EigensolverFailure("interaction compression");
    RealVector lam = es.eigenvalues();
    double lmax = lam[gpts - 1];
    if (!(lmax > 0.0)) throw QuadratureFailure("interaction kernel vanished");
    double total = 0.0, kept_sum = 0.0;
    for (int t = 0; t < gpts; ++t) total += std::max(lam[t], 0.0);
    std::vector<int> keep;
    for (int t = gpts - 1; t >= 0; --t) {
      if (lam[t] <= cfg.factor_cut * lmax) break;
      keep.push_back(t);
      kept_sum += lam[t];
    }
    dropped_weight = (total - kept_sum) / total;
    kept_rank = int(keep.size());
    ms.factors.reserve(keep.size());
    for (int t : keep) {
      RealVector coef = es.eigenvectors().col(t).cwiseProduct(sc);
      for (int g = gpts - 2; g >= 0; --g) coef[g] += coef[g + 1];
      coef = coef.cwiseProduct(wg);
      Matrix fac = Matrix::Zero(dim, dim);
      for (int c = 0; c < nch; ++c) {
        int off = 2 * n * c;
        const ChannelBlock& cb = blocks[size_t(c)];
        fac.block(off, off, n, n) =
            (cb.val_large.transpose() * coef.asDiagonal() * cb.val_large)
                .cast<Complex>();
        fac.block(off + n, off + n, n, n) =
            (cb.val_small.transpose() * coef.asDiagonal() * cb.val_small)
                .cast<Complex>();
      }
      if (!fac.allFinite()) throw QuadratureFailure("non-finite factor");
      ms.factors.push_back(std::move(fac));
    }
  }

  ms.basis_meta = Json{
      {"builder", "radial_hydrogenic"},
      {"z", cfg.z},
      {"alpha", cfg.alpha},
      {"q", cfg.q},
      {"n_per_channel", n},
      {"spline_order", k},
      {"points_per_interval", ng},
      {"box_radius", rmax},
      {"grid_stretch", cfg.grid_stretch},
      {"nucleus_width", cfg.nucleus_width},
      {"length_unit", "compton"},
      {"interaction",
       Json{{"enabled", cfg.with_interaction},
            {"multipole", 0},
            {"rank", kept_rank},
            {"grid_rank", gpts},
            {"relative_cut", cfg.factor_cut},
            {"dropped_weight", dropped_weight}}},
      {"kato_herbst_worst_ratio", worst_ratio},
      {"w_bound_certified", false},
  };
  Json chans = Json::array();
  for (const ChannelBlock& cb : blocks)
    chans.push_back(Json{{"kappa", cb.kappa},
                         {"l_large", cb.l_large},
                         {"l_small", cb.l_small},
                         {"retained", cb.n}});
  ms.basis_meta["channels"] = chans;

  validate_model(ms);
  return ms;
}

} // namespace df::model
