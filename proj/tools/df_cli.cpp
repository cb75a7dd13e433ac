#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "df/dfcore.hpp"
#include "df/errors.hpp"
#include "df/groundstate.hpp"
#include "df/model.hpp"
#include "df/report.hpp"
#include "df/retraction.hpp"
#include "df/sampling.hpp"

namespace {

using df::report::Json;

double parse_alpha(const std::string& text) {
  double value = 0.0;
  try {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
      double num = std::stod(text.substr(0, slash));
      double den = std::stod(text.substr(slash + 1));
      if (den == 0.0) throw df::DomainError("alpha denominator is zero");
      value = num / den;
    } else {
      value = std::stod(text);
    }
  } catch (const std::invalid_argument&) {
    throw df::DomainError("cannot parse alpha: " + text);
  } catch (const std::out_of_range&) {
    throw df::DomainError("alpha out of range: " + text);
  }
  if (!(value > 0.0)) throw df::DomainError("alpha must be positive");
  return value;
}

struct ZRange {
  int lo = 1;
  int hi = 1;
};

ZRange parse_z_range(const std::string& text) {
  ZRange zr;
  auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      zr.lo = std::stoi(text.substr(0, dots));
      zr.hi = std::stoi(text.substr(dots + 2));
    } else {
      zr.lo = zr.hi = std::stoi(text);
    }
  } catch (const std::exception&) {
    throw df::DomainError("cannot parse Z range: " + text);
  }
  if (zr.lo < 0 || zr.hi < zr.lo)
    throw df::DomainError("Z range must satisfy 0 <= lo <= hi");
  return zr;
}

std::vector<int> parse_channels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw df::DomainError("cannot parse channel list: " + text);
    }
  }
  if (out.empty()) throw df::DomainError("empty channel list");
  return out;
}

df::core::KappaMode parse_kappa_mode(const std::string& text) {
  if (text == "hardy") return df::core::KappaMode::hardy_bound;
  if (text == "matrix") return df::core::KappaMode::matrix_exact;
  throw df::DomainError("kappa mode must be 'hardy' or 'matrix'");
}

// Model source shared by solve and build: a file, a seeded synthetic model,
// or the radial builder.
struct ModelArgs {
  std::string path;
  bool synthetic = false;
  std::uint64_t seed = 1;
  int dim = 32;
  int rank = 24;
  double pscale = 0.25;
  bool radial = false;
  double z = 1.0;
  std::string channels = "-1";
  int n_per_channel = 60;
  double box_radius = 0.0;
  int spline_order = 8;
  double nucleus_width = 0.0;
  bool no_interaction = false;
  double q = 1.0;
  std::string alpha = "1/137";
  CLI::Option* q_opt = nullptr;

  bool q_given() const { return q_opt && q_opt->count() > 0; }
};

void attach_model_flags(CLI::App* cmd, ModelArgs& a, bool with_file) {
  if (with_file)
    cmd->add_option("--model", a.path, "read the model from a file");
  cmd->add_flag("--synthetic", a.synthetic, "build a seeded synthetic model");
  cmd->add_option("--seed", a.seed, "synthetic model seed");
  cmd->add_option("--dim", a.dim, "synthetic model dimension");
  cmd->add_option("--rank", a.rank, "synthetic interaction rank");
  cmd->add_option("--pscale", a.pscale,
                  "synthetic potential scale ||v d^-1||");
  cmd->add_flag("--radial", a.radial, "build a radial hydrogenic model");
  cmd->add_option("--Z", a.z, "nuclear charge");
  cmd->add_option("--channels", a.channels, "comma-separated kappa list");
  cmd->add_option("--n", a.n_per_channel, "radial functions per channel");
  cmd->add_option("--box", a.box_radius, "box radius in Compton units");
  cmd->add_option("--order", a.spline_order, "B-spline order");
  cmd->add_option("--nucleus-width", a.nucleus_width,
                  "Gaussian nuclear smearing width");
  cmd->add_flag("--no-interaction", a.no_interaction,
                "drop the two-body interaction");
  a.q_opt = cmd->add_option("--q", a.q, "charge budget (trace constraint)");
  cmd->add_option("--alpha", a.alpha, "coupling, rational or decimal");
}

Json model_parameters(const ModelArgs& a) {
  Json p;
  if (!a.path.empty()) {
    p["model"] = a.path;
    if (a.q_given()) p["q"] = a.q;
    return p;
  }
  if (a.synthetic) {
    p["synthetic"] = Json{{"seed", a.seed},
                          {"dim", a.dim},
                          {"rank", a.rank},
                          {"pscale", a.pscale}};
  } else if (a.radial) {
    p["radial"] = Json{{"Z", a.z},
                       {"channels", a.channels},
                       {"n", a.n_per_channel},
                       {"box", a.box_radius},
                       {"order", a.spline_order},
                       {"nucleus_width", a.nucleus_width},
                       {"interaction", !a.no_interaction}};
  }
  p["q"] = a.q;
  p["alpha"] = a.alpha;
  return p;
}

df::model::ModelSpace make_model(const ModelArgs& a) {
  int sources = int(!a.path.empty()) + int(a.synthetic) + int(a.radial);
  if (sources != 1)
    throw df::DomainError(
        "pick exactly one model source: --model, --synthetic, or --radial");
  if (!a.path.empty()) {
    df::model::ModelSpace m = df::model::load_model(a.path);
    if (a.q_given()) m.q = a.q;
    return m;
  }
  double alpha = parse_alpha(a.alpha);
  if (a.synthetic)
    return df::model::build_synthetic(a.seed, a.dim, a.rank, a.pscale, a.q,
                                      alpha);
  df::model::RadialConfig cfg;
  cfg.z = a.z;
  cfg.channels = parse_channels(a.channels);
  cfg.n_per_channel = a.n_per_channel;
  cfg.box_radius = a.box_radius;
  cfg.alpha = alpha;
  cfg.q = a.q;
  cfg.spline_order = a.spline_order;
  cfg.nucleus_width = a.nucleus_width;
  cfg.with_interaction = !a.no_interaction;
  return df::model::build_radial_hydrogenic(cfg);
}

// Constants of the contraction analysis; infeasible parameter sets are
// reported instead of thrown.
df::core::ConstantsReport constants_or_infeasible(
    const df::model::ModelSpace& m, double r_fraction,
    df::core::KappaMode mode) {
  try {
    return df::core::constants(m, 0.0, r_fraction, mode);
  } catch (const df::KappaTooLarge&) {
    df::core::ConstantsReport c;
    c.mode = mode;
    c.r_fraction = r_fraction;
    c.kappa = df::core::kappa_of(m, mode);
    c.lambda0 = 1.0 - m.alpha * std::max(m.q, m.z);
    c.condition = df::core::check_feasibility(m.alpha, m.z, m.q, c.kappa);
    c.feasible = false;
    return c;
  }
}

Json to_json(const df::RealVector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

int cmd_feasibility(const std::string& z_text, double q, bool q_equals_z,
                    const std::string& alpha_text,
                    const std::string& kappa_text, const std::string& out) {
  if (kappa_text != "hardy")
    throw df::DomainError(
        "the parameter table uses the hardy kappa bound; exact kappa needs a "
        "built model (see diagnose)");
  double alpha = parse_alpha(alpha_text);
  ZRange zr = parse_z_range(z_text);
  if (!q_equals_z && q < 0.0)
    throw df::DomainError("give --q >= 0 or --q-equals-Z");

  Json params{{"Z", z_text},
              {"q", q_equals_z ? Json("Z") : Json(q)},
              {"alpha", alpha_text},
              {"kappa", kappa_text}};
  Json doc;
  doc["manifest"] = df::report::make_manifest("feasibility", params,
                                              std::nullopt, std::nullopt);
  Json table = Json::array();
  int last_feasible = -1;
  for (int z = zr.lo; z <= zr.hi; ++z) {
    double qq = q_equals_z ? double(z) : q;
    double kappa = 2.0 * alpha * (z + qq);
    auto row = df::core::check_feasibility(alpha, double(z), qq, kappa);
    table.push_back(df::report::to_json(row));
    if (row.feasible) last_feasible = z;
  }
  doc["table"] = table;
  doc["last_feasible_Z"] = last_feasible;

  std::string path = out.empty()
                         ? df::report::output_path("feasibility.json")
                         : out;
  df::report::write_report(path, doc);
  std::cout << "wrote " << path << " (last feasible Z: " << last_feasible
            << ")\n";
  return 0;
}

struct SolveFlags {
  double tol_gap = 1e-10;
  int max_outer = 200;
  double r_fraction = 0.9;
  std::string kappa = "matrix";
  std::string init = "projector";
  bool force = false;
  std::string out;
};

int cmd_solve(const ModelArgs& margs, const SolveFlags& f) {
  df::model::ModelSpace m = make_model(margs);

  Json params = model_parameters(margs);
  params["tol_gap"] = f.tol_gap;
  params["max_outer"] = f.max_outer;
  params["r_fraction"] = f.r_fraction;
  params["kappa"] = f.kappa;
  params["init"] = f.init;
  params["force"] = f.force;
  std::optional<std::uint64_t> seed;
  if (margs.synthetic) seed = margs.seed;

  Json doc;
  doc["manifest"] = df::report::make_manifest(
      "solve", params, df::model::model_checksum(m), seed);
  doc["model"] = Json{{"dim", m.dim},
                      {"alpha", m.alpha},
                      {"z", m.z},
                      {"q", m.q},
                      {"factors", int(m.factors.size())}};

  df::core::KappaMode mode = parse_kappa_mode(f.kappa);
  auto cons = constants_or_infeasible(m, f.r_fraction, mode);
  doc["feasibility"] = df::report::to_json(cons);

  std::string path =
      f.out.empty() ? df::report::output_path("solve.json") : f.out;
  if (!cons.feasible && !f.force) {
    doc["status"] = "not_in_certified_regime";
    df::report::write_report(path, doc);
    std::cout << "wrote " << path
              << " (infeasible parameters; rerun with --force)\n";
    return 2;
  }
  if (!cons.feasible)
    doc["warning"] = "parameters outside the certified regime; results "
                     "carry no contraction guarantee";

  df::ground::SolveConfig cfg;
  cfg.tol_gap = f.tol_gap;
  cfg.max_outer = f.max_outer;
  cfg.retraction.r_fraction = f.r_fraction;
  cfg.retraction.kappa_mode = mode;
  if (f.init == "zero") {
    cfg.init = df::ground::InitKind::zero_seed;
  } else if (f.init == "projector") {
    cfg.init = df::ground::InitKind::scaled_projector;
  } else {
    throw df::DomainError("init must be 'zero' or 'projector'");
  }
  auto rep = df::ground::solve_ground_state(m, cfg);

  Json res;
  res["status"] = rep.status;
  res["converged"] = rep.converged;
  res["outer_iterations"] = rep.outer_iterations;
  res["e_q"] = rep.e_q;
  res["energy_unshifted"] = rep.e_q + m.q;
  res["gap"] = rep.gap;
  res["mu"] = rep.mu;
  res["trace"] = rep.occupations.sum();
  res["q_exceeds_z"] = rep.q_exceeds_z;
  res["commutator_residual"] = rep.commutator_residual;
  res["structure_deviation"] = rep.structure_deviation;
  res["occupations"] = to_json(rep.occupations);
  res["field_evals"] = to_json(rep.field_evals);
  Json hist = Json::array();
  for (double e : rep.energy_history) hist.push_back(e);
  res["energy_history"] = hist;
  doc["result"] = res;

  df::report::write_report(path, doc);
  std::cout << "wrote " << path << " (" << rep.status << ", E_q = " << rep.e_q
            << ")\n";
  return rep.converged ? 0 : 2;
}

struct DiagnoseFlags {
  std::string model;
  std::string suites = "all";
  std::uint64_t seed = 7;
  int samples = 20;
  double r_fraction = 0.9;
  std::string kappa = "matrix";
  double window_e = 0.05;
  std::string out;
};

int cmd_diagnose(const DiagnoseFlags& f) {
  df::model::ModelSpace m = df::model::load_model(f.model);
  df::core::KappaMode mode = parse_kappa_mode(f.kappa);
  auto cons = constants_or_infeasible(m, f.r_fraction, mode);

  std::vector<std::string> suites;
  if (f.suites == "all") {
    suites = {"hardy", "contraction", "dtheta-blocks", "spectrum-count",
              "sublevel"};
  } else {
    std::stringstream ss(f.suites);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      suites.push_back(item);
    }
  }
  const std::vector<std::string> known = {"hardy", "contraction",
                                          "dtheta-blocks", "spectrum-count",
                                          "sublevel"};
  for (const auto& s : suites)
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw df::DomainError("unknown suite: " + s);

  Json params{{"model", f.model},     {"suites", f.suites},
              {"seed", f.seed},       {"samples", f.samples},
              {"r_fraction", f.r_fraction}, {"kappa", f.kappa},
              {"window_e", f.window_e}};
  Json doc;
  doc["manifest"] = df::report::make_manifest(
      "diagnose", params, df::model::model_checksum(m), f.seed);
  doc["feasibility"] = df::report::to_json(cons);

  df::retraction::RetractionConfig rc;
  rc.r_fraction = f.r_fraction;
  rc.kappa_mode = mode;

  Json out_suites = Json::array();
  bool asserted_failure = false;
  for (const auto& name : suites) {
    Json s;
    s["name"] = name;
    bool asserted = false, ok = true;
    if (name == "hardy") {
      auto h = df::core::hardy_checks(m, f.samples, f.seed, 0.0, mode);
      s["report"] = df::report::to_json(h);
      for (const auto& row : h.rows) asserted = asserted || row.asserted;
      ok = h.all_asserted_ok;
    } else if (name == "contraction") {
      df::sampling::Rng rng(f.seed);
      double worst = 0.0;
      int non_converged = 0;
      for (int t = 0; t < f.samples; ++t) {
        df::core::DensityMatrix g(
            df::sampling::random_density(rng, m.dim, m.q));
        try {
          auto state = df::retraction::theta(m, g, rc);
          for (double rr : state.trace.ratios) worst = std::max(worst, rr);
        } catch (const df::fixedpoint::MaxIterExceeded&) {
          ++non_converged;
        }
      }
      asserted = cons.feasible;
      double cap = cons.feasible ? cons.k : 1.0;
      ok = worst <= cap + 1e-9 && non_converged == 0;
      s["worst_ratio"] = worst;
      s["ratio_cap"] = cap;
      s["non_converged"] = non_converged;
      s["samples"] = f.samples;
    } else if (name == "dtheta-blocks") {
      df::sampling::Rng rng(f.seed + 1);
      double worst_pp = 0.0, worst_mm = 0.0;
      int skipped = 0;
      for (int t = 0; t < f.samples; ++t) {
        df::core::DensityMatrix g(
            df::sampling::random_density(rng, m.dim, m.q));
        try {
          auto state = df::retraction::theta(m, g, rc);
          df::Matrix h = df::sampling::random_direction(rng, m);
          auto rep = df::retraction::dtheta_fd(m, state, h, 1e-6, rc);
          worst_pp = std::max(worst_pp, rep.pp_residual);
          worst_mm = std::max(worst_mm, rep.mm_residual);
        } catch (const df::Error&) {
          ++skipped;
        }
      }
      asserted = cons.feasible;
      ok = worst_pp <= 1e-4 && worst_mm <= 1e-4 && skipped == 0;
      s["worst_pp_residual"] = worst_pp;
      s["worst_mm_residual"] = worst_mm;
      s["skipped"] = skipped;
      s["samples"] = f.samples;
    } else if (name == "spectrum-count") {
      df::core::DensityMatrix zero(df::Matrix::Zero(m.dim, m.dim));
      auto cw = df::ground::eigen_count_window(m, zero, f.window_e);
      s["window_e"] = f.window_e;
      s["count_low"] = cw.count_low;
      s["count_mid"] = cw.count_mid;
      s["needed"] = int(std::ceil(m.q));
      asserted = false; // depends on the window; reported for inspection
      ok = cw.count_low >= int(std::ceil(m.q));
    } else if (name == "sublevel") {
      double bound = std::numeric_limits<double>::quiet_NaN();
      int checked = 0;
      double worst = 0.0;
      bool bound_defined = cons.feasible && cons.condition.margin > 0.0;
      if (bound_defined) {
        bound = df::core::sublevel_bound(m, mode);
        df::ground::SolveConfig cfg;
        cfg.max_outer = 20;
        cfg.retraction = rc;
        cfg.collect_iterates = true;
        auto rep = df::ground::solve_ground_state(m, cfg);
        for (const auto& it : rep.iterates) {
          if (df::core::energy_shifted(m, it) > 0.0) continue;
          ++checked;
          worst = std::max(worst, df::core::x_norm(m, it.mat) / bound);
        }
      }
      asserted = bound_defined;
      ok = !bound_defined || worst <= 1.0 + 1e-9;
      s["bound"] = bound;
      s["iterates_checked"] = checked;
      s["worst_fill"] = worst;
    }
    s["asserted"] = asserted;
    s["ok"] = ok;
    if (asserted && !ok) asserted_failure = true;
    out_suites.push_back(s);
  }
  doc["suites"] = out_suites;
  doc["all_asserted_ok"] = !asserted_failure;

  std::string path =
      f.out.empty() ? df::report::output_path("diagnose.json") : f.out;
  df::report::write_report(path, doc);
  std::cout << "wrote " << path
            << (asserted_failure ? " (asserted suite FAILED)" : " (ok)")
            << "\n";
  return asserted_failure ? 2 : 0;
}

int cmd_build(const ModelArgs& margs, const std::string& out) {
  if (!margs.path.empty())
    throw df::DomainError("build expects --synthetic or --radial, not --model");
  df::model::ModelSpace m = make_model(margs);
  std::string path = out.empty() ? df::report::output_path("model.dfm") : out;
  df::model::save_model(m, path);

  Json params = model_parameters(margs);
  std::optional<std::uint64_t> seed;
  if (margs.synthetic) seed = margs.seed;
  Json doc;
  doc["manifest"] = df::report::make_manifest(
      "build", params, df::model::model_checksum(m), seed);
  doc["path"] = path;
  doc["dim"] = m.dim;
  doc["factors"] = int(m.factors.size());
  doc["basis"] = m.basis_meta;
  std::cout << df::report::render(doc);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-basis Dirac-Fock ground states via retraction"};
  app.require_subcommand(1);

  // feasibility
  auto* feas = app.add_subcommand(
      "feasibility", "tabulate the smallness condition over a Z range");
  std::string z_text = "1..30", alpha_text = "1/137", kappa_text = "hardy";
  double q = -1.0;
  bool q_equals_z = false;
  std::string feas_out;
  feas->add_option("--Z", z_text, "range like 1..30 or a single value");
  feas->add_option("--q", q, "fixed charge budget");
  feas->add_flag("--q-equals-Z", q_equals_z, "neutral atoms: q = Z per row");
  feas->add_option("--alpha", alpha_text, "coupling, rational or decimal");
  feas->add_option("--kappa", kappa_text, "kappa bound: hardy");
  feas->add_option("--out", feas_out, "report path");

  // solve
  auto* solve = app.add_subcommand("solve", "compute a ground state");
  ModelArgs solve_model;
  SolveFlags sf;
  attach_model_flags(solve, solve_model, true);
  solve->add_option("--tol-gap", sf.tol_gap, "optimality gap tolerance");
  solve->add_option("--max-outer", sf.max_outer, "outer iteration cap");
  solve->add_option("--r-fraction", sf.r_fraction,
                    "fraction of the maximal neighborhood radius");
  solve->add_option("--kappa", sf.kappa, "kappa mode: matrix or hardy");
  solve->add_option("--init", sf.init, "initial state: projector or zero");
  solve->add_flag("--force", sf.force, "run outside the certified regime");
  solve->add_option("--out", sf.out, "report path");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "property suites on a model");
  DiagnoseFlags df_;
  diag->add_option("--model", df_.model, "model file")->required();
  diag->add_option("--suites", df_.suites,
                   "comma list of hardy,contraction,dtheta-blocks,"
                   "spectrum-count,sublevel or 'all'");
  diag->add_option("--seed", df_.seed, "sampling seed");
  diag->add_option("--samples", df_.samples, "samples per suite");
  diag->add_option("--r-fraction", df_.r_fraction,
                   "fraction of the maximal neighborhood radius");
  diag->add_option("--kappa", df_.kappa, "kappa mode: matrix or hardy");
  diag->add_option("--window-e", df_.window_e, "spectral window parameter");
  diag->add_option("--out", df_.out, "report path");

  // build
  auto* build = app.add_subcommand("build", "build and save a model file");
  ModelArgs build_model;
  std::string build_out;
  attach_model_flags(build, build_model, false);
  build->add_option("--out", build_out, "model file path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (feas->parsed())
      return cmd_feasibility(z_text, q, q_equals_z, alpha_text, kappa_text,
                             feas_out);
    if (solve->parsed()) return cmd_solve(solve_model, sf);
    if (diag->parsed()) return cmd_diagnose(df_);
    if (build->parsed()) return cmd_build(build_model, build_out);
  } catch (const df::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
