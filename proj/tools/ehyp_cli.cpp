// Command line front end: analyze | eht | grow | unstable | close | report.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ehyp/catalog.hpp"
#include "ehyp/closing.hpp"
#include "ehyp/effective.hpp"
#include "ehyp/errors.hpp"
#include "ehyp/graph_transform.hpp"
#include "ehyp/io.hpp"
#include "ehyp/rates.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ehyp;

namespace {

struct Args {
  std::string config, out = ".", seed_manifold = "zero";
  std::uint64_t seed = 1;
  bool strict_class = false;
  std::vector<std::string> tol;
};

System load_system(const RunConfig& cfg) {
  const json& s = cfg.system;
  if (s.contains("builtin"))
    return builtin(s["builtin"].get<std::string>(), s.value("params", json::object()));
  return system_from_descriptor(s);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}

LinearData linear_data(const RunConfig& cfg, const System& sys) {
  LinearOptions lo;
  lo.holder_radius = cfg.holder_radius;
  return extract_linear_data(sys.seq, sys.split, lo);
}

// Class parameters for the germ window: Theorem D construction when rates
// and seeds are given, otherwise a constant class from `section.class`.
ParamSeq make_params(const RunConfig& cfg, const LinearData& lin, const json& section) {
  if (section.contains("class")) {
    const json& c = section["class"];
    ParamSeq p;
    p.n_min = lin.n_min;
    p.alpha = lin.alpha;
    ParamStep st{c.at("r"), c.at("tau"), c.at("sigma"), c.at("kappa"), c.value("gamma", 0.0)};
    p.steps.assign(lin.size() + 1, st);
    return p;
  }
  if (!cfg.rates || !cfg.seeds) throw ConfigError("need rates and seeds, or a constant class");
  Seeds seeds = *cfg.seeds;
  if (seeds.xi <= 0 || seeds.gamma_bar <= 0) {
    auto sm = find_xi_gamma(lin, cfg.rates->delta());
    if (seeds.xi <= 0) seeds.xi = sm.xi;
    if (seeds.gamma_bar <= 0) seeds.gamma_bar = sm.gamma_bar;
  }
  return build_params_theorem_d(lin, *cfg.rates, seeds).params;
}

TransformOptions transform_options(const RunConfig& cfg, const Args& a, const json& section) {
  TransformOptions t;
  t.strict_class = a.strict_class || section.value("strict_class", false);
  t.degree = section.value("degree", 0);
  t.newton_tol = cfg.tolerance("newton", t.newton_tol);
  t.class_slack = cfg.tolerance("class_slack", t.class_slack);
  t.max_newton = static_cast<int>(cfg.tolerance("max_newton", t.max_newton));
  return t;
}

int cmd_analyze(const RunConfig& cfg, const fs::path& out, bool series_only) {
  System sys = load_system(cfg);
  LinearData lin = linear_data(cfg, sys);
  const double beta_bar = cfg.beta_bar.value_or(1.0);
  EffectiveSeries es = effective_series(lin, beta_bar);
  EffectiveReport rep = effective_report(lin, beta_bar, cfg.chi_hat);
  auto le = es.lambda_e();
  auto M = m_sequence(le, rep.chi_hat);
  auto gamma = eht_detect(le, rep.chi_hat);
  {
    auto os = open_out(out / "series.csv");
    write_series_csv(os, es, M, gamma);
  }
  json j = to_json(rep);
  j["system"] = sys.name;
  j["missing_predecessor"] = es.missing_predecessor;
  if (series_only) {
    json g = json::array();
    for (long n : gamma) g.push_back(es.n_min + n);
    write_json(out / "eht.json", {{"chi_hat", rep.chi_hat}, {"times", g}});
  } else {
    {
      auto os = open_out(out / "linear.csv");
      write_linear_csv(os, lin);
    }
    j["L"] = lin.L;
    j["density"] = to_json(verify_via_beta_density(lin, cfg.beta_bar));
    if (cfg.rates && cfg.seeds) {
      ParamSeq p = make_params(cfg, lin, json::object());
      TheoremCReport chk = check_theorem_c(lin, p);
      auto os = open_out(out / "params.csv");
      write_params_csv(os, p, &chk);
      j["theorem_c_ok"] = chk.theorem_c_ok;
    }
    write_json(out / "report.json", j);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  System sys = load_system(cfg);
  LinearData lin = linear_data(cfg, sys);
  json j = to_json(effective_report(lin, cfg.beta_bar.value_or(1.0), cfg.chi_hat));
  j["system"] = sys.name;
  j["L"] = lin.L;
  j["density"] = to_json(verify_via_beta_density(lin, cfg.beta_bar));
  if (cfg.rates && cfg.seeds) {
    TheoremCReport chk = check_theorem_c(lin, make_params(cfg, lin, json::object()));
    j["theorem_c_ok"] = chk.theorem_c_ok;
    j["hp_ok"] = chk.hp_ok;
    if (!chk.theorem_c_ok)
      j["first_failure"] = {{"n", chk.first_failure}, {"condition", chk.first_failure_name}};
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

void dump_family(const PushResult& fam, const fs::path& out) {
  for (std::size_t i = 0; i < fam.manifolds.size(); ++i)
    write_json(out / ("manifold_" + std::to_string(fam.from + static_cast<long>(i)) + ".json"),
               manifold_to_json(fam.manifolds[i]));
  auto os = open_out(out / "transform.csv");
  write_transform_csv(os, fam.reports);
}

int cmd_grow(const RunConfig& cfg, const Args& a, const fs::path& out) {
  System sys = load_system(cfg);
  LinearData lin = linear_data(cfg, sys);
  ParamSeq params = make_params(cfg, lin, cfg.grow);
  const long from = cfg.grow.value("from", lin.n_min);
  const long to = cfg.grow.value("to", params.n_max());
  TransformOptions topt = transform_options(cfg, a, cfg.grow);
  AdmissibleManifold start;
  if (a.seed_manifold == "zero") {
    ClassParams cp = class_at(params, from);
    const auto& sp = sys.split.at(from);
    start = AdmissibleManifold::zero(sp.u_dim(), sp.s_dim(), cp.r,
                                     topt.degree > 0 ? topt.degree : default_degree(sp.u_dim()),
                                     cp);
  } else {
    start = manifold_from_json(read_json(a.seed_manifold));
  }
  PushResult fam = push(sys.seq, sys.split, params, start, from, to, topt);
  dump_family(fam, out);
  json j{{"from", from}, {"to", to}, {"invariance_error", fam.invariance_error}};
  write_json(out / "grow.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_unstable(const RunConfig& cfg, const Args& a, const fs::path& out) {
  System sys = load_system(cfg);
  LinearData lin = linear_data(cfg, sys);
  ParamSeq params = make_params(cfg, lin, cfg.unstable);
  UnstableOptions uo;
  uo.tol = cfg.tolerance("unstable", uo.tol);
  uo.k_max = cfg.unstable.value("k_max", uo.k_max);
  uo.transform = transform_options(cfg, a, cfg.unstable);
  UnstableResult res = unstable_solve(sys.seq, sys.split, params, uo);
  dump_family(res.family, out);
  json hist = json::array();
  for (auto [k, d] : res.history) hist.push_back({{"k", k}, {"change", d}});
  json j{{"K", res.K},
         {"converged", res.converged},
         {"history", hist},
         {"c0_residual", res.c0_residual},
         {"invariance_error", res.invariance_error}};
  write_json(out / "unstable.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

Mat matrix(const json& j) {
  const long rows = static_cast<long>(j.size()), cols = static_cast<long>(j.at(0).size());
  Mat m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  return m;
}

// Close section: {torus_matrix | linear_matrix, x0, p, rates?, r?, degree?, epsilon?}.
int cmd_close(const RunConfig& cfg, const fs::path& out, std::uint64_t seed) {
  const json& c = cfg.close;
  if (!c.contains("x0") || !c.contains("p")) throw ConfigError("close needs x0 and p");
  auto x = c["x0"].get<std::vector<double>>();
  Vec x0 = Eigen::Map<Vec>(x.data(), static_cast<long>(x.size()));
  const long p = c["p"].get<long>();
  OrbitSegment seg;
  if (c.contains("torus_matrix")) {
    seg = torus_segment(matrix(c["torus_matrix"]), x0, p);
  } else if (c.contains("linear_matrix")) {
    Mat A = matrix(c["linear_matrix"]);
    seg = map_segment([A](const Vec& v) -> Vec { return A * v; },
                      [A](const Vec&) -> Mat { return A; }, x0, p, false);
  } else {
    throw ConfigError("close needs torus_matrix or linear_matrix");
  }
  json j{{"seed", seed}};
  if (c.contains("rates")) {
    const json& r = c["rates"];
    // Germs at x_0..x_p need the image of x_p as well.
    std::vector<Vec> pts = seg.points;
    Vec next = seg.f(pts.back());
    if (seg.torus) next -= next.array().floor().matrix();
    pts.push_back(next);
    auto ch = chart_adapter(seg.f, seg.jac, pts, seg.split.at(0).u_dim(), {}, seg.torus, 1.0,
                            0.05, seed);
    CehRates rates{r.at("chi_hat_u"), r.at("chi_hat_s"), r.at("theta_bar"), r.value("L", ch.L)};
    SegmentReport rep = ceh_check(segment_data(ch.seq, seg.split), rates);
    j["segment"] = to_json(rep);
    j["segment"]["M_s_convention"] = "sum over k = n..m-1, maximised over m > n, floored at 0";
  }
  ClosingOptions opt;
  opt.r = c.value("r", opt.r);
  opt.degree = c.value("degree", 0);
  opt.tol = cfg.tolerance("closing", opt.tol);
  opt.epsilon = c.value("epsilon", 0.0);
  j["periodic_point"] = to_json(close_orbit(seg, opt));
  write_json(out / "close.json", j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective hyperbolicity diagnostics and invariant manifolds"};
  app.require_subcommand(1);
  app.fallthrough();  // subcommands inherit this, so it comes first
  Args a;
  app.add_option("--config", a.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", a.out, "output directory");
  app.add_option("--seed", a.seed, "seed for sampling");
  app.add_flag("--strict-class", a.strict_class, "treat class escape as fatal");
  app.add_option("--tol", a.tol, "tolerance override KEY=VAL")->take_all();
  auto* analyze = app.add_subcommand("analyze", "linear data, effective series and report");
  auto* eht = app.add_subcommand("eht", "effective hyperbolic times");
  auto* grow = app.add_subcommand("grow", "push a graph along the window");
  grow->add_option("--manifold", a.seed_manifold, "seed manifold JSON or 'zero'");
  auto* unstable = app.add_subcommand("unstable", "local unstable manifold at index 0");
  auto* close = app.add_subcommand("close", "periodic orbit near a segment");
  auto* report = app.add_subcommand("report", "summary on stdout");
  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(a.config);
    for (const auto& kv : a.tol) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--tol expects KEY=VAL, got " + kv);
      cfg.tol[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    fs::path out(a.out);
    fs::create_directories(out);
    if (*analyze) return cmd_analyze(cfg, out, false);
    if (*eht) return cmd_analyze(cfg, out, true);
    if (*grow) return cmd_grow(cfg, a, out);
    if (*unstable) return cmd_unstable(cfg, a, out);
    if (*close) return cmd_close(cfg, out, a.seed);
    if (*report) return cmd_report(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
