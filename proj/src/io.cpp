#include "ehyp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "ehyp/errors.hpp"

namespace ehyp {

using nlohmann::json;

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_linear_csv(std::ostream& os, const LinearData& lin) {
  os << "n,lambda_u,lambda_s,theta,beta\n";
  for (std::size_t i = 0; i < lin.size(); ++i) {
    const auto& s = lin.steps[i];
    os << lin.n_min + static_cast<long>(i) << ',' << fmt(s.lambda_u) << ',' << fmt(s.lambda_s)
       << ',' << fmt(s.theta) << ',' << fmt(s.beta) << '\n';
  }
}

void write_series_csv(std::ostream& os, const EffectiveSeries& es, const std::vector<double>& M,
                      const std::vector<long>& gamma) {
  os << "n,delta,lambda_e,beta_flag,M_n,in_gamma\n";
  std::vector<char> in(es.size() + 1, 0);
  for (long g : gamma) in.at(g) = 1;
  for (std::size_t i = 0; i <= es.size(); ++i) {
    os << es.n_min + static_cast<long>(i) << ',';
    if (i < es.size()) {
      const auto& s = es.steps[i];
      os << fmt(s.delta) << ',' << fmt(s.lambda_e) << ',' << (s.beta_flag ? 1 : 0);
    } else {
      os << ",,";
    }
    os << ',' << (i < M.size() ? fmt(M[i]) : "") << ',' << int(in[i]) << '\n';
  }
}

void write_params_csv(std::ostream& os, const ParamSeq& params, const TheoremCReport* check) {
  os << "n,r,tau,sigma,kappa,gamma,c_n,flags\n";
  for (std::size_t i = 0; i < params.steps.size(); ++i) {
    const auto& s = params.steps[i];
    os << params.n_min + static_cast<long>(i) << ',' << fmt(s.r) << ',' << fmt(s.tau) << ','
       << fmt(s.sigma) << ',' << fmt(s.kappa) << ',' << fmt(s.gamma) << ','
       << (i < params.c.size() ? fmt(params.c[i]) : "") << ',';
    if (check && i < check->flags.size()) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%04x", check->flags[i]);
      os << buf;
    }
    os << '\n';
  }
}

void write_transform_csv(std::ostream& os, const std::vector<TransformStepReport>& reps) {
  os << "n,newton_max_iter,newton_max_residual,domain_coverage,class_ok,class_violation,"
        "class_magnitude\n";
  for (const auto& r : reps)
    os << r.n << ',' << r.newton_max_iter << ',' << fmt(r.newton_max_residual) << ','
       << fmt(r.domain_coverage) << ',' << (r.class_ok ? 1 : 0) << ',' << r.class_violation << ','
       << fmt(r.class_magnitude) << '\n';
}

namespace {
// JSON has no infinities; they are written as strings.
json num(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}
}  // namespace

json to_json(const EffectiveReport& r) {
  return {{"chi_e", num(r.chi_e)},       {"chi_g", num(r.chi_g)},
          {"chi_s", num(r.chi_s)},       {"chi_hat", num(r.chi_hat)},
          {"beta_bar", num(r.beta_bar)}, {"density_lb", num(r.density_lb)},
          {"gamma_count", r.gamma_count}, {"effectively_hyperbolic", r.effectively_hyperbolic}};
}

json to_json(const DensityReport& r) {
  return {{"chi_u", num(r.chi_u)},     {"beta_bar", num(r.beta_bar)},
          {"density", num(r.density)}, {"bound", num(r.bound)},
          {"effectively_hyperbolic", r.effectively_hyperbolic}};
}

json to_json(const SegmentReport& r) {
  auto params = [](const CehParams& p) {
    return json{{"M_s", num(p.M_s)}, {"M_u", num(p.M_u)}, {"M_hat_s", num(p.M_hat_s)},
                {"M_hat_u", num(p.M_hat_u)}};
  };
  return {{"minimal", params(r.minimal)}, {"used", params(r.used)},
          {"ms_ok", r.ms_ok},             {"mu_ok", r.mu_ok},
          {"hmu_ok", r.hmu_ok},           {"hms_ok", r.hms_ok},
          {"theta_ok", r.theta_ok},       {"zero_feasible", r.zero_feasible},
          {"verdict", r.verdict}};
}

json to_json(const ClosingResult& r) {
  json ev = json::array();
  for (int i = 0; i < r.eigenvalues.size(); ++i)
    ev.push_back({num(r.eigenvalues(i).real()), num(r.eigenvalues(i).imag())});
  std::vector<double> z(r.z.data(), r.z.data() + r.z.size());
  return {{"z", z},
          {"residual", num(r.residual)},
          {"newton_residuals", r.newton_residuals},
          {"u_changes", r.u_changes},
          {"s_changes", r.s_changes},
          {"predicted_ratio", num(r.predicted_ratio)},
          {"eigenvalues", ev},
          {"hyperbolic", r.hyperbolic},
          {"dist_u", num(r.dist_u)},
          {"dist_s", num(r.dist_s)},
          {"distance_to_x", num(r.distance_to_x)}};
}

double RunConfig::tolerance(const std::string& key, double def) const {
  auto it = tol.find(key);
  return it == tol.end() ? def : it->second;
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  if (!j.contains("system")) throw ConfigError("config needs a system");
  if (j["system"].is_string()) c.system = read_json(base_dir / j["system"].get<std::string>());
  else c.system = j["system"];
  if (j.contains("beta_bar")) c.beta_bar = j["beta_bar"].get<double>();
  if (j.contains("chi_hat")) c.chi_hat = j["chi_hat"].get<double>();
  c.holder_radius = j.value("holder_radius", 0.1);
  if (j.contains("rates")) {
    const json& r = j["rates"];
    RateTargets t{r.at("chi_hat_u"), r.at("chi_bar_u"), r.at("chi_hat_s"), r.at("chi_bar_s")};
    t.validate();
    c.rates = t;
  }
  if (j.contains("seeds")) {
    const json& s = j["seeds"];
    Seeds sd;
    sd.r_bar = s.at("r_bar");
    sd.tau_bar = s.value("tau_bar", 0.0);
    sd.sigma_bar = s.value("sigma_bar", 0.0);
    sd.kappa_bar = s.at("kappa_bar");
    if (s.contains("kappa_hat")) sd.kappa_hat = s["kappa_hat"].get<double>();
    sd.gamma_bar = s.value("gamma_bar", 0.0);
    sd.xi = s.value("xi", 0.0);
    sd.beta_bar = s.value("beta_bar", c.beta_bar.value_or(1.0));
    c.seeds = sd;
  }
  c.grow = j.value("grow", json::object());
  c.unstable = j.value("unstable", json::object());
  c.close = j.value("close", json::object());
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json(path), path.parent_path());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace ehyp
