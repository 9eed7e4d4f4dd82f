#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehyp/closing.hpp"
#include "ehyp/effective.hpp"
#include "ehyp/graph_transform.hpp"
#include "ehyp/rates.hpp"

namespace ehyp {

/// Shortest decimal form that reads back to the same double; "inf", "-inf", "nan".
std::string fmt(double x);

void write_linear_csv(std::ostream& os, const LinearData& lin);
/// Rows n_min..n_min+N; the last row carries only M_n and in_gamma.
void write_series_csv(std::ostream& os, const EffectiveSeries& es, const std::vector<double>& M,
                      const std::vector<long>& gamma);
void write_params_csv(std::ostream& os, const ParamSeq& params, const TheoremCReport* check);
void write_transform_csv(std::ostream& os, const std::vector<TransformStepReport>& reps);

nlohmann::json to_json(const EffectiveReport& r);
nlohmann::json to_json(const DensityReport& r);
nlohmann::json to_json(const SegmentReport& r);
nlohmann::json to_json(const ClosingResult& r);

/// Run configuration read by the command line tool.
struct RunConfig {
  nlohmann::json system;  ///< system descriptor
  std::optional<double> beta_bar, chi_hat;
  std::optional<RateTargets> rates;
  std::optional<Seeds> seeds;  ///< xi and gamma_bar may be zero: searched for
  double holder_radius = 0.1;
  nlohmann::json grow = nlohmann::json::object();
  nlohmann::json unstable = nlohmann::json::object();
  nlohmann::json close = nlohmann::json::object();
  std::filesystem::path base_dir;
  std::map<std::string, double> tol;

  double tolerance(const std::string& key, double def) const;
};

/// Parses a configuration; a string `system` is a path relative to base_dir.
/// Rate targets are validated here.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace ehyp
