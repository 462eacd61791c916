#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rabi/ensemble.hpp"

namespace rabi {

/// Raised for malformed or invalid configuration; the message names the offending
/// key path (e.g. "drive.g0") or the line of a JSON syntax error.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline constexpr int kSchemaVersion = 1;

/// One run's complete configuration. Required keys: model.omega_0, model.omega_q,
/// model.n_max, drive.g0. Everything else has a default; unknown keys are rejected.
struct RunConfig {
  ModelParams<double> params;
  HamiltonianForm form = HamiltonianForm::full_rabi;
  DriveSpec<double> drive;
  IntegratorConfig<double> integrator;
  double t_end = 0.0;  // 0 selects 8 / g0
  int n_time_samples = 401;
  EnsembleSpec ensemble;  // drive / params / integrator fields are filled from above
  std::string output_dir = "out";

  /// Fully resolved configuration (defaults applied) in canonical key order.
  nlohmann::ordered_json effective;
  /// FNV-1a 64 of effective.dump(), as 16 hex digits.
  std::string hash;

  [[nodiscard]] EnsembleSpec ensemble_spec() const;
  [[nodiscard]] double resolved_t_end() const;
  [[nodiscard]] IntegratorConfig<double> resolved_integrator() const;
};

/// Parses JSON text; syntax errors are reported with line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& source = "config");

/// Applies "dotted.key=value" to a JSON document. The value is parsed as JSON when
/// possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

std::string fnv1a_hex(const std::string& bytes);

}  // namespace rabi
