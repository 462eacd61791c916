#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rabi/ensemble.hpp"

namespace rabi {

/// Shortest round-trip-safe text for a double ("%.17g"); non-finite values print as
/// inf, -inf or nan.
std::string format_number(double v);

/// Trajectory CSV: "# schema_version" and "# config_hash" comment lines, then
/// t,sx,sy,sz,n_photon,log_norm,leakage.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord<double>& record, const std::string& config_hash);
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord<double>& record,
                          const std::string& config_hash);

/// Generic CSV with the same comment header convention.
void write_csv(std::ostream& out, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const std::string& config_hash);

/// Pretty-printed JSON followed by a newline. Infinities and NaNs become null.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

nlohmann::ordered_json to_json(const BlochVector<double>& v);
nlohmann::ordered_json to_json(const TrajectoryOutcome& o);
nlohmann::ordered_json to_json(const EnsembleSummary& s);

/// Number, or null when not finite.
nlohmann::ordered_json json_number(double v);

/// Creates the directory (and parents) if needed.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace rabi
