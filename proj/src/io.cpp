#include "rabi/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "rabi/config.hpp"

namespace rabi {

using nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_header(std::ostream& out, const std::string& config_hash) {
  out << "# schema_version: " << kSchemaVersion << '\n';
  out << "# config_hash: " << config_hash << '\n';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord<double>& record, const std::string& config_hash) {
  write_header(out, config_hash);
  out << "t,sx,sy,sz,n_photon,log_norm,leakage\n";
  for (std::size_t i = 0; i < record.size(); ++i) {
    const auto& b = record.bloch[i];
    out << format_number(record.times[i]) << ',' << format_number(b.x) << ',' << format_number(b.y) << ','
        << format_number(b.z) << ',' << format_number(record.photon_expectation[i]) << ','
        << format_number(record.log_norm[i]) << ',' << format_number(record.leakage[i]) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord<double>& record,
                          const std::string& config_hash) {
  auto out = open_for_write(path);
  write_trajectory_csv(out, record, config_hash);
}

void write_csv(std::ostream& out, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows, const std::string& config_hash) {
  write_header(out, config_hash);
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
}

ordered_json json_number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json to_json(const BlochVector<double>& v) { return ordered_json::array({v.x, v.y, v.z}); }

ordered_json to_json(const TrajectoryOutcome& o) {
  ordered_json j;
  j["index"] = o.index;
  j["theta"] = o.initial.theta;
  j["phi"] = o.initial.phi;
  j["cavity_mean"] = o.initial.cavity_mean;
  j["time_to_threshold"] = json_number(o.time_to_threshold);
  j["final_sigma_z"] = json_number(o.final_sigma_z);
  j["final_ground_fidelity"] = json_number(o.final_ground_fidelity);
  j["max_leakage"] = json_number(o.max_leakage);
  j["trusted"] = o.trusted;
  if (!o.error.empty()) j["error"] = o.error;
  return j;
}

ordered_json to_json(const EnsembleSummary& s) {
  ordered_json j;
  j["n_trusted"] = s.n_trusted;
  j["n_untrusted"] = s.n_untrusted;
  j["n_converged"] = s.n_converged;
  j["fraction_converged"] = s.fraction_converged;
  j["max_time_to_threshold"] = json_number(s.max_time_to_threshold);
  j["median_time_to_threshold"] = json_number(s.median_time_to_threshold);
  j["analytic_threshold_time"] = json_number(s.analytic_threshold_time);
  j["envelope_violations"] = s.envelope_violations;
  j["ordering_violations"] = s.ordering_violations;
  j["ordering_severe"] = s.ordering_severe;
  j["reference"] = to_json(s.reference);
  j["reference_fit"] = {{"alpha", s.reference_fit.alpha}, {"rms_residual", s.reference_fit.rms_residual}};
  j["warnings"] = s.warnings;
  ordered_json list = ordered_json::array();
  for (const auto& o : s.trajectories) list.push_back(to_json(o));
  j["trajectories"] = std::move(list);
  return j;
}

void ensure_directory(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace rabi
