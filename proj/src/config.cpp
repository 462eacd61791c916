#include "rabi/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace rabi {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

/// Typed, path-aware access to one JSON object; remembers which keys were consumed
/// so that leftovers can be rejected.
class Section {
 public:
  Section(const json& doc, std::string path) : path_(std::move(path)) {
    if (!doc.is_object()) throw ConfigError(where() + "expected an object");
    doc_ = &doc;
  }

  [[nodiscard]] bool has(const std::string& key) const { return doc_->contains(key); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = fetch(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_number()) throw ConfigError(path_of(key) + ": expected a number");
    return v->get<double>();
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    const json* v = fetch(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_number_integer()) throw ConfigError(path_of(key) + ": expected an integer");
    const auto value = v->get<std::int64_t>();
    if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
      throw ConfigError(path_of(key) + ": integer out of range");
    }
    return static_cast<int>(value);
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    const json* v = fetch(key, true);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      throw ConfigError(path_of(key) + ": expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = fetch(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_string()) throw ConfigError(path_of(key) + ": expected a string");
    return v->get<std::string>();
  }

  template <typename Enum>
  Enum choice(const std::string& key, std::initializer_list<std::pair<const char*, Enum>> options, Enum fallback) {
    const json* v = fetch(key, true);
    if (!v) return fallback;
    if (v->is_string()) {
      for (const auto& [name, value] : options) {
        if (v->get<std::string>() == name) return value;
      }
    }
    std::string allowed;
    for (const auto& [name, value] : options) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    throw ConfigError(path_of(key) + ": expected one of {" + allowed + "}");
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(doc_->contains(key) ? doc_->at(key) : empty, path_of(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return doc_->at(key);
  }

  void finish() const {
    for (const auto& item : doc_->items()) {
      if (!seen_.count(item.key())) throw ConfigError(path_of(item.key()) + ": unknown key");
    }
  }

  [[nodiscard]] std::string path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "" : path_ + ": "; }

  const json* fetch(const std::string& key, bool optional) {
    seen_.insert(key);
    if (!doc_->contains(key)) {
      if (optional) return nullptr;
      throw ConfigError(path_of(key) + ": missing required key");
    }
    return &doc_->at(key);
  }

  const json* doc_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void check(bool ok, const std::string& path, Fn&& message) {
  if (!ok) throw ConfigError(path + ": " + message());
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key.path=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    if (!node->is_object()) throw ConfigError("override '" + assignment + "': '" + part + "' is not inside an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  Section root(doc, "");
  const int version = root.integer("schema_version", kSchemaVersion);
  check(version == kSchemaVersion, "schema_version", [] { return "unsupported version (expected 1)"; });

  {
    Section m = root.child("model");
    if (!root.has("model")) throw ConfigError("model: missing required key");
    cfg.params.omega_0 = m.number("omega_0");
    check(cfg.params.omega_0 > 0.0, m.path_of("omega_0"), [] { return "must be > 0"; });
    cfg.params.omega_q = m.number("omega_q");
    check(cfg.params.omega_q > 0.0, m.path_of("omega_q"), [] { return "must be > 0"; });
    const int n_max = m.integer("n_max");
    check(n_max >= 1, m.path_of("n_max"), [] { return "must be >= 1"; });
    cfg.params.trunc = FockTruncation(n_max);
    cfg.params.qubit_term =
        m.choice("qubit_term", {{"half", QubitTerm::half}, {"as_printed", QubitTerm::as_printed}}, QubitTerm::half);
    cfg.form = m.choice("form",
                        {{"full_rabi", HamiltonianForm::full_rabi},
                         {"jc", HamiltonianForm::jc},
                         {"anti_jc", HamiltonianForm::anti_jc}},
                        HamiltonianForm::full_rabi);
    m.finish();
  }

  {
    if (!root.has("drive")) throw ConfigError("drive: missing required key");
    Section d = root.child("drive");
    cfg.drive.variant = d.choice("variant",
                                 {{"constant", DriveVariant::constant},
                                  {"circular_pt", DriveVariant::circular_pt},
                                  {"elliptical", DriveVariant::elliptical}},
                                 DriveVariant::circular_pt);
    cfg.drive.g0 = d.number("g0");
    check(cfg.drive.g0 >= 0.0, d.path_of("g0"), [] { return "must be >= 0"; });
    cfg.drive.omega_g = d.number("omega_g", resonance_frequency(cfg.params, ResonanceTarget::anti_jc));
    cfg.drive.phi_x = d.number("phi_x", 0.0);
    cfg.drive.phi_y = d.number("phi_y", 0.0);
    cfg.drive.eta = d.number("eta", 1.0);
    check(cfg.drive.eta >= 0.0, d.path_of("eta"), [] { return "must be >= 0"; });
    cfg.drive.sign = d.choice("sign_convention",
                              {{"exp_minus", SignConvention::exp_minus}, {"exp_plus", SignConvention::exp_plus}},
                              SignConvention::exp_minus);
    d.finish();
  }

  {
    Section in = root.child("integrator");
    auto& ic = cfg.integrator;
    ic.rel_tol = in.number("rel_tol", 1e-9);
    check(ic.rel_tol > 0.0, in.path_of("rel_tol"), [] { return "must be > 0"; });
    ic.abs_tol = in.number("abs_tol", 1e-11);
    check(ic.abs_tol > 0.0, in.path_of("abs_tol"), [] { return "must be > 0"; });
    ic.max_step = in.number("max_step", ic.max_step);
    check(ic.max_step > 0.0, in.path_of("max_step"), [] { return "must be > 0"; });
    ic.initial_step = in.number("initial_step", 0.0);
    check(ic.initial_step >= 0.0, in.path_of("initial_step"), [] { return "must be >= 0"; });
    ic.renormalize_threshold = in.number("renormalize_threshold", 1e3);
    check(ic.renormalize_threshold > 1.0, in.path_of("renormalize_threshold"), [] { return "must be > 1"; });
    ic.leakage_threshold = in.number("leakage_threshold", 1e-6);
    check(ic.leakage_threshold > 0.0, in.path_of("leakage_threshold"), [] { return "must be > 0"; });
    ic.frame = in.choice("frame", {{"interaction", Frame::interaction}, {"lab", Frame::lab}}, Frame::interaction);
    cfg.t_end = in.number("t_end", 0.0);
    check(cfg.t_end >= 0.0, in.path_of("t_end"), [] { return "must be >= 0 (0 selects 8/g0)"; });
    check(cfg.t_end > 0.0 || cfg.drive.g0 > 0.0, in.path_of("t_end"), [] { return "required when drive.g0 = 0"; });
    cfg.n_time_samples = in.integer("n_samples", 401);
    check(cfg.n_time_samples >= 2, in.path_of("n_samples"), [] { return "must be >= 2"; });
    in.finish();
  }

  {
    Section e = root.child("ensemble");
    auto& es = cfg.ensemble;
    es.n_samples = e.integer("n_samples", 1000);
    check(es.n_samples >= 1, e.path_of("n_samples"), [] { return "must be >= 1"; });
    es.seed = e.unsigned64("seed", es.seed);
    if (e.has("cavity_mean_range")) {
      const json& r = e.raw("cavity_mean_range");
      const std::string p = e.path_of("cavity_mean_range");
      check(r.is_array() && r.size() == 2 && r[0].is_number() && r[1].is_number(), p,
            [] { return "expected [lo, hi]"; });
      es.cavity_mean_lo = r[0].get<double>();
      es.cavity_mean_hi = r[1].get<double>();
      check(es.cavity_mean_lo >= 0.0 && es.cavity_mean_lo <= es.cavity_mean_hi, p,
            [] { return "must satisfy 0 <= lo <= hi"; });
    }
    es.cavity_prep = e.choice("cavity_prep_kind",
                              {{"coherent", CavityPrepKind::coherent}, {"fock_rounded", CavityPrepKind::fock_rounded}},
                              CavityPrepKind::coherent);
    es.convergence_threshold = e.number("convergence_threshold", -0.99);
    check(es.convergence_threshold > -1.0 && es.convergence_threshold < 1.0, e.path_of("convergence_threshold"),
          [] { return "must lie in (-1, 1)"; });
    es.retain_every = e.integer("retain_every", 0);
    check(es.retain_every >= 0, e.path_of("retain_every"), [] { return "must be >= 0"; });
    es.workers = e.integer("workers", 0);
    check(es.workers >= 0, e.path_of("workers"), [] { return "must be >= 0"; });
    e.finish();
  }

  cfg.output_dir = root.text("output_dir", "out");
  root.finish();

  ordered_json eff;
  eff["schema_version"] = kSchemaVersion;
  eff["model"] = {{"omega_0", cfg.params.omega_0},
                  {"omega_q", cfg.params.omega_q},
                  {"n_max", cfg.params.trunc.n_max},
                  {"qubit_term", to_string(cfg.params.qubit_term)},
                  {"form", to_string(cfg.form)}};
  eff["drive"] = {{"variant", to_string(cfg.drive.variant)},
                  {"g0", cfg.drive.g0},
                  {"omega_g", cfg.drive.omega_g},
                  {"phi_x", cfg.drive.phi_x},
                  {"phi_y", cfg.drive.phi_y},
                  {"eta", cfg.drive.eta},
                  {"sign_convention", to_string(cfg.drive.sign)}};
  eff["integrator"] = {{"rel_tol", cfg.integrator.rel_tol},
                       {"abs_tol", cfg.integrator.abs_tol},
                       {"max_step", number_or_null(cfg.integrator.max_step)},
                       {"initial_step", cfg.integrator.initial_step},
                       {"renormalize_threshold", cfg.integrator.renormalize_threshold},
                       {"leakage_threshold", cfg.integrator.leakage_threshold},
                       {"frame", cfg.integrator.frame == Frame::interaction ? "interaction" : "lab"},
                       {"t_end", cfg.resolved_t_end()},
                       {"n_samples", cfg.n_time_samples}};
  eff["ensemble"] = {{"n_samples", cfg.ensemble.n_samples},
                     {"seed", cfg.ensemble.seed},
                     {"cavity_mean_range", {cfg.ensemble.cavity_mean_lo, cfg.ensemble.cavity_mean_hi}},
                     {"cavity_prep_kind", to_string(cfg.ensemble.cavity_prep)},
                     {"convergence_threshold", cfg.ensemble.convergence_threshold},
                     {"retain_every", cfg.ensemble.retain_every}};
  // output_dir and workers do not change results, so they stay out of the hash.
  cfg.effective = eff;
  cfg.hash = fnv1a_hex(eff.dump());
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc = parse_json_text(buffer.str(), path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

double RunConfig::resolved_t_end() const { return t_end > 0.0 ? t_end : 8.0 / drive.g0; }

IntegratorConfig<double> RunConfig::resolved_integrator() const {
  IntegratorConfig<double> cfg = integrator;
  cfg.sample_times = IntegratorConfig<double>::linspace(cfg.t_start, cfg.t_start + resolved_t_end(),
                                                        static_cast<std::size_t>(n_time_samples));
  return cfg;
}

EnsembleSpec RunConfig::ensemble_spec() const {
  EnsembleSpec spec = ensemble;
  spec.drive = drive;
  spec.params = params;
  spec.form = form;
  spec.integrator = integrator;
  spec.t_end = resolved_t_end();
  spec.n_time_samples = n_time_samples;
  return spec;
}

}  // namespace rabi
