#include "rabi/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "rabi/io.hpp"
#include "rabi/random.hpp"

namespace rabi {

using nlohmann::ordered_json;

namespace {

ordered_json envelope(const std::string& command, const std::string& hash) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config_hash"] = hash;
  return j;
}

ordered_json cavity_json(const CavityPrep& cavity) {
  if (std::holds_alternative<Vacuum>(cavity)) return {{"kind", "vacuum"}};
  if (const auto* f = std::get_if<FockLevel>(&cavity)) return {{"kind", "fock"}, {"n", f->n}};
  return {{"kind", "coherent"}, {"mean_photons", std::get<Coherent>(cavity).mean_photons}};
}

ordered_json stats_json(const IntegrationStats& s) {
  return {{"accepted", s.accepted}, {"rejected", s.rejected}, {"rhs_evaluations", s.rhs_evaluations}};
}

}  // namespace

int cmd_simulate(const RunConfig& config, const SimulateRequest& request, std::ostream& out, std::ostream& err) {
  const HamiltonianBuilder<double> builder(config.params, config.drive, config.form);
  const auto psi0 = prepare_state<double>(request.theta, request.phi, request.cavity, config.params.trunc);
  const auto rec = evolve(psi0, builder, config.resolved_integrator());

  ordered_json inputs = config.effective;
  inputs["initial"] = {{"theta", request.theta}, {"phi", request.phi}, {"cavity", cavity_json(request.cavity)}};
  const std::string hash = fnv1a_hex(inputs.dump());

  const std::filesystem::path dir(config.output_dir);
  write_trajectory_csv(dir / "trajectory.csv", rec, hash);

  ordered_json meta = envelope("simulate", hash);
  meta["config"] = inputs;
  meta["trusted"] = rec.trusted;
  meta["max_leakage"] = rec.max_leakage;
  meta["final_bloch"] = to_json(rec.bloch.back());
  meta["final_photon_number"] = rec.photon_expectation.back();
  meta["final_log_norm"] = rec.log_norm.back();
  meta["time_to_threshold"] = json_number(time_to_threshold(rec, config.ensemble.convergence_threshold));
  if (rec.size() >= 20 && rec.bloch.front().z > 0.99 && config.drive.g0 > 0.0) {
    const auto fit = fit_alpha(rec, 10.0 * config.drive.g0);
    meta["fit_alpha"] = {{"alpha", fit.alpha}, {"rms_residual", fit.rms_residual}};
  }
  meta["stats"] = stats_json(rec.stats);
  meta["trajectory_csv"] = (dir / "trajectory.csv").string();
  write_json(dir / "simulate.json", meta);
  out << meta.dump() << '\n';

  if (!rec.trusted) {
    err << "warning: truncation leakage " << format_number(rec.max_leakage) << " exceeds "
        << format_number(config.integrator.leakage_threshold) << "; trajectory not trusted\n";
    return kExitLeakage;
  }
  return kExitOk;
}

AnalyticTable analytic_table(double alpha, double sigma_z0, double t_end, int n_points) {
  require(alpha > 0.0 && std::isfinite(alpha), "analytic: alpha must be > 0");
  require(sigma_z0 >= -1.0 && sigma_z0 <= 1.0, "analytic: sigma_z0 must lie in [-1, 1]");
  require(t_end > 0.0 && std::isfinite(t_end), "analytic: t_end must be > 0");
  require(n_points >= 2, "analytic: n_points must be >= 2");

  std::vector<double> times(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) times[k] = t_end * k / (n_points - 1);
  const auto wn = wei_norman_evaluate<double>(alpha, 0.0, times);
  const auto x = auxiliary_flow<double>(population_coordinate(sigma_z0), alpha, times);

  AnalyticTable table;
  table.rows.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    table.rows.push_back({times[k], wn.f1[k].imag(), wn.f3[k].real(), instanton_sigma_z(sigma_z0, alpha, times[k]),
                          x[k], potential_u(x[k], alpha), potential_v(x[k], alpha)});
  }
  table.action = euclidean_action(alpha);
  return table;
}

int cmd_analytic(double alpha, double sigma_z0, double t_end, int n_points, const std::filesystem::path& output_dir,
                 std::ostream& out, std::ostream&) {
  const auto table = analytic_table(alpha, sigma_z0, t_end, n_points);
  ordered_json inputs = {{"alpha", alpha}, {"sigma_z0", sigma_z0}, {"t_end", t_end}, {"n_points", n_points}};
  const std::string hash = fnv1a_hex(inputs.dump());

  ensure_directory(output_dir);
  {
    std::ofstream csv(output_dir / "analytic.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + (output_dir / "analytic.csv").string());
    write_csv(csv, kAnalyticColumns, table.rows, hash);
  }
  ordered_json meta = envelope("analytic", hash);
  meta["inputs"] = inputs;
  meta["S_E"] = table.action.closed_form;
  meta["S_E_quadrature"] = table.action.quadrature;
  meta["csv"] = (output_dir / "analytic.csv").string();
  write_json(output_dir / "analytic.json", meta);
  out << meta.dump() << '\n';
  return kExitOk;
}

int cmd_ensemble(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const EnsembleSpec spec = config.ensemble_spec();
  const auto result = run_ensemble(spec);
  const auto& s = result.summary;
  for (const auto& w : s.warnings) err << "warning: " << w << '\n';
  if (s.n_untrusted > 0) err << "warning: " << s.n_untrusted << " trajectories excluded (leakage or error)\n";

  const std::filesystem::path dir(config.output_dir);
  ordered_json doc = envelope("ensemble", config.hash);
  doc["config"] = config.effective;
  doc["rng"] = {{"name", CounterRng::name}, {"version", CounterRng::version}, {"seed", spec.seed}};
  doc["summary"] = to_json(s);
  write_json(dir / "summary.json", doc);
  write_trajectory_csv(dir / "reference.csv", result.reference_record, config.hash);
  for (const auto& [index, rec] : result.retained) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%06zu.csv", index);
    write_trajectory_csv(dir / "trajectories" / name, rec, config.hash);
  }

  const int code = s.n_trusted > 0 && s.n_converged == s.n_trusted ? kExitOk : kExitNotConverged;
  ordered_json line = envelope("ensemble", config.hash);
  line["summary_json"] = (dir / "summary.json").string();
  line["n_trusted"] = s.n_trusted;
  line["n_untrusted"] = s.n_untrusted;
  line["fraction_converged"] = s.fraction_converged;
  line["median_time_to_threshold"] = json_number(s.median_time_to_threshold);
  line["reference_fit"] = {{"alpha", s.reference_fit.alpha}, {"rms_residual", s.reference_fit.rms_residual}};
  out << line.dump() << '\n';
  return code;
}

SteerResult steer(const RunConfig& config, double eta, double orientation) {
  require(eta >= 0.0 && std::isfinite(eta), "steer: eta must be >= 0");
  require(std::isfinite(orientation), "steer: Phi must be finite");
  DriveSpec<double> drive = config.drive;
  drive.variant = DriveVariant::elliptical;
  drive.eta = eta;
  drive.phi_x = orientation;
  drive.phi_y = -orientation;

  SteerResult r;
  r.predicted = attractor_direction(effective_coupling_vector(drive.g0, eta, drive.orientation()));

  EnsembleSpec seed_spec = config.ensemble_spec();
  seed_spec.n_samples = 1;
  r.seed_state = sample_initial_conditions(seed_spec).front();
  const CavityPrep cavity = config.ensemble.cavity_prep == CavityPrepKind::fock_rounded
                                ? CavityPrep{FockLevel{static_cast<int>(std::lround(r.seed_state.cavity_mean))}}
                                : CavityPrep{Coherent{r.seed_state.cavity_mean}};
  const auto psi0 = prepare_state<double>(r.seed_state.theta, r.seed_state.phi, cavity, config.params.trunc);
  const HamiltonianBuilder<double> builder(config.params, drive, config.form);
  const auto rec = evolve(psi0, builder, config.resolved_integrator());
  r.trusted = rec.trusted;

  const std::size_t n = rec.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  BlochVector<double> mean;
  for (std::size_t i = n - tail; i < n; ++i) {
    mean.x += rec.bloch[i].x;
    mean.y += rec.bloch[i].y;
    mean.z += rec.bloch[i].z;
  }
  r.measured = mean.normalized();
  r.angular_error = angle_between(r.predicted, r.measured);
  return r;
}

int cmd_steer(const RunConfig& config, double eta, double orientation, std::ostream& out, std::ostream& err) {
  const auto r = steer(config, eta, orientation);
  ordered_json inputs = config.effective;
  inputs["steer"] = {{"eta", eta}, {"Phi", orientation}};
  const std::string hash = fnv1a_hex(inputs.dump());

  ordered_json doc = envelope("steer", hash);
  doc["config"] = inputs;
  doc["predicted_attractor"] = to_json(r.predicted);
  doc["measured_attractor"] = to_json(r.measured);
  doc["angular_error"] = r.angular_error;
  doc["seed_state"] = {
      {"theta", r.seed_state.theta}, {"phi", r.seed_state.phi}, {"cavity_mean", r.seed_state.cavity_mean}};
  doc["trusted"] = r.trusted;
  write_json(std::filesystem::path(config.output_dir) / "steer.json", doc);
  out << doc.dump() << '\n';
  if (!r.trusted) {
    err << "warning: truncation leakage exceeded the threshold; measured attractor not trusted\n";
    return kExitLeakage;
  }
  return kExitOk;
}

int cmd_verify_algebra(int n_max, std::ostream& out, std::ostream& err) {
  require(n_max >= 4, "verify-algebra: n_max must be >= 4");
  const FockTruncation trunc(n_max);
  const auto interior = algebra_residuals<double>(trunc, true);
  const auto full = algebra_residuals<double>(trunc, false);
  auto residual_json = [](const AlgebraResiduals<double>& r) {
    return ordered_json{{"sigma_z_b", r.sigma_z_b}, {"sigma_z_b_dagger", r.sigma_z_b_dagger}, {"b_b_dagger", r.b_b_dagger}};
  };
  const ordered_json inputs = {{"n_max", n_max}};
  ordered_json doc = envelope("verify-algebra", fnv1a_hex(inputs.dump()));
  doc["n_max"] = n_max;
  doc["interior"] = residual_json(interior);
  doc["full"] = residual_json(full);
  doc["tolerance"] = 1e-10;
  const bool ok = interior.max() < 1e-10;
  doc["pass"] = ok;
  out << doc.dump() << '\n';
  if (!ok) err << "algebra residual " << format_number(interior.max()) << " exceeds 1e-10\n";
  return ok ? kExitOk : kExitError;
}

}  // namespace rabi
