#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rabi/commands.hpp"

namespace {

// RABI_WORKERS overrides the config file; --workers overrides both.
void apply_worker_override(rabi::RunConfig& cfg, int workers_flag) {
  if (workers_flag > 0) {
    cfg.ensemble.workers = workers_flag;
  } else if (const char* env = std::getenv("RABI_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) cfg.ensemble.workers = n;
  }
}

rabi::CavityPrep parse_cavity(const std::string& kind, double value) {
  if (kind == "vacuum") return rabi::Vacuum{};
  if (kind == "fock") return rabi::FockLevel{static_cast<int>(value)};
  if (kind == "coherent") return rabi::Coherent{value};
  throw rabi::InvalidArgument("--cavity must be one of vacuum, fock, coherent");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven Rabi-model simulator: trajectories, analytic instanton, ensembles, steering"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  int workers = 0;
  auto add_config_options = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    sub->add_option("--set", overrides, "Override a config key, e.g. --set drive.g0=0.1");
    sub->add_option("-o,--output-dir", output_dir, "Overrides output_dir from the config");
  };

  auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory");
  add_config_options(simulate);
  double theta = 0, phi = 0, cavity_value = 0;
  std::string cavity_kind = "vacuum";
  simulate->add_option("--theta", theta, "Bloch polar angle in [0, pi]");
  simulate->add_option("--phi", phi, "Bloch azimuth in [0, 2 pi)");
  simulate->add_option("--cavity", cavity_kind, "vacuum | fock | coherent")
      ->check(CLI::IsMember({"vacuum", "fock", "coherent"}));
  simulate->add_option("--cavity-value", cavity_value, "Fock level or coherent mean photon number");

  auto* analytic = app.add_subcommand("analytic", "Tabulate the analytic instanton solution");
  double alpha = 1.0, sigma_z0 = 1.0, t_end = 10.0;
  int n_points = 201;
  std::string analytic_dir = "out";
  analytic->add_option("--alpha", alpha, "Effective coupling rate (> 0)")->required();
  analytic->add_option("--sigma-z0", sigma_z0, "Initial <sigma_z>");
  analytic->add_option("--t-end", t_end, "Final time");
  analytic->add_option("--n-points", n_points, "Number of rows");
  analytic->add_option("-o,--output-dir", analytic_dir, "Output directory");

  auto* ensemble = app.add_subcommand("ensemble", "Run a seeded ensemble of random initial states");
  add_config_options(ensemble);
  ensemble->add_option("--workers", workers, "Worker threads (default: RABI_WORKERS, config, or all cores)");

  auto* steer = app.add_subcommand("steer", "Compare the predicted and simulated attractor of an elliptical drive");
  add_config_options(steer);
  double eta = 0, orientation = 0;
  steer->add_option("--eta", eta, "Ellipticity (>= 0)")->required();
  steer->add_option("--Phi", orientation, "Ellipse orientation in radians")->required();

  auto* verify = app.add_subcommand("verify-algebra", "Check the ladder-operator commutators on a truncation");
  int n_max = 10;
  verify->add_option("--n-max", n_max, "Fock cutoff (>= 4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? rabi::kExitOk : rabi::kExitError;
  }

  try {
    auto load = [&]() {
      auto cfg = rabi::load_config(config_path, overrides);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      return cfg;
    };
    if (*simulate) {
      return rabi::cmd_simulate(load(), {theta, phi, parse_cavity(cavity_kind, cavity_value)}, std::cout, std::cerr);
    }
    if (*analytic) return rabi::cmd_analytic(alpha, sigma_z0, t_end, n_points, analytic_dir, std::cout, std::cerr);
    if (*ensemble) {
      auto cfg = load();
      apply_worker_override(cfg, workers);
      return rabi::cmd_ensemble(cfg, std::cout, std::cerr);
    }
    if (*steer) return rabi::cmd_steer(load(), eta, orientation, std::cout, std::cerr);
    if (*verify) return rabi::cmd_verify_algebra(n_max, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return rabi::kExitError;
  }
  return rabi::kExitError;
}
