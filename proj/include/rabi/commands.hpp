#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rabi/analytic.hpp"
#include "rabi/config.hpp"

namespace rabi {

// Exit codes shared by the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitLeakage = 2;
inline constexpr int kExitNotConverged = 3;

struct SimulateRequest {
  double theta = 0;
  double phi = 0;
  CavityPrep cavity = Vacuum{};
};

/// Writes <output_dir>/trajectory.csv and simulate.json; prints the metadata JSON on `out`.
int cmd_simulate(const RunConfig& config, const SimulateRequest& request, std::ostream& out, std::ostream& err);

struct AnalyticTable {
  std::vector<std::vector<double>> rows;  // t, f1_im, f3, sigma_z_instanton, x_aux, U, V
  EuclideanAction<double> action;
};

inline const std::vector<std::string> kAnalyticColumns = {"t", "f1_im", "f3", "sigma_z_instanton", "x_aux", "U", "V"};

AnalyticTable analytic_table(double alpha, double sigma_z0, double t_end, int n_points);

/// Writes <output_dir>/analytic.csv and analytic.json; prints the JSON line on `out`.
int cmd_analytic(double alpha, double sigma_z0, double t_end, int n_points, const std::filesystem::path& output_dir,
                 std::ostream& out, std::ostream& err);

/// Writes <output_dir>/summary.json, reference.csv and the retained trajectories;
/// exit 0 when every trusted trajectory converged, 3 otherwise.
int cmd_ensemble(const RunConfig& config, std::ostream& out, std::ostream& err);

struct SteerResult {
  BlochVector<double> predicted;
  BlochVector<double> measured;
  double angular_error = 0;
  InitialCondition seed_state;
  bool trusted = false;
};

/// Elliptical drive with phi_x = Phi, phi_y = -Phi. The seed state is the first
/// initial condition drawn from the config's ensemble seed.
SteerResult steer(const RunConfig& config, double eta, double orientation);
int cmd_steer(const RunConfig& config, double eta, double orientation, std::ostream& out, std::ostream& err);

/// Interior-projected and full residuals as JSON on `out`; exit 0 iff the interior
/// residuals are all below 1e-10.
int cmd_verify_algebra(int n_max, std::ostream& out, std::ostream& err);

}  // namespace rabi
