#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rabi/drive.hpp"
#include "rabi/hamiltonian.hpp"
#include "rabi/integrator.hpp"

namespace rabi {

enum class CavityPrepKind { coherent, fock_rounded };

inline const char* to_string(CavityPrepKind k) { return k == CavityPrepKind::coherent ? "coherent" : "fock_rounded"; }

/// Random initial conditions (area-uniform on the Bloch sphere, cavity mean photon
/// number uniform in [cavity_mean_lo, cavity_mean_hi]) evolved under one drive.
struct EnsembleSpec {
  int n_samples = 1000;
  std::uint64_t seed = 20240601;
  double cavity_mean_lo = 0.0;
  double cavity_mean_hi = 5.0;
  CavityPrepKind cavity_prep = CavityPrepKind::coherent;
  DriveSpec<double> drive;
  ModelParams<double> params;
  HamiltonianForm form = HamiltonianForm::full_rabi;
  IntegratorConfig<double> integrator;  // sample_times built from t_end / n_time_samples when empty
  double t_end = 0.0;                   // 0 selects 8 / g0
  int n_time_samples = 401;
  double convergence_threshold = -0.99;
  int retain_every = 0;  // keep every k-th trajectory record; 0 keeps none
  int workers = 0;       // 0 selects RABI_WORKERS or the hardware concurrency

  void validate() const;
  /// t_end with the 8 / g0 default applied.
  [[nodiscard]] double resolved_t_end() const;
  [[nodiscard]] IntegratorConfig<double> resolved_integrator() const;
};

struct InitialCondition {
  double theta = 0;
  double phi = 0;
  double cavity_mean = 0;
};

struct TrajectoryOutcome {
  std::size_t index = 0;
  InitialCondition initial;
  double time_to_threshold = std::numeric_limits<double>::infinity();
  double final_sigma_z = 0;
  double final_ground_fidelity = 0;
  double max_leakage = 0;
  bool trusted = false;
  std::string error;  // non-empty when evolve threw

  [[nodiscard]] bool converged() const { return trusted && std::isfinite(time_to_threshold); }
};

struct AlphaFit {
  double alpha = 0;
  double rms_residual = 0;
};

struct EnsembleSummary {
  std::vector<TrajectoryOutcome> trajectories;
  TrajectoryOutcome reference;  // theta = 0, vacuum
  int n_trusted = 0;
  int n_untrusted = 0;
  int n_converged = 0;
  double fraction_converged = 0;
  double max_time_to_threshold = std::numeric_limits<double>::infinity();
  double median_time_to_threshold = std::numeric_limits<double>::infinity();
  AlphaFit reference_fit;
  double analytic_threshold_time = 0;  // instanton with alpha = g0
  int envelope_violations = 0;         // trusted trajectories slower than the analytic instanton
  int ordering_violations = 0;         // trusted trajectories slower than the reference
  int ordering_severe = 0;             // ... by more than 10 %
  std::vector<std::string> warnings;
};

struct EnsembleResult {
  EnsembleSummary summary;
  TrajectoryRecord<double> reference_record;
  std::vector<std::pair<std::size_t, TrajectoryRecord<double>>> retained;
};

std::vector<InitialCondition> sample_initial_conditions(const EnsembleSpec& spec);

/// Worker count: explicit request, else RABI_WORKERS, else hardware concurrency.
int resolve_workers(int requested);

EnsembleResult run_ensemble(const EnsembleSpec& spec);

/// First time <sigma_z> reaches `threshold`, linearly interpolated between samples;
/// +inf when it never does.
double time_to_threshold(const TrajectoryRecord<double>& record, double threshold);

/// One-parameter least-squares fit of sigma_z0 (1 - 2 tanh(alpha t)) over alpha in
/// (0, alpha_max]. Needs at least 20 samples.
AlphaFit fit_alpha(std::span<const double> times, std::span<const double> sigma_z, double alpha_max,
                   double sigma_z0 = 1.0);
AlphaFit fit_alpha(const TrajectoryRecord<double>& record, double alpha_max, double sigma_z0 = 1.0);

/// Median with +inf entries ordered last; +inf when the middle falls on them.
double median(std::vector<double> values);

}  // namespace rabi
