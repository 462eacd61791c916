#include "rabi/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "rabi/analytic.hpp"
#include "rabi/random.hpp"

namespace rabi {

void EnsembleSpec::validate() const {
  require(n_samples >= 1, "ensemble.n_samples must be >= 1");
  require(cavity_mean_lo >= 0.0 && cavity_mean_lo <= cavity_mean_hi,
          "ensemble.cavity_mean_range must satisfy 0 <= lo <= hi");
  require(n_time_samples >= 2, "integrator.n_samples must be >= 2");
  require(convergence_threshold > -1.0 && convergence_threshold < 1.0,
          "ensemble.convergence_threshold must lie in (-1, 1)");
  require(retain_every >= 0, "ensemble.retain_every must be >= 0");
  require(workers >= 0, "ensemble.workers must be >= 0");
  drive.validate();
  params.validate();
  resolved_integrator().validate();
}

double EnsembleSpec::resolved_t_end() const {
  if (t_end > 0.0) return t_end;
  require(drive.g0 > 0.0, "t_end must be given explicitly when g0 = 0");
  return 8.0 / drive.g0;
}

IntegratorConfig<double> EnsembleSpec::resolved_integrator() const {
  IntegratorConfig<double> cfg = integrator;
  if (cfg.sample_times.empty()) {
    cfg.sample_times = IntegratorConfig<double>::linspace(cfg.t_start, cfg.t_start + resolved_t_end(),
                                                          static_cast<std::size_t>(n_time_samples));
  }
  return cfg;
}

std::vector<InitialCondition> sample_initial_conditions(const EnsembleSpec& spec) {
  require(spec.n_samples >= 1, "sample_initial_conditions: n_samples must be >= 1");
  const CounterRng rng(spec.seed);
  std::vector<InitialCondition> out(static_cast<std::size_t>(spec.n_samples));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint64_t base = 3 * static_cast<std::uint64_t>(i);
    const double cos_theta = 1.0 - 2.0 * rng.uniform(base);
    out[i].theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
    out[i].phi = 2.0 * std::numbers::pi * rng.uniform(base + 1);
    out[i].cavity_mean = spec.cavity_mean_lo + (spec.cavity_mean_hi - spec.cavity_mean_lo) * rng.uniform(base + 2);
  }
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RABI_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double time_to_threshold(const TrajectoryRecord<double>& record, double threshold) {
  for (std::size_t i = 0; i < record.size(); ++i) {
    const double z = record.bloch[i].z;
    if (z <= threshold) {
      if (i == 0) return record.times[0];
      const double z_prev = record.bloch[i - 1].z;
      const double w = (z_prev - threshold) / (z_prev - z);
      return record.times[i - 1] + w * (record.times[i] - record.times[i - 1]);
    }
  }
  return std::numeric_limits<double>::infinity();
}

double median(std::vector<double> values) {
  require(!values.empty(), "median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AlphaFit fit_alpha(std::span<const double> times, std::span<const double> sigma_z, double alpha_max,
                   double sigma_z0) {
  require(times.size() == sigma_z.size(), "fit_alpha: times and sigma_z differ in length");
  require(times.size() >= 20, "fit_alpha: need at least 20 samples");
  require(alpha_max > 0.0, "fit_alpha: alpha_max must be > 0");

  auto sse = [&](double alpha) {
    double acc = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double r = sigma_z[i] - instanton_sigma_z(sigma_z0, alpha, times[i]);
      acc += r * r;
    }
    return acc;
  };

  // Coarse scan for the basin, then golden-section refinement inside it.
  constexpr int grid = 400;
  int best = 1;
  double best_value = sse(alpha_max / grid);
  for (int k = 2; k <= grid; ++k) {
    const double v = sse(alpha_max * k / grid);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  double lo = alpha_max * (best - 1) / grid;
  double hi = alpha_max * std::min(best + 1, grid) / grid;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = sse(x1), f2 = sse(x2);
  while (hi - lo > 1e-13 * alpha_max) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = sse(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = sse(x2);
    }
  }
  double alpha = 0.5 * (lo + hi);
  if (alpha <= 0.0) alpha = alpha_max / grid;
  double value = sse(alpha);
  if (best_value < value) {
    alpha = alpha_max * best / grid;
    value = best_value;
  }
  return {alpha, std::sqrt(value / static_cast<double>(times.size()))};
}

AlphaFit fit_alpha(const TrajectoryRecord<double>& record, double alpha_max, double sigma_z0) {
  std::vector<double> z(record.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = record.bloch[i].z;
  return fit_alpha(record.times, z, alpha_max, sigma_z0);
}

namespace {

CavityPrep cavity_for(const EnsembleSpec& spec, double mean) {
  if (spec.cavity_prep == CavityPrepKind::fock_rounded) return FockLevel{static_cast<int>(std::lround(mean))};
  return Coherent{mean};
}

TrajectoryOutcome summarize(std::size_t index, const InitialCondition& ic, const TrajectoryRecord<double>& rec,
                            double threshold) {
  TrajectoryOutcome o;
  o.index = index;
  o.initial = ic;
  o.trusted = rec.trusted;
  o.max_leakage = rec.max_leakage;
  o.time_to_threshold = time_to_threshold(rec, threshold);
  o.final_sigma_z = rec.bloch.back().z;
  o.final_ground_fidelity = 0.5 * (1.0 - o.final_sigma_z);
  return o;
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  const auto conditions = sample_initial_conditions(spec);
  const auto cfg = spec.resolved_integrator();
  const HamiltonianBuilder<double> builder(spec.params, spec.drive, spec.form);
  const auto hamiltonian = SplitHamiltonian<double>::from_builder(builder);
  const double threshold = spec.convergence_threshold;

  EnsembleResult result;
  EnsembleSummary& s = result.summary;

  const double recommended = spec.cavity_mean_hi + 10.0 * std::sqrt(spec.cavity_mean_hi);
  if (spec.params.trunc.n_max < recommended) {
    s.warnings.push_back("n_max=" + std::to_string(spec.params.trunc.n_max) + " is below the recommended " +
                         std::to_string(recommended) + " for cavity means up to " +
                         std::to_string(spec.cavity_mean_hi));
  }

  // Reference trajectory: excited qubit, empty cavity.
  {
    const auto psi0 = prepare_state<double>(0.0, 0.0, Vacuum{}, spec.params.trunc);
    result.reference_record = evolve(psi0, builder, cfg);
    s.reference = summarize(0, InitialCondition{}, result.reference_record, threshold);
    const double alpha_max = spec.drive.g0 > 0.0 ? 10.0 * spec.drive.g0 : 1.0;
    if (result.reference_record.size() >= 20) s.reference_fit = fit_alpha(result.reference_record, alpha_max);
  }

  std::vector<TrajectoryOutcome> outcomes(conditions.size());
  std::vector<std::optional<TrajectoryRecord<double>>> kept(conditions.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next.fetch_add(1); i < conditions.size(); i = next.fetch_add(1)) {
      const auto& ic = conditions[i];
      try {
        const auto psi0 = prepare_state<double>(ic.theta, ic.phi, cavity_for(spec, ic.cavity_mean), spec.params.trunc);
        auto rec = evolve(psi0, hamiltonian, cfg);
        outcomes[i] = summarize(i, ic, rec, threshold);
        if (spec.retain_every > 0 && i % static_cast<std::size_t>(spec.retain_every) == 0) kept[i] = std::move(rec);
      } catch (const std::exception& e) {
        outcomes[i].index = i;
        outcomes[i].initial = ic;
        outcomes[i].trusted = false;
        outcomes[i].error = e.what();
      }
    }
  };
  const int workers = std::min<int>(resolve_workers(spec.workers), static_cast<int>(conditions.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  // Aggregation runs in sample-index order, independent of completion order.
  std::vector<double> trusted_times;
  s.analytic_threshold_time =
      spec.drive.g0 > 0.0 ? instanton_threshold_time(spec.drive.g0, threshold) : std::numeric_limits<double>::infinity();
  const double t_ref = s.reference.time_to_threshold;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (kept[i]) result.retained.emplace_back(i, std::move(*kept[i]));
    if (!o.trusted) {
      ++s.n_untrusted;
      continue;
    }
    ++s.n_trusted;
    trusted_times.push_back(o.time_to_threshold);
    if (o.converged()) ++s.n_converged;
    if (o.time_to_threshold > s.analytic_threshold_time) ++s.envelope_violations;
    if (o.time_to_threshold > t_ref) ++s.ordering_violations;
    if (o.time_to_threshold > 1.1 * t_ref) ++s.ordering_severe;
  }
  s.fraction_converged = s.n_trusted > 0 ? static_cast<double>(s.n_converged) / s.n_trusted : 0.0;
  if (!trusted_times.empty()) {
    s.max_time_to_threshold = *std::max_element(trusted_times.begin(), trusted_times.end());
    s.median_time_to_threshold = median(trusted_times);
  }
  s.trajectories = std::move(outcomes);
  return result;
}

}  // namespace rabi
