#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rabi/hamiltonian.hpp"
#include "rabi/hilbert.hpp"
#include "rabi/ode.hpp"

namespace rabi {

/// Lab: integrate psi directly. Interaction: integrate phi = exp(i H_bare t) psi, which
/// removes the fast bare phases from the step-size budget; states are rotated back
/// before any observable is taken, so records are identical up to tolerance.
enum class Frame { lab, interaction };

template <typename Scalar = double>
struct IntegratorConfig {
  Scalar rel_tol = Scalar(1e-9);
  Scalar abs_tol = Scalar(1e-11);
  Scalar max_step = std::numeric_limits<Scalar>::infinity();
  Scalar initial_step = Scalar(0);
  Scalar renormalize_threshold = Scalar(1e3);
  Scalar leakage_threshold = Scalar(1e-6);
  Scalar t_start = Scalar(0);
  std::vector<Scalar> sample_times;
  Frame frame = Frame::interaction;

  void validate() const {
    require(rel_tol > Scalar(0) && abs_tol > Scalar(0), "IntegratorConfig: tolerances must be > 0");
    require(max_step > Scalar(0), "IntegratorConfig: max_step must be > 0");
    require(initial_step >= Scalar(0), "IntegratorConfig: initial_step must be >= 0");
    require(renormalize_threshold > Scalar(1), "IntegratorConfig: renormalize_threshold must be > 1");
    require(!sample_times.empty(), "IntegratorConfig: sample_times must not be empty");
    require(sample_times.front() >= t_start && t_start >= Scalar(0), "IntegratorConfig: sample_times must start >= t_start >= 0");
    for (std::size_t i = 1; i < sample_times.size(); ++i) {
      require(sample_times[i] > sample_times[i - 1], "IntegratorConfig: sample_times must be strictly increasing");
    }
  }

  /// n evenly spaced sample times on [t_start, t_end].
  static std::vector<Scalar> linspace(Scalar t_start, Scalar t_end, std::size_t n) {
    require(n >= 2 && t_end > t_start, "linspace: need n >= 2 and t_end > t_start");
    std::vector<Scalar> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = t_start + (t_end - t_start) * Scalar(i) / Scalar(n - 1);
    out.back() = t_end;
    return out;
  }
};

/// H(t) = diag(bare_diagonal) + coupling(t) * interaction. Anything a
/// HamiltonianBuilder produces has this shape; a general constant matrix fits with a
/// zero diagonal and unit coupling.
template <typename Scalar = double>
struct SplitHamiltonian {
  RealVector<Scalar> bare_diagonal;
  ComplexMatrix<Scalar> interaction;
  std::function<Complex<Scalar>(Scalar)> coupling;

  static SplitHamiltonian from_builder(const HamiltonianBuilder<Scalar>& builder) {
    const DriveSpec<Scalar> drive = builder.drive();
    if (builder.form() == HamiltonianForm::full_rabi) {
      return {builder.bare_diagonal(), builder.interaction(), [drive](Scalar t) { return evaluate_drive(drive, t); }};
    }
    const Complex<Scalar> g0(drive.g0, Scalar(0));
    return {builder.bare_diagonal(), builder.interaction(), [g0](Scalar) { return g0; }};
  }
  static SplitHamiltonian constant(const ComplexMatrix<Scalar>& h) {
    return {RealVector<Scalar>::Zero(h.rows()), h, [](Scalar) { return Complex<Scalar>(1, 0); }};
  }
};

template <typename Scalar = double>
struct TrajectoryRecord {
  std::vector<Scalar> times;
  std::vector<BlochVector<Scalar>> bloch;
  std::vector<Scalar> photon_expectation;
  std::vector<Scalar> log_norm;
  std::vector<Scalar> leakage;
  Scalar max_leakage = 0;
  bool trusted = true;
  IntegrationStats stats;
  CompositeState<Scalar> final_state;
  std::optional<DriveSpec<Scalar>> drive_meta;
  std::optional<ModelParams<Scalar>> params_meta;
  std::optional<HamiltonianForm> form_meta;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

namespace detail {

/// dy/dt for either frame; owns its scratch buffers so each trajectory is independent.
template <typename Scalar>
class SchrodingerRhs {
 public:
  SchrodingerRhs(const SplitHamiltonian<Scalar>& h, Frame frame)
      : h_(h), frame_(frame), phases_(h.bare_diagonal.size()), scratch_(h.bare_diagonal.size()) {}

  void operator()(Scalar t, const ComplexVector<Scalar>& y, ComplexVector<Scalar>& dydt) {
    const Complex<Scalar> minus_i(0, -1);
    const Complex<Scalar> c = h_.coupling(t);
    if (frame_ == Frame::lab) {
      dydt.noalias() = h_.interaction * y;
      dydt *= c;
      dydt += h_.bare_diagonal.template cast<Complex<Scalar>>().cwiseProduct(y);
      dydt *= minus_i;
      return;
    }
    fill_phases(t);  // exp(-i E t)
    scratch_ = phases_.cwiseProduct(y);
    dydt.noalias() = h_.interaction * scratch_;
    dydt = (minus_i * c) * phases_.conjugate().cwiseProduct(dydt);
  }

  /// psi = exp(-i E t) phi
  void to_lab(Scalar t, const ComplexVector<Scalar>& phi, ComplexVector<Scalar>& psi) {
    if (frame_ == Frame::lab) {
      psi = phi;
      return;
    }
    fill_phases(t);
    psi = phases_.cwiseProduct(phi);
  }

  void from_lab(Scalar t, const ComplexVector<Scalar>& psi, ComplexVector<Scalar>& phi) {
    if (frame_ == Frame::lab) {
      phi = psi;
      return;
    }
    fill_phases(t);
    phi = phases_.conjugate().cwiseProduct(psi);
  }

 private:
  void fill_phases(Scalar t) {
    for (Eigen::Index k = 0; k < phases_.size(); ++k) phases_(k) = std::polar(Scalar(1), -h_.bare_diagonal(k) * t);
  }

  const SplitHamiltonian<Scalar>& h_;
  Frame frame_;
  ComplexVector<Scalar> phases_;
  ComplexVector<Scalar> scratch_;
};

template <typename Scalar>
StepControl<Scalar> step_control(const IntegratorConfig<Scalar>& config) {
  StepControl<Scalar> c;
  c.rel_tol = config.rel_tol;
  c.abs_tol = config.abs_tol;
  c.max_step = config.max_step;
  c.initial_step = config.initial_step;
  c.abs_tol_relative_to_norm = true;
  return c;
}

}  // namespace detail

/// Integrates d psi/dt = -i H(t) psi from config.t_start and records observables at
/// every sample time. The raw state is rescaled to unit norm whenever its norm leaves
/// [1/renormalize_threshold, renormalize_threshold]; the discarded factor is kept in
/// log_norm. A record whose top-two-level population ever reaches leakage_threshold
/// is returned with trusted = false.
template <typename Scalar>
TrajectoryRecord<Scalar> evolve(const CompositeState<Scalar>& state0, const SplitHamiltonian<Scalar>& hamiltonian,
                                const IntegratorConfig<Scalar>& config) {
  config.validate();
  const Eigen::Index d = state0.amplitudes.size();
  require(d >= 4 && d % 2 == 0, "evolve: state must live on a composite space (even dimension >= 4)");
  require(hamiltonian.bare_diagonal.size() == d && hamiltonian.interaction.rows() == d &&
              hamiltonian.interaction.cols() == d,
          "evolve: state and Hamiltonian dimensions differ");
  require(state0.raw_norm() > Scalar(0), "evolve: initial state has zero norm");

  TrajectoryRecord<Scalar> rec;
  const std::size_t n = config.sample_times.size();
  rec.times.reserve(n);
  rec.bloch.reserve(n);
  rec.photon_expectation.reserve(n);
  rec.log_norm.reserve(n);
  rec.leakage.reserve(n);

  detail::SchrodingerRhs<Scalar> rhs(hamiltonian, config.frame);
  detail::SchrodingerRhs<Scalar> observer_frame(hamiltonian, config.frame);
  ComplexVector<Scalar> y(d), psi(d);
  rhs.from_lab(config.t_start, state0.amplitudes, y);
  Scalar log_norm = state0.log_norm_accumulated;
  const Scalar thr = config.renormalize_threshold;

  auto on_accept = [&](Scalar, const ComplexVector<Scalar>& yy) {
    StepDecision<Scalar> decision;
    const Scalar norm2 = yy.squaredNorm();
    if (!(norm2 > Scalar(0)) || !std::isfinite(norm2)) throw NumericalError("evolve: state norm collapsed or overflowed");
    const Scalar leak = top_level_leakage(yy);  // frame phases do not change populations
    rec.max_leakage = std::max(rec.max_leakage, leak);
    const Scalar nrm = std::sqrt(norm2);
    if (nrm > thr || nrm < Scalar(1) / thr) {
      decision.rescale = Scalar(1) / nrm;
      log_norm += std::log(nrm);
    }
    return decision;
  };
  auto on_sample = [&](std::size_t, Scalar t, const ComplexVector<Scalar>& yy) {
    observer_frame.to_lab(t, yy, psi);
    const Scalar leak = top_level_leakage(psi);
    rec.max_leakage = std::max(rec.max_leakage, leak);
    rec.times.push_back(t);
    rec.bloch.push_back(bloch_vector(psi));
    rec.photon_expectation.push_back(photon_number(psi));
    rec.log_norm.push_back(log_norm + std::log(psi.norm()));
    rec.leakage.push_back(leak);
  };

  rec.stats = integrate_dopri5<Scalar>(rhs, y, config.t_start, std::span<const Scalar>(config.sample_times),
                                       detail::step_control(config), on_sample, on_accept);

  observer_frame.to_lab(config.sample_times.back(), y, psi);
  rec.final_state.amplitudes = psi;
  rec.final_state.log_norm_accumulated = log_norm;
  rec.trusted = rec.max_leakage < config.leakage_threshold;
  return rec;
}

template <typename Scalar>
TrajectoryRecord<Scalar> evolve(const CompositeState<Scalar>& state0, const HamiltonianBuilder<Scalar>& builder,
                                const IntegratorConfig<Scalar>& config) {
  require(state0.amplitudes.size() == builder.dim(), "evolve: state dimension does not match the truncation");
  const auto split = SplitHamiltonian<Scalar>::from_builder(builder);
  auto rec = evolve(state0, split, config);
  rec.drive_meta = builder.drive();
  rec.params_meta = builder.params();
  rec.form_meta = builder.form();
  return rec;
}

/// Final state of a single propagation from t_from to t_to (either direction).
template <typename Scalar>
CompositeState<Scalar> propagate(const CompositeState<Scalar>& state0, const SplitHamiltonian<Scalar>& hamiltonian,
                                 Scalar t_from, Scalar t_to, const IntegratorConfig<Scalar>& config) {
  require(t_to != t_from, "propagate: t_to must differ from t_from");
  detail::SchrodingerRhs<Scalar> rhs(hamiltonian, config.frame);
  const Eigen::Index d = state0.amplitudes.size();
  ComplexVector<Scalar> y(d), psi(d);
  rhs.from_lab(t_from, state0.amplitudes, y);
  Scalar log_norm = state0.log_norm_accumulated;
  const Scalar thr = config.renormalize_threshold;
  const std::vector<Scalar> target{t_to};
  integrate_dopri5<Scalar>(
      rhs, y, t_from, std::span<const Scalar>(target), detail::step_control(config),
      [](std::size_t, Scalar, const ComplexVector<Scalar>&) {},
      [&](Scalar, const ComplexVector<Scalar>& yy) {
        StepDecision<Scalar> decision;
        const Scalar nrm = yy.norm();
        if (nrm > thr || nrm < Scalar(1) / thr) {
          decision.rescale = Scalar(1) / nrm;
          log_norm += std::log(nrm);
        }
        return decision;
      });
  rhs.to_lab(t_to, y, psi);
  return {psi, log_norm};
}

}  // namespace rabi
