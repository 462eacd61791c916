#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <type_traits>

#include "rabi/types.hpp"

namespace rabi {

/// Step-size control for the embedded Dormand-Prince 5(4) pair.
template <typename Scalar = double>
struct StepControl {
  Scalar rel_tol = Scalar(1e-9);
  Scalar abs_tol = Scalar(1e-11);
  Scalar max_step = std::numeric_limits<Scalar>::infinity();
  Scalar initial_step = Scalar(0);  // 0 selects a step from the local derivative
  /// Multiply abs_tol by the current state norm, which makes stepping covariant under
  /// rescaling of a linear ODE's state.
  bool abs_tol_relative_to_norm = false;
  long max_steps = 100'000'000;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  bool stopped_early = false;
};

/// Returned by the per-step hook. `rescale` multiplies the state (and the FSAL
/// derivative, so the hook may only rescale states of homogeneous linear ODEs).
template <typename Scalar>
struct StepDecision {
  Scalar rescale = Scalar(1);
  bool stop = false;
};

namespace detail {

template <typename Scalar>
Scalar magnitude(const Complex<Scalar>& v) {
  return std::abs(v);
}
template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar magnitude(Scalar v) {
  return std::abs(v);
}
template <typename Derived>
auto magnitude(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

template <typename Scalar>
Scalar rms_error(const Complex<Scalar>& err, const Complex<Scalar>& y0, const Complex<Scalar>& y1, Scalar rtol,
                 Scalar atol) {
  return std::abs(err) / (atol + rtol * std::max(std::abs(y0), std::abs(y1)));
}

template <typename Derived, typename Scalar>
Scalar rms_error(const Eigen::MatrixBase<Derived>& err, const Eigen::MatrixBase<Derived>& y0,
                 const Eigen::MatrixBase<Derived>& y1, Scalar rtol, Scalar atol) {
  const auto scale = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  return std::sqrt((err.cwiseAbs().array() / scale).square().mean());
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of dy/dt = f(t, y) through the given
/// sample times. Steps are clipped to land on each sample time exactly.
///
/// rhs(t, y, dydt) writes the derivative; on_sample(index, t, y) fires at each sample
/// time; on_accept(t, y) runs after every accepted step and may rescale or stop.
/// Integration direction follows sign(sample_times.back() - t0); samples must be
/// monotone in that direction. Throws NumericalError on step-size underflow.
template <typename Scalar, typename State, typename Rhs, typename OnSample, typename OnAccept>
IntegrationStats integrate_dopri5(Rhs&& rhs, State& y, Scalar t0, std::span<const Scalar> sample_times,
                                  const StepControl<Scalar>& control, OnSample&& on_sample, OnAccept&& on_accept) {
  require(control.rel_tol > Scalar(0) && control.abs_tol > Scalar(0), "integrate_dopri5: tolerances must be > 0");
  IntegrationStats stats;
  if (sample_times.empty()) return stats;

  const Scalar direction = sample_times.back() >= t0 ? Scalar(1) : Scalar(-1);
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const Scalar prev = i == 0 ? t0 : sample_times[i - 1];
    const bool ordered = i == 0 ? direction * (sample_times[i] - prev) >= Scalar(0)
                                : direction * (sample_times[i] - prev) > Scalar(0);
    require(ordered, "integrate_dopri5: sample times must be strictly monotone away from t0");
  }

  // Dormand & Prince (1980) tableau.
  constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5, c5 = Scalar(8) / 9;
  constexpr Scalar a21 = Scalar(1) / 5;
  constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187, a53 = Scalar(64448) / 6561,
                   a54 = Scalar(-212) / 729;
  constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33, a63 = Scalar(46732) / 5247,
                   a64 = Scalar(49) / 176, a65 = Scalar(-5103) / 18656;
  constexpr Scalar b1 = Scalar(35) / 384, b3 = Scalar(500) / 1113, b4 = Scalar(125) / 192,
                   b5 = Scalar(-2187) / 6784, b6 = Scalar(11) / 84;
  constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695, e4 = Scalar(71) / 1920,
                   e5 = Scalar(-17253) / 339200, e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y, err = y;
  Scalar t = t0;
  std::size_t next = 0;
  while (next < sample_times.size() && sample_times[next] == t) {
    on_sample(next, t, static_cast<const State&>(y));
    ++next;
  }
  if (next == sample_times.size()) return stats;

  auto eval = [&](Scalar tt, const State& yy, State& out) {
    rhs(tt, yy, out);
    ++stats.rhs_evaluations;
  };
  auto atol_now = [&](const State& yy) {
    return control.abs_tol_relative_to_norm ? control.abs_tol * detail::magnitude(yy) : control.abs_tol;
  };

  eval(t, y, k1);

  const Scalar span = std::abs(sample_times.back() - t0);
  const Scalar max_step = std::min(control.max_step, span);
  Scalar h = control.initial_step;
  if (!(h > Scalar(0))) {
    // Hairer, Norsett & Wanner, initial step heuristic (order 5).
    const Scalar scale_norm = Scalar(1) / (atol_now(y) + control.rel_tol * detail::magnitude(y));
    const Scalar d0 = detail::magnitude(y) * scale_norm;
    const Scalar d1 = detail::magnitude(k1) * scale_norm;
    Scalar h0 = (d0 < Scalar(1e-5) || d1 < Scalar(1e-5)) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
    h0 = std::min(h0, max_step);
    ytmp = y + (direction * h0) * k1;
    eval(t + direction * h0, ytmp, k2);
    const Scalar d2 = detail::magnitude(State(k2 - k1)) * scale_norm / h0;
    const Scalar dmax = std::max(d1, d2);
    const Scalar h1 = dmax <= Scalar(1e-15) ? std::max(Scalar(1e-6), h0 * Scalar(1e-3))
                                            : std::pow(Scalar(0.01) / dmax, Scalar(1) / 5);
    h = std::min({Scalar(100) * h0, h1, max_step});
  }
  h = std::min(h, max_step);

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  bool last_rejected = false;
  while (next < sample_times.size()) {
    if (stats.accepted + stats.rejected >= control.max_steps) {
      throw NumericalError("integrate_dopri5: exceeded max_steps at t=" + std::to_string(static_cast<double>(t)));
    }
    const Scalar target = sample_times[next];
    const Scalar remaining = std::abs(target - t);
    const bool clipped = h >= remaining;
    const Scalar h_use = clipped ? remaining : h;
    if (h_use < Scalar(16) * eps * std::max(std::abs(t), Scalar(1))) {
      throw NumericalError("integrate_dopri5: step size underflow at t=" + std::to_string(static_cast<double>(t)) +
                           " (h=" + std::to_string(static_cast<double>(h_use)) + "); problem is stiff or singular");
    }
    const Scalar hs = direction * h_use;

    ytmp = y + (hs * a21) * k1;
    eval(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    eval(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    eval(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    eval(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const Scalar t_new = clipped ? target : t + hs;
    eval(t + hs, ytmp, k6);
    ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    eval(t_new, ynew, k7);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const Scalar err_norm = detail::rms_error(err, y, ynew, control.rel_tol, atol_now(y));
    if (!std::isfinite(err_norm)) {
      throw NumericalError("integrate_dopri5: non-finite error estimate at t=" + std::to_string(static_cast<double>(t)));
    }

    if (err_norm <= Scalar(1)) {
      ++stats.accepted;
      t = t_new;
      std::swap(y, ynew);
      std::swap(k1, k7);
      Scalar factor = err_norm == Scalar(0) ? Scalar(10) : Scalar(0.9) * std::pow(err_norm, Scalar(-0.2));
      factor = std::clamp(factor, Scalar(0.2), last_rejected ? Scalar(1) : Scalar(10));
      const Scalar proposed = std::min(h_use * factor, max_step);
      // A step shortened to hit a sample time should not shrink the next one.
      h = clipped ? std::max(proposed, std::min(h, max_step)) : proposed;
      last_rejected = false;

      const StepDecision<Scalar> decision = on_accept(t, static_cast<const State&>(y));
      if (decision.rescale != Scalar(1)) {
        y *= decision.rescale;
        k1 *= decision.rescale;
      }
      if (clipped) {
        on_sample(next, t, static_cast<const State&>(y));
        ++next;
      }
      if (decision.stop) {
        stats.stopped_early = true;
        return stats;
      }
    } else {
      ++stats.rejected;
      const Scalar factor = std::max(Scalar(0.2), Scalar(0.9) * std::pow(err_norm, Scalar(-0.2)));
      h = h_use * factor;
      last_rejected = true;
    }
  }
  return stats;
}

}  // namespace rabi
