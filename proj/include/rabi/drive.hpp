#pragma once

#include <cmath>
#include <string>

#include "rabi/hilbert.hpp"
#include "rabi/types.hpp"

namespace rabi {

enum class DriveVariant { constant, circular_pt, elliptical };

/// exp_minus: circular drive g0 e^{-i wg t}; exp_plus: g0 e^{+i wg t}.
enum class SignConvention { exp_minus, exp_plus };

/// Complex time-dependent Rabi coupling g(t).
///
///   constant     g(t) = g0
///   circular_pt  g(t) = g0 exp(-/+ i wg t)
///   elliptical   g(t) = g0 [cos(wg t + phi_x) + i eta sin(wg t + phi_y)], conjugated under
///                exp_minus so that eta = 1, phi_x = phi_y = 0 reduces to the circular drive.
template <typename Scalar = double>
struct DriveSpec {
  DriveVariant variant = DriveVariant::circular_pt;
  Scalar g0 = Scalar(0.05);
  Scalar omega_g = Scalar(10);
  Scalar phi_x = Scalar(0);
  Scalar phi_y = Scalar(0);
  Scalar eta = Scalar(1);
  SignConvention sign = SignConvention::exp_minus;

  /// Ellipse orientation Phi = (phi_x - phi_y) / 2.
  [[nodiscard]] Scalar orientation() const { return (phi_x - phi_y) / Scalar(2); }

  /// g0 = 0 is accepted as the undriven limit.
  void validate() const {
    require(g0 >= Scalar(0) && std::isfinite(g0), "DriveSpec: g0 must be finite and >= 0");
    require(eta >= Scalar(0) && std::isfinite(eta), "DriveSpec: eta must be finite and >= 0");
    require(std::isfinite(omega_g) && std::isfinite(phi_x) && std::isfinite(phi_y), "DriveSpec: non-finite parameter");
  }
};

/// How the bare qubit energy enters the Hamiltonian. `half` uses (wq/2) sigma_z so the
/// qubit splitting is wq; `as_printed` uses wq sigma_z (splitting 2 wq).
enum class QubitTerm { half, as_printed };

template <typename Scalar = double>
struct ModelParams {
  Scalar omega_0 = Scalar(5);
  Scalar omega_q = Scalar(5);
  FockTruncation trunc{30};
  QubitTerm qubit_term = QubitTerm::half;

  void validate() const {
    require(omega_0 > Scalar(0) && std::isfinite(omega_0), "ModelParams: omega_0 must be > 0");
    require(omega_q > Scalar(0) && std::isfinite(omega_q), "ModelParams: omega_q must be > 0");
  }
};

template <typename Scalar>
Complex<Scalar> evaluate_drive(const DriveSpec<Scalar>& spec, Scalar t) {
  switch (spec.variant) {
    case DriveVariant::constant:
      return {spec.g0, Scalar(0)};
    case DriveVariant::circular_pt: {
      const Scalar phase = spec.sign == SignConvention::exp_minus ? -spec.omega_g * t : spec.omega_g * t;
      return std::polar(spec.g0, phase);
    }
    case DriveVariant::elliptical: {
      const Complex<Scalar> g(spec.g0 * std::cos(spec.omega_g * t + spec.phi_x),
                              spec.g0 * spec.eta * std::sin(spec.omega_g * t + spec.phi_y));
      return spec.sign == SignConvention::exp_minus ? std::conj(g) : g;
    }
  }
  return {};
}

enum class ResonanceTarget { jc, anti_jc };

/// Drive frequency that makes the co-rotating (jc) or counter-rotating (anti_jc)
/// interaction terms stationary: w0 - wq or w0 + wq.
template <typename Scalar>
Scalar resonance_frequency(const ModelParams<Scalar>& params, ResonanceTarget target) {
  return target == ResonanceTarget::anti_jc ? params.omega_0 + params.omega_q : params.omega_0 - params.omega_q;
}

inline const char* to_string(DriveVariant v) {
  switch (v) {
    case DriveVariant::constant: return "constant";
    case DriveVariant::circular_pt: return "circular_pt";
    case DriveVariant::elliptical: return "elliptical";
  }
  return "?";
}

inline const char* to_string(SignConvention s) { return s == SignConvention::exp_minus ? "exp_minus" : "exp_plus"; }

inline const char* to_string(QubitTerm q) { return q == QubitTerm::half ? "half" : "as_printed"; }

}  // namespace rabi
