#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "rabi/hamiltonian.hpp"
#include "rabi/hilbert.hpp"
#include "rabi/ode.hpp"
#include "rabi/quadrature.hpp"

namespace rabi {

// ---------------------------------------------------------------------------
// Wei-Norman coefficients of the ordered-exponential propagator
//   U(t) = e^{-i f0 C} e^{-i f1 sigma_z} e^{-i f2 b} e^{-i f3 b^dagger}
// ---------------------------------------------------------------------------

template <typename Scalar = double>
struct WeiNormanCoefficients {
  Scalar alpha = 0;
  Scalar omega_0 = 0;
  std::vector<Scalar> times;
  std::vector<Complex<Scalar>> f0, f1, f2, f3;
};

/// Closed-form coefficients f0 = w0 t, f1 = f2 = i tanh(alpha t), f3 = log cosh(alpha t).
template <typename Scalar>
WeiNormanCoefficients<Scalar> wei_norman_evaluate(Scalar alpha, Scalar omega_0, std::span<const Scalar> times) {
  require(alpha >= Scalar(0), "wei_norman_evaluate: alpha must be >= 0");
  WeiNormanCoefficients<Scalar> c;
  c.alpha = alpha;
  c.omega_0 = omega_0;
  c.times.assign(times.begin(), times.end());
  const Complex<Scalar> i(0, 1);
  for (Scalar t : times) {
    require(t >= Scalar(0), "wei_norman_evaluate: times must be >= 0");
    const Scalar th = std::tanh(alpha * t);
    c.f0.emplace_back(omega_0 * t, Scalar(0));
    c.f1.push_back(i * th);
    c.f2.push_back(i * th);
    // log(cosh^2)/2 written so that large alpha t does not overflow cosh.
    const Scalar x = std::abs(alpha * t);
    c.f3.emplace_back(x + std::log1p(std::exp(Scalar(-2) * x)) - std::log(Scalar(2)), Scalar(0));
  }
  return c;
}

/// Largest |finite-difference derivative - right-hand side| per equation of
///   f0' = w0,  f1' = i a (1 + f1^2),  f2' = i a (1 + f1 f2),  f3' = -i a f2.
template <typename Scalar = double>
struct WeiNormanResidual {
  Scalar f0 = 0, f1 = 0, f2 = 0, f3 = 0;
  [[nodiscard]] Scalar max() const { return std::max({f0, f1, f2, f3}); }
};

/// Three-point derivatives (valid on non-uniform grids) at every interior sample.
template <typename Scalar>
WeiNormanResidual<Scalar> wei_norman_ode_residual(const WeiNormanCoefficients<Scalar>& c) {
  const std::size_t n = c.times.size();
  require(n >= 3 && c.f0.size() == n && c.f1.size() == n && c.f2.size() == n && c.f3.size() == n,
          "wei_norman_ode_residual: need >= 3 samples of every coefficient");
  const Complex<Scalar> ia(0, c.alpha);
  WeiNormanResidual<Scalar> r;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const Scalar h1 = c.times[k] - c.times[k - 1];
    const Scalar h2 = c.times[k + 1] - c.times[k];
    require(h1 > Scalar(0) && h2 > Scalar(0), "wei_norman_ode_residual: times must be strictly increasing");
    const Scalar wm = -h2 / (h1 * (h1 + h2));
    const Scalar w0 = (h2 - h1) / (h1 * h2);
    const Scalar wp = h1 / (h2 * (h1 + h2));
    auto deriv = [&](const std::vector<Complex<Scalar>>& f) { return wm * f[k - 1] + w0 * f[k] + wp * f[k + 1]; };
    r.f0 = std::max(r.f0, std::abs(deriv(c.f0) - Complex<Scalar>(c.omega_0, 0)));
    r.f1 = std::max(r.f1, std::abs(deriv(c.f1) - ia * (Scalar(1) + c.f1[k] * c.f1[k])));
    r.f2 = std::max(r.f2, std::abs(deriv(c.f2) - ia * (Scalar(1) + c.f1[k] * c.f2[k])));
    r.f3 = std::max(r.f3, std::abs(deriv(c.f3) + ia * c.f2[k]));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Instanton trajectory and the phi^4 auxiliary field x = (1 - <sigma_z>)/2
// ---------------------------------------------------------------------------

/// <sigma_z>(t) = sigma_z(0) (1 - 2 tanh(alpha t)), evaluated as written.
template <typename Scalar>
Scalar instanton_sigma_z(Scalar sigma_z0, Scalar alpha, Scalar t) {
  return sigma_z0 * (Scalar(1) - Scalar(2) * std::tanh(alpha * t));
}

/// Time at which instanton_sigma_z(1, alpha, .) first reaches `threshold` (> -1).
template <typename Scalar>
Scalar instanton_threshold_time(Scalar alpha, Scalar threshold) {
  require(alpha > Scalar(0), "instanton_threshold_time: alpha must be > 0");
  require(threshold > Scalar(-1) && threshold < Scalar(1), "instanton_threshold_time: threshold must lie in (-1, 1)");
  return std::atanh((Scalar(1) - threshold) / Scalar(2)) / alpha;
}

/// Solution of x' = alpha (1 - x^2) through x(0) = x0: tanh(alpha t + atanh x0).
template <typename Scalar>
std::vector<Scalar> auxiliary_flow(Scalar x0, Scalar alpha, std::span<const Scalar> times) {
  require(std::abs(x0) <= Scalar(1), "auxiliary_flow: |x0| must be <= 1");
  std::vector<Scalar> out;
  out.reserve(times.size());
  if (std::abs(x0) == Scalar(1)) {
    out.assign(times.size(), x0);
    return out;
  }
  const Scalar shift = std::atanh(x0);
  for (Scalar t : times) out.push_back(std::tanh(alpha * t + shift));
  return out;
}

/// Gradient-flow potential U(x) = -alpha (x - x^3/3), so that x' = -dU/dx.
template <typename Scalar>
Scalar potential_u(Scalar x, Scalar alpha) {
  return -alpha * (x - x * x * x / Scalar(3));
}

/// Euclidean double well V(x) = alpha^2/2 (1 - x^2)^2.
template <typename Scalar>
Scalar potential_v(Scalar x, Scalar alpha) {
  const Scalar w = Scalar(1) - x * x;
  return alpha * alpha / Scalar(2) * w * w;
}

/// Population coordinate of a Bloch z component, (1 - z)/2.
template <typename Scalar>
Scalar population_coordinate(Scalar z) {
  return (Scalar(1) - z) / Scalar(2);
}

/// Polar-cap coordinate sin^2(theta/2) of a Bloch polar angle.
template <typename Scalar>
Scalar polar_cap_coordinate(Scalar theta) {
  const Scalar s = std::sin(theta / Scalar(2));
  return s * s;
}

template <typename Scalar = double>
struct EuclideanAction {
  Scalar closed_form = 0;
  Scalar quadrature = 0;
  Scalar quadrature_error = 0;
};

/// Kink action 4 alpha / 3 together with an adaptive-quadrature evaluation of
/// int_{-1}^{1} sqrt(2 V(x)) dx. Throws if the two disagree by more than 1e-10.
template <typename Scalar>
EuclideanAction<Scalar> euclidean_action(Scalar alpha) {
  require(alpha > Scalar(0), "euclidean_action: alpha must be > 0");
  EuclideanAction<Scalar> s;
  s.closed_form = Scalar(4) * alpha / Scalar(3);
  const auto q = integrate_adaptive<Scalar>(
      [alpha](Scalar x) { return std::sqrt(Scalar(2) * potential_v(x, alpha)); }, Scalar(-1), Scalar(1),
      Scalar(1e-14) * std::max(Scalar(1), alpha));
  s.quadrature = q.value;
  s.quadrature_error = q.error_estimate;
  if (std::abs(s.quadrature - s.closed_form) > Scalar(1e-10) * std::max(Scalar(1), s.closed_form)) {
    throw NumericalError("euclidean_action: closed form and quadrature disagree");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Generalized Riccati flow f' = i az (1 + f^2) - 2 i (ax + i ay) f
// ---------------------------------------------------------------------------

template <typename Scalar>
Complex<Scalar> riccati_rhs(const CouplingVector<Scalar>& a, const Complex<Scalar>& f) {
  const Complex<Scalar> i(0, 1);
  const Complex<Scalar> transverse(a.x, a.y);
  return i * a.z * (Scalar(1) + f * f) - Scalar(2) * i * transverse * f;
}

template <typename Scalar = double>
struct RiccatiTrajectory {
  std::vector<Scalar> times;
  std::vector<Complex<Scalar>> values;
  bool pole = false;
  Scalar pole_time = 0;
};

template <typename Scalar>
StepControl<Scalar> riccati_step_control() {
  StepControl<Scalar> c;
  c.rel_tol = Scalar(1e-11);
  c.abs_tol = Scalar(1e-13);
  return c;
}

/// Riccati solutions may run into movable poles; integration stops once |f| exceeds
/// pole_cutoff and the partial trajectory is returned with pole = true.
template <typename Scalar>
RiccatiTrajectory<Scalar> riccati_evolve(const CouplingVector<Scalar>& alpha, Complex<Scalar> f0,
                                         std::span<const Scalar> times,
                                         const StepControl<Scalar>& control = riccati_step_control<Scalar>(),
                                         Scalar pole_cutoff = Scalar(1e8)) {
  require(!alpha.is_zero(), "riccati_evolve: coupling vector must be nonzero");
  require(!times.empty(), "riccati_evolve: need at least one time");
  RiccatiTrajectory<Scalar> out;
  Complex<Scalar> f = f0;
  const Scalar t0 = times.front();
  integrate_dopri5<Scalar>(
      [&alpha](Scalar, const Complex<Scalar>& y, Complex<Scalar>& dy) { dy = riccati_rhs(alpha, y); }, f, t0, times,
      control,
      [&out](std::size_t, Scalar t, const Complex<Scalar>& y) {
        out.times.push_back(t);
        out.values.push_back(y);
      },
      [&out, pole_cutoff](Scalar t, const Complex<Scalar>& y) {
        StepDecision<Scalar> d;
        if (!(std::abs(y) <= pole_cutoff)) {
          out.pole = true;
          out.pole_time = t;
          d.stop = true;
        }
        return d;
      });
  return out;
}

enum class Stability { stable, unstable, marginal };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

template <typename Scalar = double>
struct RiccatiFixedPoint {
  Complex<Scalar> value;
  /// d(f')/df at the root; its real part decides linear stability.
  Complex<Scalar> linearization;
  Stability stability = Stability::marginal;
};

/// Roots of az f^2 - 2 (ax + i ay) f + az = 0, deduplicated; f = 0 when az = 0.
template <typename Scalar>
std::vector<RiccatiFixedPoint<Scalar>> riccati_fixed_points(const CouplingVector<Scalar>& a) {
  require(!a.is_zero(), "riccati_fixed_points: coupling vector must be nonzero");
  const Complex<Scalar> i(0, 1);
  const Complex<Scalar> transverse(a.x, a.y);
  std::vector<Complex<Scalar>> roots;
  if (a.z == Scalar(0)) {
    roots.emplace_back(Scalar(0), Scalar(0));
  } else {
    // Cancellation-free quadratic formula for A f^2 + B f + C with A = C = az.
    const Complex<Scalar> A(a.z, 0), B = Scalar(-2) * transverse, C(a.z, 0);
    const Complex<Scalar> disc = B * B - Scalar(4) * A * C;
    Complex<Scalar> s = std::sqrt(disc);
    if ((std::conj(B) * s).real() < Scalar(0)) s = -s;
    const Scalar scale = std::norm(B) + std::norm(A);
    if (std::abs(disc) <= Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale) {
      roots.push_back(-B / (Scalar(2) * A));
    } else {
      const Complex<Scalar> q = Scalar(-0.5) * (B + s);
      roots.push_back(q / A);
      roots.push_back(C / q);
    }
  }

  const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), a.norm());
  std::vector<RiccatiFixedPoint<Scalar>> out;
  for (const auto& r : roots) {
    RiccatiFixedPoint<Scalar> fp;
    fp.value = r;
    fp.linearization = Scalar(2) * i * a.z * r - Scalar(2) * i * transverse;
    if (fp.linearization.real() < -tol) {
      fp.stability = Stability::stable;
    } else if (fp.linearization.real() > tol) {
      fp.stability = Stability::unstable;
    } else {
      fp.stability = Stability::marginal;
    }
    out.push_back(fp);
  }
  return out;
}

/// Attractor predicted by the coupling direction, -alpha / |alpha|.
template <typename Scalar>
BlochVector<Scalar> attractor_direction(const CouplingVector<Scalar>& a) {
  require(!a.is_zero(), "attractor_direction: coupling vector must be nonzero");
  const Scalar n = a.norm();
  return {-a.x / n, -a.y / n, -a.z / n};
}

}  // namespace rabi
