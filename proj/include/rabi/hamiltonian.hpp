#pragma once

#include <cmath>

#include "rabi/drive.hpp"
#include "rabi/hilbert.hpp"

namespace rabi {

enum class HamiltonianForm { full_rabi, jc, anti_jc };

inline const char* to_string(HamiltonianForm f) {
  switch (f) {
    case HamiltonianForm::full_rabi: return "full_rabi";
    case HamiltonianForm::jc: return "jc";
    case HamiltonianForm::anti_jc: return "anti_jc";
  }
  return "?";
}

/// H(t) = bare + c(t) * interaction, with both matrices assembled once.
///
///   full_rabi  bare = w0 a^dag a + q sigma_z      interaction = (a^dag + a)(sigma_+ + sigma_-)   c = g(t)
///   jc         bare = w0 a^dag a + q sigma_z      interaction = a^dag sigma_- + a sigma_+        c = g0
///   anti_jc    bare = w0 a a^dag + q sigma_z      interaction = a sigma_- + a^dag sigma_+        c = g0
///
/// where q = wq/2 or wq depending on ModelParams::qubit_term. The bare part is
/// always diagonal in the composite basis.
template <typename Scalar = double>
class HamiltonianBuilder {
 public:
  HamiltonianBuilder(ModelParams<Scalar> params, DriveSpec<Scalar> drive, HamiltonianForm form)
      : params_(params), drive_(drive), form_(form) {
    params_.validate();
    drive_.validate();
    const auto ops = build_standard_operators<Scalar>(params_.trunc);
    const Scalar q = params_.qubit_term == QubitTerm::half ? params_.omega_q / Scalar(2) : params_.omega_q;
    const Eigen::Index d = params_.trunc.dim();

    bare_diagonal_.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      Scalar n = ops.number(i, i).real();
      if (form_ == HamiltonianForm::anti_jc) n += Scalar(1);  // a a^dag = N + 1
      bare_diagonal_(i) = params_.omega_0 * n + q * ops.sigma_z(i, i).real();
    }

    switch (form_) {
      case HamiltonianForm::full_rabi:
        interaction_ = (ops.a_dagger + ops.a) * (ops.sigma_plus + ops.sigma_minus);
        break;
      case HamiltonianForm::jc:
        interaction_ = ops.a_dagger * ops.sigma_minus + ops.a * ops.sigma_plus;
        break;
      case HamiltonianForm::anti_jc:
        interaction_ = ops.a * ops.sigma_minus + ops.a_dagger * ops.sigma_plus;
        break;
    }
  }

  /// Scalar multiplying the interaction matrix at time t.
  [[nodiscard]] Complex<Scalar> coupling(Scalar t) const {
    if (form_ == HamiltonianForm::full_rabi) return evaluate_drive(drive_, t);
    return {drive_.g0, Scalar(0)};
  }

  [[nodiscard]] ComplexMatrix<Scalar> build(Scalar t) const {
    ComplexMatrix<Scalar> h = coupling(t) * interaction_;
    h.diagonal() += bare_diagonal_.template cast<Complex<Scalar>>();
    return h;
  }

  [[nodiscard]] const RealVector<Scalar>& bare_diagonal() const { return bare_diagonal_; }
  [[nodiscard]] const ComplexMatrix<Scalar>& interaction() const { return interaction_; }
  [[nodiscard]] const ModelParams<Scalar>& params() const { return params_; }
  [[nodiscard]] const DriveSpec<Scalar>& drive() const { return drive_; }
  [[nodiscard]] HamiltonianForm form() const { return form_; }
  [[nodiscard]] Eigen::Index dim() const { return params_.trunc.dim(); }

 private:
  ModelParams<Scalar> params_;
  DriveSpec<Scalar> drive_;
  HamiltonianForm form_;
  RealVector<Scalar> bare_diagonal_;
  ComplexMatrix<Scalar> interaction_;
};

template <typename Scalar>
ComplexMatrix<Scalar> build_hamiltonian(const HamiltonianBuilder<Scalar>& builder, Scalar t) {
  return builder.build(t);
}

/// Effective coupling direction of the elliptical drive, g0 (eta cos Phi, eta sin Phi, 1).
template <typename Scalar = double>
struct CouplingVector {
  Scalar x = 0, y = 0, z = 0;

  [[nodiscard]] Scalar norm() const { return std::sqrt(x * x + y * y + z * z); }
  [[nodiscard]] bool is_zero() const { return x == Scalar(0) && y == Scalar(0) && z == Scalar(0); }
};

template <typename Scalar>
CouplingVector<Scalar> effective_coupling_vector(Scalar g0, Scalar eta, Scalar orientation) {
  require(g0 > Scalar(0), "effective_coupling_vector: g0 must be > 0");
  require(eta >= Scalar(0), "effective_coupling_vector: eta must be >= 0");
  return {g0 * eta * std::cos(orientation), g0 * eta * std::sin(orientation), g0};
}

}  // namespace rabi
