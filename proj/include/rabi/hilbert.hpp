#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "rabi/types.hpp"

namespace rabi {

/// Highest retained cavity Fock level. The composite space is qubit (x) Fock with
/// dimension 2 * (n_max + 1).
struct FockTruncation {
  int n_max = 1;

  explicit FockTruncation(int levels = 1) : n_max(levels) {
    require(n_max >= 1, "FockTruncation: n_max must be >= 1, got " + std::to_string(n_max));
  }

  [[nodiscard]] Eigen::Index dim() const { return 2 * (static_cast<Eigen::Index>(n_max) + 1); }
  bool operator==(const FockTruncation&) const = default;
};

/// Qubit label inside a composite basis index. Excited carries sigma_z = +1.
enum class Qubit : int { excited = 0, ground = 1 };

/// Composite basis ordering: index = 2 n + s, s = 0 for |e>, s = 1 for |g>.
constexpr Eigen::Index basis_index(int n, Qubit s) {
  return 2 * static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(s);
}

template <typename Scalar>
struct StandardOperators {
  ComplexMatrix<Scalar> a;
  ComplexMatrix<Scalar> a_dagger;
  ComplexMatrix<Scalar> number;
  ComplexMatrix<Scalar> sigma_z;
  ComplexMatrix<Scalar> sigma_plus;
  ComplexMatrix<Scalar> sigma_minus;
  ComplexMatrix<Scalar> sigma_x;
  ComplexMatrix<Scalar> sigma_y;
  ComplexMatrix<Scalar> identity;
};

/// Ladder and Pauli operators on the truncated composite space. The creation
/// operator has a hard cutoff: a_dagger |n_max> = 0.
template <typename Scalar = double>
StandardOperators<Scalar> build_standard_operators(const FockTruncation& trunc) {
  using Mat = ComplexMatrix<Scalar>;
  const Eigen::Index d = trunc.dim();
  StandardOperators<Scalar> ops;
  ops.a = Mat::Zero(d, d);
  ops.number = Mat::Zero(d, d);
  ops.sigma_z = Mat::Zero(d, d);
  ops.sigma_plus = Mat::Zero(d, d);
  for (int n = 0; n <= trunc.n_max; ++n) {
    for (Qubit s : {Qubit::excited, Qubit::ground}) {
      const auto i = basis_index(n, s);
      if (n >= 1) ops.a(basis_index(n - 1, s), i) = std::sqrt(static_cast<Scalar>(n));
      ops.number(i, i) = static_cast<Scalar>(n);
      ops.sigma_z(i, i) = s == Qubit::excited ? Scalar(1) : Scalar(-1);
    }
    ops.sigma_plus(basis_index(n, Qubit::excited), basis_index(n, Qubit::ground)) = Scalar(1);
  }
  ops.a_dagger = ops.a.adjoint();
  ops.sigma_minus = ops.sigma_plus.adjoint();
  ops.sigma_x = ops.sigma_plus + ops.sigma_minus;
  const Complex<Scalar> i_unit(0, 1);
  ops.sigma_y = -i_unit * (ops.sigma_plus - ops.sigma_minus);
  ops.identity = Mat::Identity(d, d);
  return ops;
}

/// Casimir operator C = a a^dagger + (1 - sigma_z)/2 and the normalized ladder
/// pair b = a sigma_- C^{-1/2}, b^dagger = b^H.
template <typename Scalar>
struct CasimirLadder {
  ComplexMatrix<Scalar> casimir;
  ComplexMatrix<Scalar> b;
  ComplexMatrix<Scalar> b_dagger;
};

template <typename Scalar = double>
CasimirLadder<Scalar> build_casimir_ladder(const FockTruncation& trunc) {
  const auto ops = build_standard_operators<Scalar>(trunc);
  const Eigen::Index d = trunc.dim();
  CasimirLadder<Scalar> out;
  // a a^dagger is taken as N + 1 on every level; the truncated matrix product
  // would zero the top level and break positivity.
  out.casimir = ComplexMatrix<Scalar>::Zero(d, d);
  RealVector<Scalar> inv_sqrt(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Scalar n = ops.number(i, i).real();
    const Scalar sz = ops.sigma_z(i, i).real();
    const Scalar c = n + Scalar(1) + (Scalar(1) - sz) / Scalar(2);
    if (!(c > Scalar(0))) throw NumericalError("build_casimir_ladder: non-positive Casimir eigenvalue");
    out.casimir(i, i) = c;
    inv_sqrt(i) = Scalar(1) / std::sqrt(c);
  }
  out.b = (ops.a * ops.sigma_minus) * inv_sqrt.asDiagonal();
  out.b_dagger = out.b.adjoint();
  return out;
}

/// Cavity preparation tensored with the qubit factor in prepare_state.
struct Vacuum {};
struct FockLevel {
  int n = 0;
};
struct Coherent {
  double mean_photons = 0.0;
};
using CavityPrep = std::variant<Vacuum, FockLevel, Coherent>;

/// Amplitude vector plus the log of every norm factor divided out during
/// non-unitary evolution.
template <typename Scalar = double>
struct CompositeState {
  ComplexVector<Scalar> amplitudes;
  Scalar log_norm_accumulated = Scalar(0);

  [[nodiscard]] Scalar raw_norm() const { return amplitudes.norm(); }

  /// log of the norm the state would have without any renormalization.
  [[nodiscard]] Scalar total_log_norm() const { return log_norm_accumulated + std::log(raw_norm()); }

  void renormalize() {
    const Scalar nrm = raw_norm();
    if (!(nrm > Scalar(0)) || !std::isfinite(nrm)) throw NumericalError("CompositeState: cannot renormalize zero or non-finite norm");
    amplitudes /= nrm;
    log_norm_accumulated += std::log(nrm);
  }
};

template <typename Scalar>
Complex<Scalar> expectation(const ComplexMatrix<Scalar>& op, const ComplexVector<Scalar>& psi) {
  require(op.rows() == psi.size() && op.cols() == psi.size(), "expectation: dimension mismatch");
  const Scalar norm2 = psi.squaredNorm();
  if (!(norm2 > Scalar(0))) throw NumericalError("expectation: state has zero norm (numerical collapse)");
  return psi.dot(op * psi) / norm2;
}

/// <psi|op|psi> / <psi|psi>; always norm-divided since evolution need not be unitary.
template <typename Scalar>
Complex<Scalar> expectation(const ComplexMatrix<Scalar>& op, const CompositeState<Scalar>& state) {
  return expectation(op, state.amplitudes);
}

template <typename Scalar = double>
struct BlochVector {
  Scalar x = 0, y = 0, z = 0;

  [[nodiscard]] Scalar norm() const { return std::sqrt(x * x + y * y + z * z); }
  [[nodiscard]] BlochVector normalized() const {
    const Scalar n = norm();
    if (!(n > Scalar(0))) throw NumericalError("BlochVector: cannot normalize zero vector");
    return {x / n, y / n, z / n};
  }
  [[nodiscard]] Scalar dot(const BlochVector& o) const { return x * o.x + y * o.y + z * o.z; }
};

/// Angle between two Bloch directions, in radians.
template <typename Scalar>
Scalar angle_between(const BlochVector<Scalar>& u, const BlochVector<Scalar>& v) {
  const Scalar c = u.normalized().dot(v.normalized());
  return std::acos(std::clamp(c, Scalar(-1), Scalar(1)));
}

/// Qubit observables read directly from the basis layout; equivalent to
/// expectation() with sigma_{x,y,z} but O(dim) instead of O(dim^2).
template <typename Scalar>
BlochVector<Scalar> bloch_vector(const ComplexVector<Scalar>& psi) {
  const Scalar norm2 = psi.squaredNorm();
  if (!(norm2 > Scalar(0))) throw NumericalError("bloch_vector: state has zero norm (numerical collapse)");
  Complex<Scalar> coherence(0, 0);  // sum_n conj(c_{e,n}) c_{g,n} = <sigma_+>
  Scalar pe = 0, pg = 0;
  for (Eigen::Index i = 0; i + 1 < psi.size(); i += 2) {
    coherence += std::conj(psi(i)) * psi(i + 1);
    pe += std::norm(psi(i));
    pg += std::norm(psi(i + 1));
  }
  coherence /= norm2;
  return {Scalar(2) * coherence.real(), Scalar(2) * coherence.imag(), (pe - pg) / norm2};
}

template <typename Scalar>
Scalar photon_number(const ComplexVector<Scalar>& psi) {
  const Scalar norm2 = psi.squaredNorm();
  if (!(norm2 > Scalar(0))) throw NumericalError("photon_number: state has zero norm (numerical collapse)");
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) acc += static_cast<Scalar>(i / 2) * std::norm(psi(i));
  return acc / norm2;
}

/// Normalized population of the two highest Fock levels.
template <typename Scalar>
Scalar top_level_leakage(const ComplexVector<Scalar>& psi) {
  const Eigen::Index d = psi.size();
  const Scalar norm2 = psi.squaredNorm();
  if (!(norm2 > Scalar(0))) throw NumericalError("top_level_leakage: state has zero norm");
  const Eigen::Index start = d - 4;
  return psi.segment(start, d - start).squaredNorm() / norm2;
}

/// Fock amplitudes of a coherent state with real displacement sqrt(mean), truncated
/// at n_max and renormalized. Throws when truncation discards more than 1e-6 of the norm.
template <typename Scalar = double>
RealVector<Scalar> coherent_amplitudes(Scalar mean_photons, int n_max) {
  require(mean_photons >= Scalar(0), "coherent state: mean photon number must be >= 0");
  RealVector<Scalar> c(n_max + 1);
  const Scalar alpha = std::sqrt(mean_photons);
  c(0) = std::exp(-mean_photons / Scalar(2));
  for (int n = 1; n <= n_max; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<Scalar>(n));
  const Scalar kept = c.squaredNorm();
  if (Scalar(1) - kept > Scalar(1e-6)) {
    throw InvalidArgument("coherent state with mean " + std::to_string(static_cast<double>(mean_photons)) +
                          " loses " + std::to_string(static_cast<double>(Scalar(1) - kept)) +
                          " of its norm at n_max=" + std::to_string(n_max) + "; raise n_max");
  }
  return c / std::sqrt(kept);
}

/// Qubit cos(theta/2)|e> + e^{i phi} sin(theta/2)|g> tensored with the cavity preparation.
template <typename Scalar = double>
CompositeState<Scalar> prepare_state(Scalar theta, Scalar phi, const CavityPrep& cavity,
                                     const FockTruncation& trunc) {
  constexpr Scalar pi = Scalar(3.141592653589793238462643383279502884L);
  require(theta >= Scalar(0) && theta <= pi, "prepare_state: theta must lie in [0, pi]");
  require(phi >= Scalar(0) && phi < Scalar(2) * pi, "prepare_state: phi must lie in [0, 2 pi)");

  RealVector<Scalar> fock = RealVector<Scalar>::Zero(trunc.n_max + 1);
  if (std::holds_alternative<Vacuum>(cavity)) {
    fock(0) = 1;
  } else if (const auto* f = std::get_if<FockLevel>(&cavity)) {
    require(f->n >= 0 && f->n <= trunc.n_max, "prepare_state: Fock level outside [0, n_max]");
    fock(f->n) = 1;
  } else {
    fock = coherent_amplitudes<Scalar>(static_cast<Scalar>(std::get<Coherent>(cavity).mean_photons), trunc.n_max);
  }

  const Complex<Scalar> ce(std::cos(theta / 2), 0);
  const Complex<Scalar> cg = std::polar(std::sin(theta / 2), phi);
  CompositeState<Scalar> state;
  state.amplitudes = ComplexVector<Scalar>::Zero(trunc.dim());
  for (int n = 0; n <= trunc.n_max; ++n) {
    state.amplitudes(basis_index(n, Qubit::excited)) = ce * fock(n);
    state.amplitudes(basis_index(n, Qubit::ground)) = cg * fock(n);
  }
  state.amplitudes /= state.amplitudes.norm();
  return state;
}

template <typename Scalar>
ComplexMatrix<Scalar> commutator(const ComplexMatrix<Scalar>& x, const ComplexMatrix<Scalar>& y) {
  return x * y - y * x;
}

/// Frobenius norms of the three su(1,1) commutator defects
///   [sigma_z, b] + 2 b,  [sigma_z, b^dagger] - 2 b^dagger,  [b, b^dagger] - (C^{-1} - 1) sigma_z.
template <typename Scalar = double>
struct AlgebraResiduals {
  Scalar sigma_z_b = 0;
  Scalar sigma_z_b_dagger = 0;
  Scalar b_b_dagger = 0;

  [[nodiscard]] Scalar max() const { return std::max({sigma_z_b, sigma_z_b_dagger, b_b_dagger}); }
};

/// With interior_only, each defect is compressed onto Fock levels 0..n_max-2,
/// where the hard cutoff cannot reach.
template <typename Scalar = double>
AlgebraResiduals<Scalar> algebra_residuals(const FockTruncation& trunc, bool interior_only) {
  const auto ops = build_standard_operators<Scalar>(trunc);
  const auto cl = build_casimir_ladder<Scalar>(trunc);
  const Eigen::Index d = trunc.dim();
  const ComplexMatrix<Scalar> inv_casimir = cl.casimir.diagonal().cwiseInverse().asDiagonal();

  const ComplexMatrix<Scalar> d1 = commutator(ops.sigma_z, cl.b) + Scalar(2) * cl.b;
  const ComplexMatrix<Scalar> d2 = commutator(ops.sigma_z, cl.b_dagger) - Scalar(2) * cl.b_dagger;
  const ComplexMatrix<Scalar> d3 =
      commutator(cl.b, cl.b_dagger) - (inv_casimir - ComplexMatrix<Scalar>::Identity(d, d)) * ops.sigma_z;

  const Eigen::Index keep = interior_only ? d - 4 : d;
  auto block_norm = [keep](const ComplexMatrix<Scalar>& m) { return m.topLeftCorner(keep, keep).norm(); };
  return {block_norm(d1), block_norm(d2), block_norm(d3)};
}

}  // namespace rabi
