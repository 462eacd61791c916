#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "rabi/types.hpp"

namespace rabi {

template <typename Scalar = double>
struct QuadratureResult {
  Scalar value = 0;
  Scalar error_estimate = 0;
  int intervals = 0;
};

namespace detail {

// 15-point Kronrod nodes on [0, 1] (symmetric) with Kronrod and embedded 7-point Gauss weights.
template <typename Scalar>
struct Kronrod15 {
  static constexpr std::array<Scalar, 8> nodes{
      Scalar(0.991455371120812639206854697526329), Scalar(0.949107912342758524526189684047851),
      Scalar(0.864864423359769072789712788640926), Scalar(0.741531185599394439863864773280788),
      Scalar(0.586087235467691130294144845693013), Scalar(0.405845151377397166906606412076961),
      Scalar(0.207784955007898467600689403773245), Scalar(0.000000000000000000000000000000000)};
  static constexpr std::array<Scalar, 8> kronrod{
      Scalar(0.022935322010529224963732008058970), Scalar(0.063092092629978553290700663189204),
      Scalar(0.104790010322250183839876322541518), Scalar(0.140653259715525918745189590510238),
      Scalar(0.169004726639267902826583426598550), Scalar(0.190350578064785409913256402421014),
      Scalar(0.204432940075298892414161999234649), Scalar(0.209482141084727828012999174891714)};
  // Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
  static constexpr std::array<Scalar, 4> gauss{
      Scalar(0.129484966168869693270611432679082), Scalar(0.279705391489276667901467771423780),
      Scalar(0.381830050505118944950369775488975), Scalar(0.417959183673469387755102040816327)};
};

template <typename Scalar, typename F>
std::pair<Scalar, Scalar> gauss_kronrod15(F& f, Scalar a, Scalar b) {
  using K = Kronrod15<Scalar>;
  const Scalar centre = (a + b) / 2;
  const Scalar half = (b - a) / 2;
  const Scalar fc = f(centre);
  Scalar kronrod = K::kronrod[7] * fc;
  Scalar gauss = K::gauss[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const Scalar dx = half * K::nodes[j];
    const Scalar sum = f(centre - dx) + f(centre + dx);
    kronrod += K::kronrod[j] * sum;
    if (j % 2 == 1) gauss += K::gauss[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <typename Scalar, typename F>
void adapt(F& f, Scalar a, Scalar b, Scalar whole, Scalar err, Scalar tol, int depth, QuadratureResult<Scalar>& out) {
  if (err <= tol || depth == 0) {
    out.value += whole;
    out.error_estimate += err;
    ++out.intervals;
    return;
  }
  const Scalar mid = (a + b) / 2;
  const auto [left, left_err] = gauss_kronrod15(f, a, mid);
  const auto [right, right_err] = gauss_kronrod15(f, mid, b);
  adapt(f, a, mid, left, left_err, tol / 2, depth - 1, out);
  adapt(f, mid, b, right, right_err, tol / 2, depth - 1, out);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) quadrature with recursive bisection.
template <typename Scalar = double, typename F>
QuadratureResult<Scalar> integrate_adaptive(F&& f, Scalar a, Scalar b, Scalar abs_tol = Scalar(1e-13),
                                            int max_depth = 40) {
  require(b > a, "integrate_adaptive: need b > a");
  QuadratureResult<Scalar> out;
  const auto [whole, err] = detail::gauss_kronrod15(f, a, b);
  detail::adapt(f, a, b, whole, err, abs_tol, max_depth, out);
  return out;
}

}  // namespace rabi
