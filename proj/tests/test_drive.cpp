#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "rabi/drive.hpp"

using namespace rabi;
using std::numbers::pi;

TEST_CASE("circular drive starts real") {
  DriveSpec<double> d;
  d.g0 = 1.0;
  d.omega_g = 2.0;
  const auto g = evaluate_drive(d, 0.0);
  CHECK(g.real() == 1.0);
  CHECK(g.imag() == 0.0);
}

TEST_CASE("quarter period of the exp_minus drive") {
  DriveSpec<double> d;
  d.g0 = 1.0;
  for (double w : {0.7, 10.0, 123.0}) {
    d.omega_g = w;
    const auto g = evaluate_drive(d, pi / (2 * w));
    CHECK(std::abs(g.real()) < 1e-15);
    CHECK(g.imag() == doctest::Approx(-1.0).epsilon(1e-15));
  }
  d.sign = SignConvention::exp_plus;
  CHECK(evaluate_drive(d, pi / (2 * d.omega_g)).imag() == doctest::Approx(1.0));
}

TEST_CASE("elliptical drive with exp_plus and zero phases is e^{+i w t}") {
  DriveSpec<double> d;
  d.variant = DriveVariant::elliptical;
  d.g0 = 1.0;
  d.omega_g = 3.0;
  d.sign = SignConvention::exp_plus;
  for (double t : {0.0, 0.1, 1.7, 22.0}) {
    const auto g = evaluate_drive(d, t);
    CHECK(std::abs(g - std::polar(1.0, 3.0 * t)) < 1e-15);
  }
}

TEST_CASE("elliptical drive reduces to the active circular convention") {
  for (auto sign : {SignConvention::exp_minus, SignConvention::exp_plus}) {
    DriveSpec<double> circ;
    circ.g0 = 0.3;
    circ.omega_g = 4.0;
    circ.sign = sign;
    DriveSpec<double> ell = circ;
    ell.variant = DriveVariant::elliptical;
    for (double t = 0; t < 5; t += 0.37) CHECK(std::abs(evaluate_drive(circ, t) - evaluate_drive(ell, t)) < 1e-15);
  }
}

TEST_CASE("constant drive ignores frequency, phases and eta") {
  DriveSpec<double> d;
  d.variant = DriveVariant::constant;
  d.g0 = 0.4;
  d.omega_g = 99;
  d.phi_x = 1;
  d.eta = 3;
  CHECK(evaluate_drive(d, 12.3) == std::complex<double>(0.4, 0.0));
}

TEST_CASE("circular drive has constant modulus") {
  DriveSpec<double> d;
  d.g0 = 0.05;
  for (double t = 0; t < 50; t += 0.113) CHECK(std::abs(evaluate_drive(d, t)) == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("elliptical modulus oscillates between g0 min(1, eta) and g0 max(1, eta)") {
  for (double eta : {0.0, 0.3, 1.0, 2.5}) {
    CAPTURE(eta);
    DriveSpec<double> d;
    d.variant = DriveVariant::elliptical;
    d.g0 = 2.0;
    d.eta = eta;
    d.omega_g = 1.0;
    double lo = 1e300, hi = 0;
    const int n = 20000;
    for (int k = 0; k <= n; ++k) {
      const double m = std::abs(evaluate_drive(d, 2 * pi * k / n));
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
    CHECK(lo == doctest::Approx(2.0 * std::min(1.0, eta)).epsilon(1e-6));
    CHECK(hi == doctest::Approx(2.0 * std::max(1.0, eta)).epsilon(1e-6));
  }
}

TEST_CASE("orientation is derived from the two phases") {
  DriveSpec<double> d;
  d.phi_x = 0.9;
  d.phi_y = -0.3;
  CHECK(d.orientation() == doctest::Approx(0.6));
}

TEST_CASE("resonance frequencies") {
  ModelParams<double> p;
  p.omega_0 = 5;
  p.omega_q = 5;
  CHECK(resonance_frequency(p, ResonanceTarget::anti_jc) == 10.0);
  CHECK(resonance_frequency(p, ResonanceTarget::jc) == 0.0);
  p.omega_0 = 6;
  p.omega_q = 4;
  CHECK(resonance_frequency(p, ResonanceTarget::jc) == 2.0);
}

TEST_CASE("validation") {
  DriveSpec<double> d;
  d.eta = -1;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d.eta = 1;
  d.g0 = -0.1;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  ModelParams<double> p;
  p.omega_q = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("evaluation is deterministic") {
  DriveSpec<double> d;
  d.variant = DriveVariant::elliptical;
  d.eta = 0.4;
  d.phi_y = 0.2;
  CHECK(evaluate_drive(d, 3.3) == evaluate_drive(d, 3.3));
}
