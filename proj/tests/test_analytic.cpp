#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "rabi/analytic.hpp"

using namespace rabi;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

std::vector<double> grid(double t0, double t1, double h) {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / h));
  for (std::size_t k = 0; k <= n; ++k) out.push_back(t0 + h * static_cast<double>(k));
  return out;
}

}  // namespace

TEST_CASE("coefficients vanish at t = 0") {
  const std::vector<double> t{0.0};
  const auto c = wei_norman_evaluate(1.3, 5.0, std::span<const double>(t));
  CHECK(c.f0[0] == cd(0));
  CHECK(c.f1[0] == cd(0));
  CHECK(c.f2[0] == cd(0));
  CHECK(c.f3[0] == cd(0));
}

TEST_CASE("f1 saturates at i and f3 at t = 1 is log cosh 1") {
  const std::vector<double> t{1.0, 50.0, 1e6};
  const auto c = wei_norman_evaluate(1.0, 0.0, std::span<const double>(t));
  CHECK(c.f3[0].real() == doctest::Approx(0.433781).epsilon(1e-6));
  CHECK(c.f3[0].real() == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-15));
  CHECK(std::abs(c.f1[1] - cd(0, 1)) < 1e-15);
  CHECK(std::isfinite(c.f3[2].real()));
  CHECK(c.f3[2].real() == doctest::Approx(1e6 - std::log(2.0)));
}

TEST_CASE("f1 equals f2 and Im f1 lies in [0, 1)") {
  const auto t = grid(0, 5, 0.01);
  const auto c = wei_norman_evaluate(2.0, 1.0, std::span<const double>(t));
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(c.f1[k] == c.f2[k]);
    CHECK(c.f1[k].imag() >= 0.0);
    CHECK(c.f1[k].imag() <= 1.0);
  }
}

TEST_CASE("closed-form coefficients satisfy the flow equations") {
  for (double alpha : {0.1, 1.0, 5.0}) {
    CAPTURE(alpha);
    const auto t = grid(0, 2, 1e-4);
    const auto c = wei_norman_evaluate(alpha, 5.0, std::span<const double>(t));
    CHECK(wei_norman_ode_residual(c).max() < 1e-6);
  }
}

TEST_CASE("zero functions leave a residual of exactly alpha in the f1 equation") {
  auto c = wei_norman_evaluate(0.7, 2.0, std::span<const double>(grid(0, 1, 1e-3)));
  for (auto& v : c.f1) v = 0;
  for (auto& v : c.f2) v = 0;
  for (auto& v : c.f3) v = 0;
  const auto r = wei_norman_ode_residual(c);
  CHECK(r.f1 == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(r.f0 < 1e-9);
}

TEST_CASE("alpha = 0 is the trivial flow") {
  const auto t = grid(0, 1, 1e-3);
  const auto c = wei_norman_evaluate(0.0, 3.0, std::span<const double>(t));
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(c.f1[k] == cd(0));
  CHECK(wei_norman_ode_residual(c).max() < 1e-9);
}

TEST_CASE("instanton formula") {
  CHECK(instanton_sigma_z(1.0, 0.4, 0.0) == 1.0);
  CHECK(instanton_sigma_z(1.0, 0.4, 1e4) == doctest::Approx(-1.0));
  CHECK(std::abs(instanton_sigma_z(1.0, 1.0, std::atanh(0.5))) < 1e-15);
  CHECK(instanton_sigma_z(1.0, 1.0, 0.549306) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(instanton_threshold_time(0.05, -0.99) == doctest::Approx(std::atanh(0.995) / 0.05));
}

TEST_CASE("instanton and auxiliary field are affinely linked") {
  const auto t = grid(0, 10, 0.05);
  for (double alpha : {0.05, 1.0, 7.0}) {
    const auto x = auxiliary_flow(0.0, alpha, std::span<const double>(t));
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(instanton_sigma_z(1.0, alpha, t[k]) == 1.0 - 2.0 * x[k]);
  }
}

TEST_CASE("auxiliary flow") {
  const auto t = grid(0, 3, 1e-4);
  const auto x = auxiliary_flow(0.0, 1.0, std::span<const double>(t));
  double worst_closed = 0, worst_fd = 0;
  for (std::size_t k = 0; k < t.size(); ++k) worst_closed = std::max(worst_closed, std::abs(x[k] - std::tanh(t[k])));
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double dx = (x[k + 1] - x[k - 1]) / (t[k + 1] - t[k - 1]);
    worst_fd = std::max(worst_fd, std::abs(dx - (1 - x[k] * x[k])));
  }
  CHECK(worst_closed < 1e-15);
  CHECK(worst_fd < 1e-6);

  const auto fixed = auxiliary_flow(1.0, 2.0, std::span<const double>(t));
  for (double v : fixed) CHECK(v == 1.0);
  CHECK_THROWS_AS(auxiliary_flow(1.5, 1.0, std::span<const double>(t)), InvalidArgument);
}

TEST_CASE("auxiliary fixed points are exactly x = +/-1") {
  for (double x : {-1.0, 1.0}) CHECK(1.0 - x * x == 0.0);
  // U is the flow's potential: x' = -U'(x)
  const double a = 1.7, h = 1e-6;
  for (double x : {-0.8, 0.0, 0.3, 0.95}) {
    const double du = (potential_u(x + h, a) - potential_u(x - h, a)) / (2 * h);
    CHECK(-du == doctest::Approx(a * (1 - x * x)).epsilon(1e-8));
  }
  CHECK(potential_v(1.0, a) == 0.0);
  CHECK(potential_v(0.0, a) == doctest::Approx(a * a / 2));
}

TEST_CASE("Euclidean action") {
  CHECK(euclidean_action(3.0).closed_form == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(euclidean_action(0.75).closed_form == doctest::Approx(1.0).epsilon(1e-15));
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> dist(1e-3, 10.0);
  for (int k = 0; k < 20; ++k) {
    const double alpha = dist(gen);
    const auto s = euclidean_action(alpha);
    CHECK(std::abs(s.closed_form - s.quadrature) < 1e-10);
  }
}

TEST_CASE("Bloch coordinate identities") {
  for (int k = 0; k <= 100; ++k) {
    const double theta = pi * k / 100;
    CHECK(std::abs(polar_cap_coordinate(theta) - population_coordinate(std::cos(theta))) < 1e-14);
  }
}

TEST_CASE("axial Riccati flow reproduces i tanh(alpha t)") {
  for (double alpha : {0.05, 1.0, 3.0}) {
    CAPTURE(alpha);
    const CouplingVector<double> a{0, 0, alpha};
    const auto t = grid(0, 10 / alpha, 0.05 / alpha);
    const auto traj = riccati_evolve(a, cd(0), std::span<const double>(t));
    REQUIRE_FALSE(traj.pole);
    const auto wn = wei_norman_evaluate(alpha, 0.0, std::span<const double>(t));
    double worst = 0;
    for (std::size_t k = 0; k < t.size(); ++k) worst = std::max(worst, std::abs(traj.values[k] - wn.f1[k]));
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("i is stationary for the axial flow") {
  const auto t = grid(0, 20, 0.5);
  const auto traj = riccati_evolve(CouplingVector<double>{0, 0, 1.3}, cd(0, 1), std::span<const double>(t));
  for (const auto& v : traj.values) CHECK(std::abs(v - cd(0, 1)) < 1e-8);
}

TEST_CASE("fixed points") {
  const auto axial = riccati_fixed_points(CouplingVector<double>{0, 0, 1});
  REQUIRE(axial.size() == 2);
  CHECK((std::abs(axial[0].value - cd(0, 1)) < 1e-15 || std::abs(axial[1].value - cd(0, 1)) < 1e-15));
  CHECK((std::abs(axial[0].value + cd(0, 1)) < 1e-15 || std::abs(axial[1].value + cd(0, 1)) < 1e-15));
  for (const auto& fp : axial) {
    CHECK(fp.stability == (fp.value.imag() > 0 ? Stability::stable : Stability::unstable));
  }

  const auto tilted = riccati_fixed_points(CouplingVector<double>{1, 0, 1});
  REQUIRE(tilted.size() == 1);
  CHECK(std::abs(tilted[0].value - cd(1)) < 1e-15);

  const auto planar = riccati_fixed_points(CouplingVector<double>{0.3, -0.2, 0});
  REQUIRE(planar.size() == 1);
  CHECK(planar[0].value == cd(0));
  CHECK_THROWS_AS(riccati_fixed_points(CouplingVector<double>{0, 0, 0}), InvalidArgument);
}

TEST_CASE("every fixed point zeroes the flow and the stable one holds") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> dist(-3, 3);
  const auto t = grid(0, 100, 1.0);
  int stable_seen = 0;
  for (int k = 0; k < 50; ++k) {
    const CouplingVector<double> a{dist(gen), dist(gen), dist(gen)};
    for (const auto& fp : riccati_fixed_points(a)) {
      CHECK(std::abs(riccati_rhs(a, fp.value)) < 1e-12 * std::max(1.0, a.norm() * std::norm(fp.value)));
      if (fp.stability == Stability::stable) {
        ++stable_seen;
        const auto traj = riccati_evolve(a, fp.value, std::span<const double>(t));
        REQUIRE_FALSE(traj.pole);
        for (const auto& v : traj.values) CHECK(std::abs(v - fp.value) < 1e-8);
      }
    }
  }
  CHECK(stable_seen > 0);
}

TEST_CASE("movable poles stop the Riccati flow") {
  // f' = i (1 + f^2) from f0 = -2i runs into a pole at finite time.
  const auto t = grid(0, 5, 0.01);
  const auto traj = riccati_evolve(CouplingVector<double>{0, 0, 1}, cd(0, -2), std::span<const double>(t));
  CHECK(traj.pole);
  CHECK(traj.pole_time > 0.0);
  CHECK(traj.values.size() < t.size());
}

TEST_CASE("attractor direction") {
  const auto ground = attractor_direction(CouplingVector<double>{0, 0, 1});
  CHECK(ground.z == -1.0);
  const auto tilted = attractor_direction(CouplingVector<double>{1, 0, 1});
  CHECK(tilted.x == doctest::Approx(-1 / std::sqrt(2.0)));
  CHECK(tilted.y == 0.0);
  CHECK(tilted.z == doctest::Approx(-1 / std::sqrt(2.0)));
  std::mt19937_64 gen(5);
  std::normal_distribution<double> dist;
  for (int k = 0; k < 100; ++k) {
    const auto v = attractor_direction(CouplingVector<double>{dist(gen), dist(gen), dist(gen)});
    CHECK(std::abs(v.norm() - 1.0) < 1e-15);
  }
}
