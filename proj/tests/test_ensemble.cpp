#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "rabi/analytic.hpp"
#include "rabi/ensemble.hpp"
#include "rabi/random.hpp"

using namespace rabi;

namespace {

EnsembleSpec small_spec(int n) {
  EnsembleSpec s;
  s.n_samples = n;
  s.params.trunc = FockTruncation(12);
  s.cavity_mean_hi = 1.0;
  s.drive.g0 = 0.2;
  s.integrator.rel_tol = 1e-7;
  s.integrator.abs_tol = 1e-9;
  s.n_time_samples = 81;
  return s;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
  return out;
}

}  // namespace

TEST_CASE("counter generator is a pure function of seed and counter") {
  const CounterRng a(42), b(42), c(43);
  CHECK(a.bits(0) == b.bits(0));
  CHECK(a.bits(17) == b.bits(17));
  CHECK(a.bits(0) != c.bits(0));
  // SplitMix64 reference output for seed 0: the first value of the standard stream.
  CHECK(CounterRng(0).bits(0) == 0xE220A8397B1DCDAFULL);
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const double u = a.uniform(k);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sampling is deterministic and area-uniform") {
  EnsembleSpec spec;
  spec.n_samples = 100000;
  const auto s1 = sample_initial_conditions(spec);
  const auto s2 = sample_initial_conditions(spec);
  REQUIRE(s1.size() == s2.size());
  double mean_cos = 0, mean_phi = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK_MESSAGE(s1[i].theta == s2[i].theta, i);
    mean_cos += std::cos(s1[i].theta);
    mean_phi += s1[i].phi;
    REQUIRE(s1[i].cavity_mean >= 0.0);
    REQUIRE(s1[i].cavity_mean <= 5.0);
    REQUIRE(s1[i].phi >= 0.0);
    REQUIRE(s1[i].phi < 2 * std::numbers::pi);
  }
  mean_cos /= static_cast<double>(s1.size());
  mean_phi /= static_cast<double>(s1.size());
  CHECK(std::abs(mean_cos) < 0.01);
  CHECK(std::abs(mean_phi - std::numbers::pi) < 0.03);
}

TEST_CASE("samples do not depend on the ensemble size") {
  EnsembleSpec a;
  a.n_samples = 10;
  EnsembleSpec b = a;
  b.n_samples = 1000;
  const auto sa = sample_initial_conditions(a);
  const auto sb = sample_initial_conditions(b);
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i].phi == sb[i].phi);
}

TEST_CASE("ensemble settings are validated") {
  EnsembleSpec s;
  s.n_samples = 0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = EnsembleSpec{};
  s.cavity_mean_lo = 3;
  s.cavity_mean_hi = 2;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = EnsembleSpec{};
  s.drive.g0 = 0;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);  // t_end = 8 / g0 undefined
  s.t_end = 10;
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("median and threshold crossing") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(median({1.0, inf, inf}) == inf);
  CHECK(median({1.0, 2.0, inf}) == 2.0);

  TrajectoryRecord<double> rec;
  rec.times = {0, 1, 2, 3};
  for (double z : {1.0, 0.0, -0.98, -1.0}) rec.bloch.push_back({0, 0, z});
  CHECK(time_to_threshold(rec, -0.99) == doctest::Approx(2.5));
  CHECK(time_to_threshold(rec, 0.5) == doctest::Approx(0.5));
  rec.bloch.back().z = -0.985;
  CHECK(time_to_threshold(rec, -0.99) == inf);
}

TEST_CASE("alpha fit recovers noiseless data") {
  const auto t = linspace(0, 20, 401);
  std::vector<double> z(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) z[k] = instanton_sigma_z(1.0, 0.3, t[k]);
  const auto fit = fit_alpha(t, z, 10 * 0.1);
  CHECK(std::abs(fit.alpha - 0.3) < 1e-6);
  CHECK(fit.rms_residual < 1e-6);
}

TEST_CASE("alpha fit under uniform noise stays within 0.02") {
  const auto t = linspace(0, 20, 401);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::vector<double> z(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) z[k] = instanton_sigma_z(1.0, 0.3, t[k]) + noise(gen);
    const auto fit = fit_alpha(t, z, 1.0);
    CHECK_MESSAGE(std::abs(fit.alpha - 0.3) < 0.02, seed);
    CHECK(fit.rms_residual > 0.0);
  }
}

TEST_CASE("alpha fit requires enough samples") {
  const std::vector<double> t(5, 0.0), z(5, 1.0);
  CHECK_THROWS_AS(fit_alpha(t, z, 1.0), InvalidArgument);
}

TEST_CASE("non-monotone data still returns a fit with its residual") {
  const auto t = linspace(0, 20, 200);
  std::vector<double> z(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) z[k] = std::cos(t[k]);
  const auto fit = fit_alpha(t, z, 1.0);
  CHECK(fit.alpha > 0.0);
  CHECK(fit.rms_residual > 0.1);
}

TEST_CASE("without drive nothing converges") {
  auto spec = small_spec(6);
  spec.drive.g0 = 0.0;
  spec.t_end = 40.0;
  spec.workers = 2;
  const auto result = run_ensemble(spec);
  CHECK(result.summary.n_converged == 0);
  CHECK(result.summary.fraction_converged == 0.0);
  for (const auto& o : result.summary.trajectories) CHECK(o.trusted);
}

TEST_CASE("results do not depend on the worker count") {
  auto spec = small_spec(8);
  spec.retain_every = 3;
  spec.workers = 1;
  const auto one = run_ensemble(spec);
  spec.workers = 4;
  const auto four = run_ensemble(spec);
  REQUIRE(one.summary.trajectories.size() == four.summary.trajectories.size());
  for (std::size_t i = 0; i < one.summary.trajectories.size(); ++i) {
    const auto& a = one.summary.trajectories[i];
    const auto& b = four.summary.trajectories[i];
    CHECK(a.index == i);
    CHECK(a.final_sigma_z == b.final_sigma_z);
    CHECK(((a.time_to_threshold == b.time_to_threshold) ||
           (std::isinf(a.time_to_threshold) && std::isinf(b.time_to_threshold))));
  }
  CHECK(one.summary.fraction_converged == four.summary.fraction_converged);
  CHECK(one.summary.reference_fit.alpha == four.summary.reference_fit.alpha);
  REQUIRE(one.retained.size() == 3);
  CHECK(one.retained[1].first == 3);
  CHECK(one.retained[2].second.bloch.back().z == four.retained[2].second.bloch.back().z);
}

TEST_CASE("summary bookkeeping") {
  const auto result = run_ensemble(small_spec(5));
  const auto& s = result.summary;
  CHECK(s.n_trusted + s.n_untrusted == 5);
  CHECK(s.fraction_converged >= 0.0);
  CHECK(s.fraction_converged <= 1.0);
  CHECK(s.reference.initial.theta == 0.0);
  CHECK(s.reference_fit.alpha > 0.0);
  CHECK(s.reference_fit.alpha <= 10 * 0.2);
  CHECK(s.analytic_threshold_time == doctest::Approx(instanton_threshold_time(0.2, -0.99)));
  CHECK(result.reference_record.size() == 81);
  for (const auto& o : s.trajectories) {
    CHECK(o.final_ground_fidelity == doctest::Approx(0.5 * (1 - o.final_sigma_z)));
  }
}

TEST_CASE("too small a truncation produces a warning") {
  auto spec = small_spec(1);
  spec.cavity_mean_hi = 1.0;
  spec.params.trunc = FockTruncation(8);
  const auto result = run_ensemble(spec);
  CHECK(result.summary.warnings.size() == 1);
}

TEST_CASE("leaky trajectories are excluded and counted") {
  auto spec = small_spec(4);
  spec.params.trunc = FockTruncation(6);
  spec.cavity_mean_lo = 0.0;
  spec.cavity_mean_hi = 1.0;
  spec.drive.variant = DriveVariant::constant;
  spec.drive.g0 = 1.5;
  spec.t_end = 5.0;
  const auto result = run_ensemble(spec);
  CHECK(result.summary.n_untrusted > 0);
  CHECK(result.summary.n_trusted + result.summary.n_untrusted == 4);
}
