#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "nobind/error.hpp"
#include "nobind/feynman_kac.hpp"
#include "nobind/numerics.hpp"
#include "nobind/verify.hpp"

using namespace nobind;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

std::vector<double> constant_path(std::size_t points, double x) {
  std::vector<double> v(points * 3, 0.0);
  for (std::size_t k = 0; k < points; ++k) v[3 * k] = x;
  return v;
}

double cross_action_error(double dt, double d, double horizon) {
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  const std::vector<double> a = constant_path(steps + 1, 0.0);
  const std::vector<double> b = constant_path(steps + 1, d);
  const Trajectory ta{a, 0, 3, steps + 1};
  const Trajectory tb{b, 0, 3, steps + 1};
  const double exact = (1 / std::numbers::sqrt2) / d * (horizon - 1 + std::exp(-horizon));
  return std::abs(pair_action(OpticalModel{}, ta, tb, false, 1.0, dt) - exact);
}

}  // namespace

TEST_CASE("path grid validation") {
  CHECK(PathEnsemble{3, 1.0, 0.25, 1, 0, EndpointMode::Free, {}}.steps() == 4);
  CHECK(PathEnsemble{3, 1.0, 1.0, 1, 0, EndpointMode::Free, {}}.steps() == 1);
  CHECK(kind_of([] { (void)PathEnsemble{3, 1.0, 0.3, 1, 0, EndpointMode::Free, {}}.steps(); }) ==
        ErrorKind::StepGridInvalid);
  CHECK(kind_of([] { (void)PathEnsemble{3, 1.0, 2.0, 1, 0, EndpointMode::Free, {}}.steps(); }) ==
        ErrorKind::StepGridInvalid);
  CHECK(kind_of([] { (void)PathEnsemble{3, 1.0, 0.0, 1, 0, EndpointMode::Free, {}}.steps(); }) ==
        ErrorKind::StepGridInvalid);
  CHECK(kind_of([] { sample_paths(PathEnsemble{4, 1.0, 0.5, 1, 0, EndpointMode::Free, {}}); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("two-point bridge sits on its pin") {
  const PathEnsemble e{3, 2.0, 2.0, 5, 3, EndpointMode::Bridge, {1.0, -2.0, 0.5}};
  const PathCollection paths = sample_paths(e);
  REQUIRE(paths.points() == 2);
  for (std::size_t p = 0; p < paths.count(); ++p) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(paths.at(p, k, 0) == 1.0);
      CHECK(paths.at(p, k, 1) == -2.0);
      CHECK(paths.at(p, k, 2) == 0.5);
    }
  }
}

TEST_CASE("bridge paths return to their start with the bridge variance") {
  const PathEnsemble e{6, 1.0, 0.01, 4000, 8, EndpointMode::Bridge, {}};
  const PathCollection paths = sample_paths(e);
  std::vector<double> mid_sq;
  for (std::size_t p = 0; p < paths.count(); ++p) {
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(paths.at(p, 0, c) == 0.0);
      CHECK(paths.at(p, 100, c) == 0.0);
      mid_sq.push_back(paths.at(p, 50, c) * paths.at(p, 50, c));
    }
  }
  // Var B_{T/2} = T/4; Var of a squared normal is 2 sigma^4.
  const double mean = pairwise_sum(mid_sq) / static_cast<double>(mid_sq.size());
  const double stderr_ = std::sqrt(2.0) * 0.25 / std::sqrt(static_cast<double>(mid_sq.size()));
  CHECK(std::abs(mean - 0.25) < 4 * stderr_);
}

TEST_CASE("free path increments have variance dt") {
  const PathEnsemble e{3, 1.0, 1e-3, 10000, 21, EndpointMode::Free, {}};
  const PathCollection paths = sample_paths(e);
  std::vector<double> sq;
  sq.reserve(paths.count() * 1000 * 3);
  for (std::size_t p = 0; p < paths.count(); ++p) {
    for (std::size_t k = 1; k < paths.points(); ++k) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double inc = paths.at(p, k, c) - paths.at(p, k - 1, c);
        sq.push_back(inc * inc);
      }
    }
  }
  const double n = static_cast<double>(sq.size());
  const double var = pairwise_sum(sq) / n;
  CHECK(std::abs(var - 1e-3) < 4 * 1e-3 * std::sqrt(2.0 / n));
  CHECK(paths.at(17, 0, 1) == 0.0);
}

TEST_CASE("sampling is deterministic and order independent") {
  const PathEnsemble e{6, 1.0, 0.05, 64, 1234, EndpointMode::Free, {}};
  const PathCollection a = sample_paths(e, 1);
  CHECK(a == sample_paths(e, 1));
  CHECK(a == sample_paths(e, 4));
  PathEnsemble other = e;
  other.seed = 1235;
  CHECK(!(a == sample_paths(other, 1)));
  // A path depends only on (seed, index).
  PathEnsemble fewer = e;
  fewer.count = 10;
  const PathCollection b = sample_paths(fewer, 1);
  for (std::size_t i = 0; i < b.path(9).size(); ++i) CHECK(b.path(9)[i] == a.path(9)[i]);
}

TEST_CASE("piezo kernel special cases") {
  for (double cutoff : {0.5, 1.0, 10.0}) {
    for (double d : {0.01, 0.7, 3.0, 40.0}) {
      const double expect = 4 * kPi * (1 - std::cos(cutoff * d)) / (d * d);
      CHECK(piezo_kernel({d, 0.0, cutoff}) == doctest::Approx(expect).epsilon(1e-10));
    }
    for (double tau : {0.01, 0.5, 2.0, 30.0}) {
      const double lt = cutoff * tau;
      const double limit = 4 * kPi * (-std::expm1(-lt) - lt * std::exp(-lt)) / (tau * tau);
      CHECK(piezo_kernel_value(0.0, tau, cutoff) == doctest::Approx(limit).epsilon(1e-12));
      CHECK(piezo_kernel({1e-9, tau, cutoff}) == doctest::Approx(limit).epsilon(1e-9));
    }
    CHECK(piezo_kernel_value(0.0, 0.0, cutoff) == doctest::Approx(2 * kPi * cutoff * cutoff));
  }
  CHECK(kind_of([] { piezo_kernel({0.0, 1.0, 1.0}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { piezo_kernel({1.0, -1.0, 1.0}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { piezo_kernel({1.0, 1.0, 0.0}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("kernel closed form against the quadrature oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double d = std::pow(10.0, -3 + 6 * u(rng));
    const double tau = i % 5 == 0 ? 0.0 : std::pow(10.0, -3 + 5 * u(rng));
    const double cutoff = std::pow(10.0, -0.5 + 1.5 * u(rng));
    const KernelQuery q{d, tau, cutoff};
    const double closed = piezo_kernel(q);
    const double oracle = piezo_kernel(q, true);
    CHECK(std::abs(closed - oracle) <= 1e-8 * std::abs(oracle));
    CHECK(closed >= 0.0);
    CHECK(closed <= 8 * kPi / (d * d + tau * tau) * (1 + 1e-12));
  }
  const CheckResult grid = check_kernel_identity();
  CHECK(grid.passed);
  CHECK(grid.residual < 1e-8);
}

TEST_CASE("brace factor stays in [0, 2]") {
  const CheckResult r = check_brace_bound(100000);
  CHECK(r.passed);
  for (double d : {1e-3, 1.0, 100.0}) {
    for (double tau : {0.0, 1e-3, 1.0, 50.0}) {
      const double b = piezo_brace(d, tau, 3.0);
      CHECK(b >= 0.0);
      CHECK(b <= 2.0);
    }
  }
}

TEST_CASE("constant separation cross action and its convergence order") {
  const double d = 1.3;
  const double horizon = 4.0;
  CHECK(cross_action_error(1e-3, d, horizon) < 1e-6);
  std::vector<double> errors;
  for (double dt : {0.2, 0.1, 0.05, 0.025}) errors.push_back(cross_action_error(dt, d, horizon));
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    CHECK(order >= 1.8);
  }
}

TEST_CASE("action edge cases") {
  const std::vector<double> path = constant_path(11, 0.0);
  CHECK(retarded_action(OpticalModel{}, path, 3, 0.0, 0.1) == 0.0);
  const std::vector<double> shorter = constant_path(5, 1.0);
  const Trajectory a{path, 0, 3, 11};
  const Trajectory b{shorter, 0, 3, 5};
  CHECK(kind_of([&] { pair_action(OpticalModel{}, a, b, false, 1.0, 0.1); }) ==
        ErrorKind::GridMismatch);
  CHECK(kind_of([&] { pair_action(NelsonModel{1, 0, 1}, a, a, true, 1.0, 0.1); }) ==
        ErrorKind::InvalidModel);

  const PathEnsemble e{6, 1.0, 0.05, 1, 3, EndpointMode::Free, {}};
  const PathCollection two = sample_paths(e);
  const double piezo = retarded_action(PiezoModel{2.0}, two.path(0), 6, 1.0, 0.05);
  CHECK(std::isfinite(piezo));
  CHECK(piezo > 0.0);
  // Two particles: two self terms and two cross terms.
  const Trajectory p0 = particle(two.path(0), 6, 0);
  const Trajectory p1 = particle(two.path(0), 6, 1);
  const double sum = pair_action(PiezoModel{2.0}, p0, p0, true, 1.0, 0.05) +
                     pair_action(PiezoModel{2.0}, p1, p1, true, 1.0, 0.05) +
                     pair_action(PiezoModel{2.0}, p0, p1, false, 1.0, 0.05) +
                     pair_action(PiezoModel{2.0}, p1, p0, false, 1.0, 0.05);
  CHECK(piezo == doctest::Approx(sum).epsilon(1e-13));
}

TEST_CASE("diagonal rule: corrected weight converges faster") {
  const double exact = optical_self_action_mean(1.0, 8.0);
  const double corrected = optical_self_action_grid_mean(1.0, 8.0, 0.01);
  const double plain = optical_self_action_grid_mean(1.0, 8.0, 0.01, DiagonalRule::FirstOffDiagonal);
  CHECK(std::abs(corrected - exact) < 0.01);
  CHECK(std::abs(plain - exact) > 0.1);
  const double e1 = std::abs(optical_self_action_grid_mean(1.0, 2.0, 0.02) - optical_self_action_mean(1.0, 2.0));
  const double e2 = std::abs(optical_self_action_grid_mean(1.0, 2.0, 0.01) - optical_self_action_mean(1.0, 2.0));
  CHECK(std::log2(e1 / e2) > 1.3);
  // Continuum value: (alpha / sqrt pi) [T gamma(1/2, T) - gamma(3/2, T)].
  CHECK(exact == doctest::Approx(7.50006025).epsilon(1e-8));
}

TEST_CASE("Monte Carlo self action matches the Gaussian identity") {
  const PathEnsemble e{3, 1.0, 0.0025, 10000, 5, EndpointMode::Free, {}};
  const McProbe probe = mc_energy_probe(OpticalModel{}, 1.0, e, 0);
  const double analytic = optical_self_action_mean(1.0, 1.0);
  CHECK(std::abs(probe.action_mean - analytic) < 3 * probe.action_stderr);
  CHECK(probe.log_mean_exp >= probe.action_mean);
  CHECK(probe.samples == 10000);
}

TEST_CASE("Monte Carlo probe: zero coupling, determinism, guards") {
  const PathEnsemble e{3, 1.0, 0.05, 50, 2, EndpointMode::Free, {}};
  const McProbe zero = mc_energy_probe(OpticalModel{}, 0.0, e);
  CHECK(zero.action_mean == 0.0);
  CHECK(zero.log_mean_exp == 0.0);
  CHECK(zero.action_stderr == 0.0);

  const McProbe a = mc_energy_probe(PiezoModel{1.0}, 0.7, e, 1);
  const McProbe b = mc_energy_probe(PiezoModel{1.0}, 0.7, e, 4);
  CHECK(a.action_mean == b.action_mean);
  CHECK(a.log_mean_exp == b.log_mean_exp);
  CHECK(a.action_stderr == b.action_stderr);
  CHECK(a.log_mean_exp >= a.action_mean);

  const PathEnsemble costly{3, 1000.0, 1e-3, 100, 1, EndpointMode::Free, {}};
  CHECK(kind_of([&] { mc_energy_probe(OpticalModel{}, 1.0, costly); }) ==
        ErrorKind::CostGuardExceeded);
}

TEST_CASE("Jensen rates") {
  CHECK(jensen_rate(OpticalModel{}, 1.0) == 1.0);
  CHECK(jensen_rate(OpticalModel{}, 0.0) == 0.0);
  CHECK(std::abs(jensen_rate(PiezoModel{2.0}, 1.0) - 8 * kPi * std::log(2.0)) < 1e-10);
  CHECK(jensen_rate(PiezoModel{2.0}, 0.0) == 0.0);
}

TEST_CASE("separation estimate") {
  const SeparationCheck small = separation_bound_check(1.0, 1e-8);
  CHECK(small.exact >= 0.0);
  CHECK(small.exact < 1e-14);
  CHECK(small.exact <= small.bound);
  const SeparationCheck sat = separation_bound_check(1.0, 1e3);
  CHECK(sat.exact / sat.bound > 0.99);
  CHECK(sat.exact / sat.bound <= 1.0);
  for (double d : {1e-3, 0.1, 1.0, 50.0}) {
    for (double t : {1e-3, 0.5, 10.0, 1e4}) {
      const SeparationCheck s = separation_bound_check(d, t);
      CHECK(s.exact <= s.bound);
      const double closed = 16 * kPi / d * (t * std::atan(t / d) - 0.5 * d * std::log1p(t * t / (d * d)));
      CHECK(s.exact == doctest::Approx(closed).epsilon(1e-11));
    }
  }
}

TEST_CASE("renormalization integral") {
  CHECK(renorm_integral(0.0) == 0.0);
  CHECK(std::abs(renorm_integral(2.0) - 8 * kPi * std::log(2.0)) < 1e-10);
  for (double cutoff : {0.5, 1.0, 2.0, 10.0}) {
    CHECK(std::abs(renorm_integral(cutoff) - c_constants(cutoff).c1) < 1e-10);
  }
}
