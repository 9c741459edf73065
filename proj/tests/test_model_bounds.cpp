#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "nobind/error.hpp"
#include "nobind/model_bounds.hpp"

using namespace nobind;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent high-precision values (mpmath, 30 digits).
constexpr double kPhiSupOracle = 0.436181817271458495;
constexpr double kPhiArgmaxOracle = 2.08157597781810061;
constexpr double kPhiOverXL1Oracle = 0.96803552038152;

PartitionSchedule reference_schedule() {
  return PartitionSchedule({7.27, 3.44, 3.44}, {0.702, 0.702}, LinearTail{3.44, 0.702});
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

double piezo_n_by_hand(std::size_t n, const PartitionSchedule& s) {
  const double t_next = s.partial_sum(n + 1);
  const double t_prev = s.partial_sum(n - 1);
  const double w = std::min(s.width(n + 1), s.width(n));
  const double L = s.ratio(n) * t_prev / 2;
  return kPi * kPi * t_next / (2 * w * w) + 8 * kPi * kPi * t_next / (t_prev - 2 * L) +
         kPi * kPi * t_next / (2 * L * L);
}

double optical_n_by_hand(std::size_t n, const PartitionSchedule& s) {
  const double t_next = s.partial_sum(n + 1);
  const double t_prev = s.partial_sum(n - 1);
  const double w = std::min(s.width(n + 1), s.width(n));
  const double x = s.ratio(n);
  return kPi * kPi * t_next / (2 * w * w) +
         std::numbers::sqrt2 * t_next / t_prev *
             (1 / (1 - x) + std::numbers::sqrt2 * kPi * kPi / (t_prev * x * x));
}

}  // namespace

TEST_CASE("phi_shape values") {
  CHECK(phi_shape(0.0) == 0.0);
  CHECK(phi_shape(kPi) == doctest::Approx(1 / kPi).epsilon(1e-15));
  CHECK(phi_shape(1e-3) == doctest::Approx(1e-3 / 3 - 1e-9 / 30).epsilon(1e-14));
  for (double x : {1e-4, 3e-3, 9.9e-3}) CHECK(std::abs(phi_shape(x)) <= 1e-2 / 3 + 1e-6);
  // Series and closed form agree across the switch.
  CHECK(phi_shape(0.999e-2) == doctest::Approx(phi_shape(1.001e-2)).epsilon(1e-3));
  CHECK(phi_shape(0.0100000001) == doctest::Approx(phi_shape(0.0099999999)).epsilon(1e-8));
}

TEST_CASE("phi norms match the independent oracle") {
  const PhiNorms& norms = cached_phi_norms();
  CHECK(std::abs(norms.sup_norm - kPhiSupOracle) < 1e-12);
  CHECK(std::abs(norms.argmax - kPhiArgmaxOracle) < 1e-6);
  CHECK(std::abs(norms.over_x_l1 - kPhiOverXL1Oracle) < 1e-10);
  CHECK(norms.over_x_l1 > 0.0);
  CHECK(norms.tail_bound >= std::abs(norms.tail_estimate));
  CHECK(&cached_phi_norms() == &norms);
}

TEST_CASE("cutoff constants") {
  CHECK(c_constants(0.0).c1 == 0.0);
  CHECK(c_constants(2.0).c1 == doctest::Approx(8 * kPi * std::log(2.0)).epsilon(1e-15));
  CHECK(c_constants(1.0).c2 - c_constants(0.0).c2 > 0.0);
  const double l1 = cached_phi_norms().over_x_l1;
  CHECK(c_constants(0.0).c2 == doctest::Approx(32 * kPi * kPi * l1 * l1).epsilon(1e-15));
  CHECK(kind_of([] { c_constants(-1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("optical brackets at the reference point") {
  const double f0 = bracket_zero(OpticalModel{}, 7.27, 3.44);
  CHECK(f0 == doctest::Approx(2 * 10.71 + kPi * kPi * 10.71 / (2 * 3.44 * 3.44)).epsilon(1e-15));
  CHECK(f0 < 25.9);
  CHECK(f0 == doctest::Approx(25.886).epsilon(1e-4));
  const double f1 = bracket_n(OpticalModel{}, 1, reference_schedule());
  CHECK(f1 == doctest::Approx(25.86).epsilon(1e-3));
  CHECK(f1 < 25.9);
  // b0 -> 0 limit.
  for (double b1 : {0.5, 3.0}) {
    CHECK(bracket_zero(OpticalModel{}, 1e-300, b1) ==
          doctest::Approx(2 * b1 + kPi * kPi / (2 * b1)).epsilon(1e-14));
  }
}

TEST_CASE("bracket_n agrees with a brute-force min branch") {
  const PartitionSchedule linear = reference_schedule();
  const PartitionSchedule geo = PartitionSchedule::geometric(0.7, 1.3, 0.5, 2);
  const PartitionSchedule mixed({1.0, 5.0, 0.5, 3.0}, {0.4, 0.6, 0.3}, LinearTail{0.5, 0.3});
  for (std::size_t n = 1; n < 60; ++n) {
    for (const PartitionSchedule* s : {&linear, &geo, &mixed}) {
      CHECK(bracket_n(OpticalModel{}, n, *s) ==
            doctest::Approx(optical_n_by_hand(n, *s)).epsilon(1e-14));
      CHECK(bracket_n(PiezoModel{1.0}, n, *s) ==
            doctest::Approx(piezo_n_by_hand(n, *s)).epsilon(1e-14));
    }
    CHECK(std::min(geo.width(n), geo.width(n + 1)) == geo.width(n));
    if (n >= 3) CHECK(std::min(linear.width(n), linear.width(n + 1)) == linear.width(n));
  }
}

TEST_CASE("piezo middle term at x = 1/2") {
  const PartitionSchedule s({2.0, 1.5, 1.5}, {0.5, 0.5}, LinearTail{1.5, 0.5});
  for (std::size_t n = 1; n < 10; ++n) {
    const double t_next = s.partial_sum(n + 1);
    const double t_prev = s.partial_sum(n - 1);
    const double w = std::min(s.width(n), s.width(n + 1));
    const double L = t_prev / 4;
    const double expect = kPi * kPi * t_next / (2 * w * w) + 16 * kPi * kPi * t_next / t_prev +
                          kPi * kPi * t_next / (2 * L * L);
    CHECK(bracket_n(PiezoModel{2.0}, n, s) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("brackets diverge as the pinning ratio approaches one") {
  double previous = 0.0;
  for (double x : {0.9, 0.99, 0.999999, 1 - 1e-8}) {
    const PartitionSchedule s({7.27, 3.44, 3.44}, {x, x}, LinearTail{3.44, x});
    const double v = bracket_n(OpticalModel{}, 1, s);
    CHECK(v > previous);
    previous = v;
    CHECK(bracket_n(PiezoModel{1.0}, 1, s) > 0.0);
  }
  CHECK(previous > 1e8);
}

TEST_CASE("Nelson with D2 = 0 is the piezo bracket bit for bit") {
  for (double cutoff : {0.5, 1.0, 2.0, 10.0}) {
    const NelsonModel nelson{8 * c_constants(cutoff).c2, 0.0, 3.7};
    const PiezoModel piezo{cutoff};
    CHECK(bracket_zero(nelson, 1.3, 0.4) == bracket_zero(piezo, 1.3, 0.4));
    const PartitionSchedule s({0.2, 0.1, 0.1}, {0.7, 0.7}, LinearTail{0.1, 0.7});
    for (std::size_t n = 1; n < 20; ++n) CHECK(bracket_n(nelson, n, s) == bracket_n(piezo, n, s));
    CHECK(geometric_bound(nelson, 0.3, 1.4) == geometric_bound(piezo, 0.3, 1.4));
  }
}

TEST_CASE("brackets are monotone in the model constants") {
  const PartitionSchedule s({0.2, 0.1, 0.1}, {0.7, 0.7}, LinearTail{0.1, 0.7});
  double prev = 0.0;
  for (double cutoff : {0.5, 1.0, 2.0, 10.0}) {
    const double v = bracket_zero(PiezoModel{cutoff}, 0.2, 0.1);
    CHECK(v > prev);
    prev = v;
  }
  for (double d : {0.0, 1.0, 10.0, 100.0}) {
    CHECK(bracket_zero(NelsonModel{d + 1, 1.0, 1.1}, 0.2, 0.1) >
          bracket_zero(NelsonModel{d, 1.0, 1.1}, 0.2, 0.1));
    CHECK(bracket_zero(NelsonModel{1.0, d + 1, 1.1}, 0.2, 0.1) >
          bracket_zero(NelsonModel{1.0, d, 1.1}, 0.2, 0.1));
    CHECK(bracket_n(NelsonModel{d + 1, 1.0, 1.1}, 2, s) >= bracket_n(NelsonModel{d, 1.0, 1.1}, 2, s));
    CHECK(bracket_n(NelsonModel{1.0, d + 1, 1.1}, 2, s) >= bracket_n(NelsonModel{1.0, d, 1.1}, 2, s));
  }
}

TEST_CASE("homogeneity of the alpha rescaling") {
  const PartitionSchedule s = reference_schedule();
  for (const ModelSpec& model : {ModelSpec{OpticalModel{}}, ModelSpec{PiezoModel{1.0}}}) {
    for (double alpha : {0.1, 1.0, 10.0}) {
      const double f0 = bracket_zero(model, 7.27, 3.44);
      const double a0 = a_threshold_zero(model, alpha, 7.27 / alpha, 3.44 / alpha) / alpha;
      CHECK(std::abs(a0 - f0) / f0 < 1e-12);
      const PartitionSchedule unscaled = s.scaled(1 / alpha);
      for (std::size_t n = 1; n < 30; ++n) {
        const double fn = bracket_n(model, n, s);
        const double an = a_threshold_n(model, alpha, n, unscaled) / alpha;
        CHECK(std::abs(an - fn) / fn < 1e-12);
      }
    }
  }
}

TEST_CASE("geometric majorant dominates the exact brackets") {
  const ModelSpec piezo = PiezoModel{1.0};
  for (double b : {0.05, 0.5, 5.0}) {
    for (double l : {1.05, 1.3, 1.7, 2.0}) {
      const double bound = geometric_bound(piezo, b, l);
      const PartitionSchedule s = PartitionSchedule::geometric(b, l);
      double sup = bracket_zero(piezo, s.width(0), s.width(1));
      for (std::size_t n = 1; n <= 1000; ++n) sup = std::max(sup, bracket_n(piezo, n, s));
      CHECK(bound >= sup);
    }
  }
  CHECK(geometric_bound(piezo, 0.5, 1 + 1e-9) > 1e9);
  CHECK(geometric_bound(piezo, 1e9, 1.5) > 1e9);
  CHECK(kind_of([&] { geometric_bound(piezo, 0.5, 1.0); }) == ErrorKind::RatioNotAboveOne);
  CHECK(kind_of([] { geometric_bound(OpticalModel{}, 0.5, 1.5); }) == ErrorKind::InvalidModel);
  CHECK(kind_of([] { geometric_bound(NelsonModel{1, 1, 1}, 0.5, 1.5); }) == ErrorKind::InvalidModel);
}

TEST_CASE("model validation") {
  CHECK(kind_of([] { validate(PiezoModel{0.0}); }) == ErrorKind::InvalidModel);
  CHECK(kind_of([] { validate(NelsonModel{-1.0, 0.0, 1.0}); }) == ErrorKind::InvalidModel);
  CHECK_NOTHROW(validate(NelsonModel{1.0, 0.0, 1.0}));
  CHECK(kind_of([] { bracket_n(OpticalModel{}, 0, reference_schedule()); }) ==
        ErrorKind::InvalidArgument);
  CHECK(model_name(OpticalModel{}) == "optical");
  CHECK(model_name(PiezoModel{1}) == "piezo");
  CHECK(model_name(NelsonModel{}) == "nelson");
}
