#include "nobind/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nobind/error.hpp"
#include "nobind/numerics.hpp"

namespace nobind {
namespace {

constexpr double kPi = std::numbers::pi;

void check_width(double w, std::size_t i) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw Error(ErrorKind::NonPositiveWidth,
                "width b_" + std::to_string(i) + " = " + std::to_string(w));
  }
}

void check_ratio(double x, std::size_t i) {
  if (!(x > kRatioMargin && x < 1.0 - kRatioMargin)) {
    throw Error(ErrorKind::RatioOutOfRange,
                "pinning ratio x_" + std::to_string(i) + " = " + std::to_string(x));
  }
}

}  // namespace

PartitionSchedule::PartitionSchedule(std::vector<double> widths,
                                     std::vector<double> ratios, TailRule tail)
    : widths_(std::move(widths)), ratios_(std::move(ratios)), tail_(tail) {
  for (std::size_t i = 0; i < widths_.size(); ++i) check_width(widths_[i], i);
  if (widths_.size() < 3) {
    throw Error(ErrorKind::TruncationTooShort,
                "need widths b_0..b_N with N >= 2, got " +
                    std::to_string(widths_.size()) + " widths");
  }
  for (std::size_t i = 0; i < ratios_.size(); ++i) check_ratio(ratios_[i], i + 1);
  if (ratios_.size() != widths_.size() - 1) {
    throw Error(ErrorKind::InvalidArgument,
                "expected " + std::to_string(widths_.size() - 1) +
                    " pinning ratios, got " + std::to_string(ratios_.size()));
  }
  std::visit(
      [](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, LinearTail>) {
          check_width(rule.b2, 2);
        } else {
          check_width(rule.b, 0);
          if (!(rule.l > 1.0)) {
            throw Error(ErrorKind::RatioNotAboveOne,
                        "geometric growth l = " + std::to_string(rule.l));
          }
        }
        check_ratio(rule.ratio, 0);
      },
      tail_);

  sums_.resize(widths_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < widths_.size(); ++i) {
    acc += widths_[i];
    sums_[i] = acc;
  }
}

PartitionSchedule PartitionSchedule::geometric(double b, double l, double ratio,
                                               std::size_t stored) {
  if (!(l > 1.0)) {
    throw Error(ErrorKind::RatioNotAboveOne, "geometric growth l = " + std::to_string(l));
  }
  std::vector<double> widths(stored + 1);
  for (std::size_t i = 0; i <= stored; ++i) {
    widths[i] = b * std::pow(l, static_cast<double>(i));
  }
  return PartitionSchedule(std::move(widths), std::vector<double>(stored, ratio),
                           GeometricTail{b, l, ratio});
}

double PartitionSchedule::width(std::size_t n) const {
  if (n < widths_.size()) return widths_[n];
  return std::visit(
      [n](const auto& rule) -> double {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, LinearTail>) {
          return static_cast<double>(n - 1) * rule.b2;
        } else {
          return rule.b * std::pow(rule.l, static_cast<double>(n));
        }
      },
      tail_);
}

double PartitionSchedule::partial_sum(std::size_t n) const {
  if (n < sums_.size()) return sums_[n];
  const std::size_t big_n = truncation();
  return std::visit(
      [&](const auto& rule) -> double {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, LinearTail>) {
          // sum_{k=N+1}^{n} (k-1) = n(n-1)/2 - N(N-1)/2
          const double nn = static_cast<double>(n);
          const double nb = static_cast<double>(big_n);
          return sums_.back() + rule.b2 * 0.5 * (nn * (nn - 1.0) - nb * (nb - 1.0));
        } else {
          const double head = std::pow(rule.l, static_cast<double>(big_n + 1));
          const double tail = std::pow(rule.l, static_cast<double>(n + 1));
          return sums_.back() + rule.b * (tail - head) / (rule.l - 1.0);
        }
      },
      tail_);
}

double PartitionSchedule::ratio(std::size_t n) const {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "pinning ratios start at n = 1");
  if (n <= ratios_.size()) return ratios_[n - 1];
  return std::visit([](const auto& rule) { return rule.ratio; }, tail_);
}

double PartitionSchedule::pin_radius(std::size_t n) const {
  return 0.5 * ratio(n) * partial_sum(n - 1);
}

std::size_t PartitionSchedule::interval_of(double t) const {
  if (t < sums_.front()) return 0;
  if (t < sums_.back()) {
    const auto it = std::upper_bound(sums_.begin(), sums_.end(), t);
    return static_cast<std::size_t>(it - sums_.begin());
  }
  // Past the stored widths: double until t_hi > t, then bisect.
  std::size_t lo = sums_.size() - 1;  // t_lo <= t
  std::size_t hi = 2 * sums_.size();
  while (partial_sum(hi) <= t) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (partial_sum(mid) <= t) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

PartitionSchedule PartitionSchedule::scaled(double factor) const {
  std::vector<double> widths = widths_;
  for (double& w : widths) w *= factor;
  TailRule tail = std::visit(
      [factor](auto rule) -> TailRule {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, LinearTail>) {
          rule.b2 *= factor;
        } else {
          rule.b *= factor;
        }
        return rule;
      },
      tail_);
  return PartitionSchedule(std::move(widths), ratios_, tail);
}

double phi_eval(std::size_t n, double t, const PartitionSchedule& schedule) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "phi_eval needs t >= 0");
  if (n == 0) {
    const double a0 = schedule.width(0);
    const double a1 = schedule.width(1);
    if (t <= a0) return 1.0;
    if (t <= a0 + a1) return std::cos(kPi * (t - a0) / (2.0 * a1));
    return 0.0;
  }
  const double lo = schedule.partial_sum(n - 1);
  const double mid = schedule.partial_sum(n);
  if (t < lo) return 0.0;
  if (t <= mid) return std::sin(kPi * (t - lo) / (2.0 * schedule.width(n)));
  const double hi = schedule.partial_sum(n + 1);
  if (t <= hi) return std::cos(kPi * (t - mid) / (2.0 * schedule.width(n + 1)));
  return 0.0;
}

namespace {

// Sum of squared derivatives of the two bumps active on interval k (k >= 1),
// at offset u from its left end.
double active_grad_sq(std::size_t k, double u, const PartitionSchedule& schedule) {
  if (k == 0) return 0.0;
  const double a = schedule.width(k);
  const double rate = kPi / (2.0 * a);
  const double theta = rate * u;
  const double falling = -rate * std::sin(theta);  // phi_{k-1}
  const double rising = rate * std::cos(theta);    // phi_k
  return falling * falling + rising * rising;
}

}  // namespace

double grad_sq_sum(double t, const PartitionSchedule& schedule) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "grad_sq_sum needs t >= 0");
  const std::size_t k = schedule.interval_of(t);
  const double left_end = k == 0 ? 0.0 : schedule.partial_sum(k - 1);
  const double inside = active_grad_sq(k, t - left_end, schedule);
  if (k >= 1 && t == left_end) {
    // Knot t_{k-1}: compare with the limit from the previous interval.
    const std::size_t prev = k - 1;
    const double prev_left = prev == 0 ? 0.0 : schedule.partial_sum(prev - 1);
    return std::max(inside, active_grad_sq(prev, t - prev_left, schedule));
  }
  return inside;
}

double pinning_profile(double r, double radius) {
  if (!(radius > 0.0)) {
    throw Error(ErrorKind::NonPositiveRadius, "pinning radius " + std::to_string(radius));
  }
  if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "pinning profile needs r >= 0");
  if (r >= radius) return 0.0;
  const double k = kPi / radius;
  const double norm = std::sqrt(2.0 * kPi * radius);
  if (r < 1e-6 * radius) {
    const double kr2 = (k * r) * (k * r);
    return k * (1.0 - kr2 / 6.0 + kr2 * kr2 / 120.0) / norm;
  }
  return std::sin(k * r) / (norm * r);
}

double pinning_profile_derivative(double r, double radius) {
  if (!(radius > 0.0)) {
    throw Error(ErrorKind::NonPositiveRadius, "pinning radius " + std::to_string(radius));
  }
  if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "pinning profile needs r >= 0");
  if (r >= radius) return 0.0;
  const double k = kPi / radius;
  const double norm = std::sqrt(2.0 * kPi * radius);
  const double kr = k * r;
  if (kr < 1e-2) {
    const double k3r = k * k * kr;
    const double kr2 = kr * kr;
    return -k3r * (1.0 / 3.0 - kr2 / 30.0 + kr2 * kr2 / 840.0) / norm;
  }
  return (kr * std::cos(kr) - std::sin(kr)) / (norm * r * r);
}

PinningDiagnostics pinning_diagnostics(double radius, double quad_tol) {
  if (!(radius > 0.0)) {
    throw Error(ErrorKind::NonPositiveRadius, "pinning radius " + std::to_string(radius));
  }
  const double shell = 4.0 * kPi;
  const QuadResult mass = integrate(
      [radius](double r) {
        const double f = pinning_profile(r, radius);
        return f * f * r * r;
      },
      0.0, radius, quad_tol / shell);
  const QuadResult kinetic = integrate(
      [radius](double r) {
        const double df = pinning_profile_derivative(r, radius);
        return df * df * r * r;
      },
      0.0, radius, quad_tol / (0.5 * shell));
  return {std::sqrt(shell * mass.value), 0.5 * shell * kinetic.value};
}

}  // namespace nobind
