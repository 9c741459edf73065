#include "nobind/model_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nobind/error.hpp"
#include "nobind/numerics.hpp"

namespace nobind {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
constexpr double kSqrt2 = std::numbers::sqrt2;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_widths(double b0, double b1) {
  if (!(b0 > 0.0) || !(b1 > 0.0)) {
    throw Error(ErrorKind::NonPositiveWidth,
                "b0 = " + std::to_string(b0) + ", b1 = " + std::to_string(b1));
  }
}

// phi_shape(x) / x, with the series near zero.
double phi_over_x(double x) {
  if (x < 1e-2) {
    const double x2 = x * x;
    return 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0;
  }
  return (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

// Mean-value estimate of the integral over [x, inf) of sqrt(1 + x^2) / x^3
// times the average of |cos| (2 / pi).
double oscillating_tail(double x) {
  const double envelope =
      std::sqrt(1.0 + x * x) / (2.0 * x * x) + 0.5 * std::asinh(1.0 / x);
  return 2.0 / kPi * envelope;
}

}  // namespace

void validate(const ModelSpec& model) {
  std::visit(Overloaded{
                 [](const OpticalModel&) {},
                 [](const PiezoModel& m) {
                   if (!(m.cutoff > 0.0) || !std::isfinite(m.cutoff)) {
                     throw Error(ErrorKind::InvalidModel,
                                 "piezo cutoff must be positive, got " +
                                     std::to_string(m.cutoff));
                   }
                 },
                 [](const NelsonModel& m) {
                   if (!(m.d1 >= 0.0) || !(m.d2 >= 0.0) || !(m.alpha >= 0.0) ||
                       !std::isfinite(m.d1) || !std::isfinite(m.d2) ||
                       !std::isfinite(m.alpha)) {
                     throw Error(ErrorKind::InvalidModel,
                                 "Nelson constants d1, d2, alpha must be finite and >= 0");
                   }
                 },
             },
             model);
}

std::string model_name(const ModelSpec& model) {
  return std::visit(Overloaded{
                        [](const OpticalModel&) { return std::string("optical"); },
                        [](const PiezoModel&) { return std::string("piezo"); },
                        [](const NelsonModel&) { return std::string("nelson"); },
                    },
                    model);
}

double phi_shape(double x) {
  if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "phi_shape needs x >= 0");
  if (x < 1e-2) {
    const double x2 = x * x;
    return x * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0);
  }
  return (std::sin(x) - x * std::cos(x)) / (x * x);
}

PhiNorms phi_norms(double quad_tol) {
  PhiNorms out;

  // Sup norm: dense grid, then golden-section refinement around the best node.
  // Beyond x = 20, |phi| <= (1 + x) / x^2 < 0.06, far below the first peak.
  constexpr double kGridEnd = 20.0;
  constexpr double kStep = 1e-3;
  double best_x = 0.0;
  double best = 0.0;
  for (double x = kStep; x <= kGridEnd; x += kStep) {
    const double v = std::abs(phi_shape(x));
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  const Extremum peak = golden_section_max(
      [](double x) { return std::abs(phi_shape(x)); }, best_x - kStep,
      best_x + kStep, 1e-12);
  out.sup_norm = peak.value;
  out.argmax = peak.x;

  // L1 norm of phi(x)/x: integrate between consecutive sign changes
  // (tan x = x, one root in each (k pi, k pi + pi/2)), then add the tail.
  constexpr std::size_t kIntervals = 20000;
  std::vector<double> zeros(kIntervals + 1, 0.0);
  for (std::size_t k = 1; k <= kIntervals; ++k) {
    const double lo = static_cast<double>(k) * kPi;
    zeros[k] = bracketed_root(
        [](double x) { return std::sin(x) - x * std::cos(x); }, lo, lo + 0.5 * kPi);
  }
  std::vector<double> pieces(kIntervals);
  const double piece_tol = 0.5 * quad_tol / static_cast<double>(kIntervals);
  for (std::size_t k = 0; k < kIntervals; ++k) {
    pieces[k] = std::abs(integrate(phi_over_x, zeros[k], zeros[k + 1], piece_tol).value);
  }
  const double x_end = zeros.back();
  out.truncation_point = x_end;
  out.tail_bound = 1.0 / (2.0 * x_end * x_end) + 1.0 / x_end;
  out.tail_estimate = oscillating_tail(x_end);
  out.over_x_l1 = pairwise_sum(pieces) + out.tail_estimate;
  return out;
}

const PhiNorms& cached_phi_norms() {
  static const PhiNorms norms = phi_norms(1e-10);
  return norms;
}

CutoffConstants c_constants(double cutoff) {
  if (!(cutoff >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "cutoff must be >= 0");
  }
  const PhiNorms& norms = cached_phi_norms();
  const double log_term = std::log1p(0.5 * cutoff);
  const double inner = norms.over_x_l1 + 4.0 * norms.sup_norm * log_term;
  CutoffConstants out;
  out.c1 = 8.0 * kPi * log_term;
  out.c2 = 32.0 * kPi2 * inner * inner;
  out.phi_sup = norms.sup_norm;
  out.phi_over_x_l1 = norms.over_x_l1;
  return out;
}

double bracket_zero(const ModelSpec& model, double b0, double b1) {
  validate(model);
  check_widths(b0, b1);
  const double span = b0 + b1;
  const double kinetic = kPi2 * span / (2.0 * b1 * b1);
  const double binding = std::visit(
      Overloaded{
          [&](const OpticalModel&) { return 2.0 * span; },
          [&](const PiezoModel& m) { return 8.0 * c_constants(m.cutoff).c2 * span; },
          [&](const NelsonModel& m) {
            return m.d1 * span + m.d2 * span * std::pow(m.alpha, 6);
          },
      },
      model);
  return binding + kinetic;
}

double bracket_n(const ModelSpec& model, std::size_t n,
                 const PartitionSchedule& schedule) {
  validate(model);
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "bracket_n needs n >= 1");
  const double t_prev = schedule.partial_sum(n - 1);
  const double t_next = schedule.partial_sum(n + 1);
  const double b_min = std::min(schedule.width(n + 1), schedule.width(n));
  const double x = schedule.ratio(n);
  const double radius = 0.5 * x * t_prev;
  const double gap = t_prev - 2.0 * radius;
  if (!(gap > 0.0)) {
    throw Error(ErrorKind::PinningViolation,
                "t_{n-1} - 2 L_n = " + std::to_string(gap) + " at n = " +
                    std::to_string(n),
                n);
  }
  const double localization = kPi2 * t_next / (2.0 * b_min * b_min);
  if (std::holds_alternative<OpticalModel>(model)) {
    return localization +
           (kSqrt2 * t_next / t_prev) *
               (1.0 / (1.0 - x) + kSqrt2 * kPi2 / (t_prev * x * x));
  }
  return localization + 8.0 * kPi2 * t_next / gap +
         kPi2 * t_next / (2.0 * radius * radius);
}

double geometric_bound(const ModelSpec& model, double b, double l) {
  validate(model);
  std::visit(
      Overloaded{
          [](const OpticalModel&) {
            throw Error(ErrorKind::InvalidModel,
                        "geometric bound is defined for piezo and Nelson (d2 = 0)");
          },
          [](const PiezoModel&) {},
          [](const NelsonModel& m) {
            if (m.d2 != 0.0) throw Error(ErrorKind::InvalidModel, "geometric bound needs d2 = 0");
          },
      },
      model);
  if (!(b > 0.0)) throw Error(ErrorKind::NonPositiveWidth, "b = " + std::to_string(b));
  if (!(l > 1.0)) throw Error(ErrorKind::RatioNotAboveOne, "l = " + std::to_string(l));
  const double l3 = l * l * l;
  // F_0 itself, so the bound can never fall an ulp below it.
  const double close = bracket_zero(model, b, b * l);
  const double far = kPi2 * l / (2.0 * b * (l - 1.0)) + 16.0 * kPi2 * l3 / (l - 1.0) +
                     8.0 * kPi2 * l3 / (b * (l - 1.0));
  return std::max(close, far);
}

double a_threshold_zero(const ModelSpec& model, double alpha, double a0, double a1) {
  validate(model);
  check_widths(a0, a1);
  const double alpha2 = alpha * alpha;
  const double attraction = std::visit(
      Overloaded{
          [&](const OpticalModel&) { return 2.0 * alpha2; },
          [&](const PiezoModel& m) { return 8.0 * c_constants(m.cutoff).c2 * alpha2; },
          [&](const NelsonModel& m) {
            return m.d1 * alpha2 + m.d2 * std::pow(alpha, 8);
          },
      },
      model);
  return (a0 + a1) * (attraction + kPi2 / (2.0 * a1 * a1));
}

double a_threshold_n(const ModelSpec& model, double alpha, std::size_t n,
                     const PartitionSchedule& unscaled) {
  validate(model);
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "a_threshold_n needs n >= 1");
  const double s_prev = unscaled.partial_sum(n - 1);
  const double s_next = unscaled.partial_sum(n + 1);
  const double a_min = std::min(unscaled.width(n + 1), unscaled.width(n));
  const double radius = unscaled.pin_radius(n);
  const double gap = s_prev - 2.0 * radius;
  if (!(gap > 0.0)) {
    throw Error(ErrorKind::PinningViolation, "separation gap not positive", n);
  }
  const double cross = std::holds_alternative<OpticalModel>(model) ? kSqrt2 : 8.0 * kPi2;
  return s_next * (kPi2 / (2.0 * a_min * a_min) + cross * alpha / gap +
                   kPi2 / (2.0 * radius * radius));
}

}  // namespace nobind
