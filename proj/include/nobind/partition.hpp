#pragma once

// Quadratic partition of unity of the interparticle distance and the
// single-particle pinning profile.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace nobind {

/// Smallest admissible distance of a pinning ratio from 0 or 1.
inline constexpr double kRatioMargin = 1e-9;

/// Beyond the stored widths: b_n = (n - 1) * b2 and x_n = ratio.
struct LinearTail {
  double b2 = 0.0;
  double ratio = 0.0;
};

/// Beyond the stored widths: b_n = b * l^n and x_n = ratio. The default
/// ratio 1/2 is the L_n = t_{n-1}/4 pinning choice.
struct GeometricTail {
  double b = 0.0;
  double l = 0.0;
  double ratio = 0.5;
};

using TailRule = std::variant<LinearTail, GeometricTail>;

/// Widths b_0..b_N, pinning ratios x_1..x_N and a closed-form rule for every
/// index beyond N. Immutable once built.
class PartitionSchedule {
 public:
  /// Validates and caches partial sums. Throws NonPositiveWidth,
  /// TruncationTooShort or RatioOutOfRange.
  PartitionSchedule(std::vector<double> widths, std::vector<double> ratios,
                    TailRule tail);

  /// Geometric schedule b_i = b l^i with x_n = ratio, stored up to `stored`.
  static PartitionSchedule geometric(double b, double l, double ratio = 0.5,
                                     std::size_t stored = 2);

  std::size_t truncation() const { return widths_.size() - 1; }
  const TailRule& tail() const { return tail_; }
  std::span<const double> stored_widths() const { return widths_; }
  std::span<const double> stored_ratios() const { return ratios_; }

  double width(std::size_t n) const;
  /// t_n = b_0 + ... + b_n.
  double partial_sum(std::size_t n) const;
  /// x_n for n >= 1.
  double ratio(std::size_t n) const;
  /// L_n = x_n t_{n-1} / 2 for n >= 1.
  double pin_radius(std::size_t n) const;

  /// Index k with t in [t_{k-1}, t_k) (k = 0 on [0, t_0)).
  std::size_t interval_of(double t) const;

  /// Copy with every width multiplied by `factor` (ratios unchanged).
  PartitionSchedule scaled(double factor) const;

 private:
  std::vector<double> widths_;
  std::vector<double> sums_;
  std::vector<double> ratios_;
  TailRule tail_;
};

/// phi_n(t): phi_0 is 1 on [0, a_0] then a cosine decay over a_1; phi_n for
/// n >= 1 is a sine rise over a_n followed by a cosine decay over a_{n+1}.
double phi_eval(std::size_t n, double t, const PartitionSchedule& schedule);

/// Sum over n of |phi_n'(t)|^2. At a knot the larger one-sided value is
/// returned.
double grad_sq_sum(double t, const PartitionSchedule& schedule);

/// Dirichlet ground state of -Laplacian/2 on the ball of radius R, as a
/// function of the distance r from the centre.
double pinning_profile(double r, double radius);
/// d/dr of pinning_profile.
double pinning_profile_derivative(double r, double radius);

struct PinningDiagnostics {
  double l2_norm = 0.0;
  /// (1/2) * integral of |grad f|^2; equals pi^2 / (2 R^2).
  double localization_error = 0.0;
  double rayleigh_quotient() const {
    return localization_error / (l2_norm * l2_norm);
  }
};

PinningDiagnostics pinning_diagnostics(double radius, double quad_tol = 1e-10);

}  // namespace nobind
