#pragma once

// Minimization of the truncated minimax objective F_0 v F_1, extension by the
// linear tail rule, and the resulting no-binding constants.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nobind/model_bounds.hpp"
#include "nobind/partition.hpp"

namespace nobind {

/// (b0, b1, b2, x): the free parameters of F_0 v F_1. The full schedule
/// continues with b_n = (n - 1) b2 and x_n = x.
struct TruncatedPoint {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double x = 0.0;

  friend bool operator==(const TruncatedPoint&, const TruncatedPoint&) = default;
  friend auto operator<=>(const TruncatedPoint&, const TruncatedPoint&) = default;
};

/// The fixed point b0 = 7.27, b1 = b2 = 3.44, x = 0.702.
inline constexpr TruncatedPoint kReferenceOpticalPoint{7.27, 3.44, 3.44, 0.702};

struct RegionValue {
  std::size_t n = 0;
  double value = 0.0;
};

struct TailCertificate {
  std::size_t checked_up_to = 0;
  /// First n with F_{n+1} > F_n, if any.
  std::optional<std::size_t> first_violation;
  /// F_{checked_up_to}: the empirical limit of the sequence.
  double last_value = 0.0;
  /// Closed-form limit of F_n as n -> infinity under the linear tail.
  double asymptotic_limit = 0.0;

  bool monotone() const { return !first_violation.has_value(); }
  /// Throws TailViolation carrying the offending index.
  void require_monotone() const;
};

struct OptimumReport {
  ModelSpec model;
  TruncatedPoint point;
  double value = 0.0;
  std::vector<RegionValue> per_region;
  std::size_t achieving_index = 0;
  std::optional<TailCertificate> tail;
  double converted_value = 0.0;
  std::size_t evaluations = 0;
  std::size_t converged_starts = 0;
};

struct OptimizerOptions {
  std::size_t starts = 32;
  double tol = 1e-8;
  std::size_t max_evaluations = 100000;  ///< per start
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Tried before the random starts.
  std::vector<TruncatedPoint> warm_starts;
};

/// Schedule (b0, b1, b2) with x_1 = x_2 = x and the linear tail.
PartitionSchedule linear_tail_schedule(const TruncatedPoint& point);

/// F_0 v F_1; +infinity outside the domain.
double truncated_objective(const ModelSpec& model, const TruncatedPoint& point);

/// Report for a fixed point, without any search.
OptimumReport evaluate_point(const ModelSpec& model, const TruncatedPoint& point);

/// Multi-start Nelder-Mead over (log b0, log b1, log b2, logit x). Throws
/// NoConvergence when no start meets `tol`.
OptimumReport minimize_truncated(const ModelSpec& model, const OptimizerOptions& options);

struct FullSchedule {
  PartitionSchedule schedule;
  TailCertificate certificate;
  std::vector<RegionValue> per_region;  ///< F_0 .. F_{n_check}
};

/// Evaluates F_1 .. F_{n_check + 1} under the linear tail and records the
/// first failure of F_{n+1} <= F_n.
FullSchedule build_full_schedule(const OptimumReport& opt, std::size_t n_check = 10000);

/// Attaches the tail certificate and the region values to the report.
OptimumReport certify(OptimumReport opt, std::size_t n_check = 10000);

/// Optical / piezo: the multiplier C in A >= C alpha. Nelson: the threshold
/// A itself at the model's alpha. Throws UncertifiedTail.
double no_binding_constant(const ModelSpec& model, const OptimumReport& opt);

/// Converts to the p^2 kinetic-energy convention.
double kinetic_rescale(double value);

struct CurvePoint {
  double cutoff = 0.0;
  OptimumReport report;
  double constant = 0.0;
};

/// Piezo constant C(cutoff) on a grid, warm-started along the grid and
/// repaired until nondecreasing.
std::vector<CurvePoint> lambda_curve(std::span<const double> cutoffs,
                                     const OptimizerOptions& options,
                                     std::size_t n_check = 10000);

}  // namespace nobind
