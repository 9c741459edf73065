#pragma once

// Monte Carlo and quadrature checks of the path-integral ingredients:
// retarded kernels, Jensen rates, the separation estimate and the
// renormalization integral.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nobind/model_bounds.hpp"

namespace nobind {

enum class EndpointMode { Free, Bridge };

struct PathEnsemble {
  std::size_t dimension = 3;  ///< 3 (one particle) or 6 (two particles)
  double horizon = 1.0;       ///< T
  double dt = 1e-2;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  EndpointMode mode = EndpointMode::Free;
  /// Start point (Free) or pinned start = end point (Bridge); empty = origin.
  std::vector<double> anchor;

  /// T / dt, validated to be an integer >= 1 (two or more grid points).
  std::size_t steps() const;
  void validate() const;
};

/// Paths stored point-major: value(p, k, c) is coordinate c of path p at
/// time k * dt.
class PathCollection {
 public:
  PathCollection(std::size_t count, std::size_t points, std::size_t dimension, double dt);

  std::size_t count() const { return count_; }
  std::size_t points() const { return points_; }
  std::size_t dimension() const { return dimension_; }
  double dt() const { return dt_; }

  double& at(std::size_t p, std::size_t k, std::size_t c) {
    return data_[(p * points_ + k) * dimension_ + c];
  }
  double at(std::size_t p, std::size_t k, std::size_t c) const {
    return data_[(p * points_ + k) * dimension_ + c];
  }
  /// All points of path p, point-major.
  std::span<const double> path(std::size_t p) const {
    return {data_.data() + p * points_ * dimension_, points_ * dimension_};
  }

  friend bool operator==(const PathCollection&, const PathCollection&) = default;

 private:
  std::size_t count_;
  std::size_t points_;
  std::size_t dimension_;
  double dt_;
  std::vector<double> data_;
};

/// Brownian paths with independent N(0, dt) increments per coordinate;
/// Bridge mode pins both ends. Deterministic in the seed, and each path
/// depends only on (seed, path index). Throws StepGridInvalid.
PathCollection sample_paths(const PathEnsemble& ensemble, unsigned threads = 1);

/// One particle's trajectory inside a stored path: `points` positions of
/// 3 coordinates with the given stride between consecutive points.
struct Trajectory {
  std::span<const double> data;
  std::size_t offset = 0;  ///< index of coordinate 0 of the first point
  std::size_t stride = 3;
  std::size_t points = 0;

  const double* point(std::size_t k) const { return data.data() + offset + k * stride; }
};

Trajectory particle(std::span<const double> path, std::size_t dimension,
                    std::size_t particle_index);

struct KernelQuery {
  double distance = 1.0;  ///< d > 0
  double lag = 0.0;       ///< tau >= 0
  double cutoff = 1.0;    ///< Lambda > 0
  friend bool operator==(const KernelQuery&, const KernelQuery&) = default;
};

/// 4 pi {1 - e^{-L tau}[(tau/d) sin(L d) + cos(L d)]} / (d^2 + tau^2), or with
/// use_quadrature_oracle the integral 4 pi int_0^L e^{-r tau} sin(r d)/d dr.
double piezo_kernel(const KernelQuery& q, bool use_quadrature_oracle = false);

/// Closed-form kernel allowing d = 0 (its d -> 0 limit).
double piezo_kernel_value(double distance, double lag, double cutoff);

/// The brace factor of the closed form; lies in [0, 2].
double piezo_brace(double distance, double lag, double cutoff);

/// Model whose retarded action is evaluated (Nelson shares the piezo kernel).
using ActionModel = ModelSpec;

/// Treatment of the t = s line of an optical self term, where the kernel
/// blows up like (t - s)^{-1/2}. Both replace the diagonal node by the first
/// off-diagonal value f(t, t - dt):
///  - FirstOffDiagonal keeps the trapezoid half weight dt/2, which leaves an
///    O(sqrt(dt)) bias;
///  - SingularityCorrected uses the weight -zeta(1/2) dt, which cancels the
///    leading sqrt(dt) term of the trapezoid error for a u^{-1/2} singularity
///    and leaves O(dt^{3/2}).
enum class DiagonalRule { SingularityCorrected, FirstOffDiagonal };

/// -zeta(1/2).
inline constexpr double kSingularDiagonalWeight = 1.4603545088095868;

/// Trapezoidal double integral over 0 <= s <= t <= T of the kernel between
/// trajectory a at time t and trajectory b at time s, times alpha (the
/// optical kernel carries its 1/sqrt 2). Throws GridMismatch.
double pair_action(const ActionModel& model, const Trajectory& a, const Trajectory& b,
                   bool same_particle, double alpha, double dt,
                   DiagonalRule rule = DiagonalRule::SingularityCorrected);

/// Sum of pair_action over all particle pairs (m, n) of a 3- or 6-dim path.
double retarded_action(const ActionModel& model, std::span<const double> path,
                       std::size_t dimension, double alpha, double dt,
                       DiagonalRule rule = DiagonalRule::SingularityCorrected);

/// Exact expectation of the discretized optical self-action of one free
/// Brownian particle on the grid (T, dt), via E|X_t - X_s|^{-1} =
/// sqrt(2/pi) (t - s)^{-1/2}.
double optical_self_action_grid_mean(double alpha, double horizon, double dt,
                                     DiagonalRule rule = DiagonalRule::SingularityCorrected);

/// Continuum value (alpha/sqrt 2) sqrt(2/pi) int_0^T int_0^t e^{-u} u^{-1/2} du dt.
double optical_self_action_mean(double alpha, double horizon);

/// Per-time Jensen rate: alpha for optical; C1(cutoff) alpha for piezo,
/// by quadrature (cross-checked against 8 pi alpha log(1 + cutoff/2)).
double jensen_rate(const ModelSpec& model, double alpha);

struct SeparationCheck {
  double exact = 0.0;
  double bound = 0.0;
};

/// exact = 16 pi int_0^T arctan(t/D)/D dt, bound = 8 pi^2 T / D.
SeparationCheck separation_bound_check(double distance, double horizon);

/// int_{|k| <= cutoff} |k|^{-2} (|k|/2 + 1)^{-1} dk by radial quadrature.
double renorm_integral(double cutoff);

struct McProbe {
  double action_mean = 0.0;
  double action_stderr = 0.0;
  double log_mean_exp = 0.0;
  std::size_t samples = 0;
};

/// Cost guard on count * (T/dt)^2 kernel evaluations.
inline constexpr double kMcCostLimit = 1e10;

/// Samples the ensemble and summarizes the retarded action of each path.
/// Throws CostGuardExceeded.
McProbe mc_energy_probe(const ModelSpec& model, double alpha, const PathEnsemble& ensemble,
                        unsigned threads = 1);

}  // namespace nobind
