#include "nobind/feynman_kac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "nobind/error.hpp"
#include "nobind/numerics.hpp"

namespace nobind {
namespace {

constexpr double kPi = std::numbers::pi;

double distance3(const double* x, const double* y) {
  const double dx = x[0] - y[0];
  const double dy = x[1] - y[1];
  const double dz = x[2] - y[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Fills `out` (points x dimension) with path p of the ensemble.
void sample_path_into(const PathEnsemble& e, std::size_t p, std::span<double> out) {
  const std::size_t steps = e.steps();
  const std::size_t dim = e.dimension;
  const double scale = std::sqrt(e.dt);
  for (std::size_t c = 0; c < dim; ++c) out[c] = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    for (std::size_t c = 0; c < dim; ++c) {
      out[k * dim + c] = out[(k - 1) * dim + c] + scale * counter_normal(e.seed, p, k, c);
    }
  }
  if (e.mode == EndpointMode::Bridge) {
    // B_k = W_k - (k / M) W_M ends exactly where it starts.
    for (std::size_t k = 1; k <= steps; ++k) {
      const double frac = static_cast<double>(k) / static_cast<double>(steps);
      for (std::size_t c = 0; c < dim; ++c) {
        out[k * dim + c] -= frac * out[steps * dim + c];
      }
    }
    for (std::size_t c = 0; c < dim; ++c) out[steps * dim + c] = 0.0;
  }
  if (!e.anchor.empty()) {
    for (std::size_t k = 0; k <= steps; ++k) {
      for (std::size_t c = 0; c < dim; ++c) out[k * dim + c] += e.anchor[c];
    }
  }
}

// Kernel / (4 pi) by the power series of int_0^L e^{r z} dr, z = -tau + i d,
// accurate for L * sqrt(d^2 + tau^2) up to about 1 and exact at d = 0.
double piezo_series(double d, double tau, double cutoff) {
  double p = 1.0;  // Re z^j
  double r = 0.0;  // Im z^j / d
  double term_scale = 1.0;
  double sum = 0.0;
  const double rho = std::sqrt(d * d + tau * tau);
  double rho_power = 1.0;  // rho^(k-2)
  for (int k = 1; k <= 80; ++k) {
    term_scale *= cutoff / k;
    sum += term_scale * r;
    // |Im z^j / d| <= j rho^(j-1); single terms may vanish, so test the bound.
    if (k >= 2) {
      if (term_scale * (k - 1) * rho_power <= 1e-18 * std::abs(sum)) break;
      rho_power *= rho;
    }
    const double p_next = -tau * p - d * d * r;
    const double r_next = p - tau * r;
    p = p_next;
    r = r_next;
  }
  return sum;
}

double optical_kernel(double distance, double lag) {
  return std::exp(-lag) / (std::numbers::sqrt2 * distance);
}

}  // namespace

std::size_t PathEnsemble::steps() const {
  if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(dt) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::StepGridInvalid, "horizon and dt must be positive");
  }
  const double ratio = horizon / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorKind::StepGridInvalid,
                "T / dt = " + std::to_string(ratio) + " is not a positive integer");
  }
  return static_cast<std::size_t>(rounded);
}

void PathEnsemble::validate() const {
  if (dimension != 3 && dimension != 6) {
    throw Error(ErrorKind::InvalidArgument, "path dimension must be 3 or 6");
  }
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "path count must be positive");
  if (!anchor.empty() && anchor.size() != dimension) {
    throw Error(ErrorKind::InvalidArgument, "anchor size must match the dimension");
  }
  (void)steps();
}

PathCollection::PathCollection(std::size_t count, std::size_t points, std::size_t dimension,
                               double dt)
    : count_(count),
      points_(points),
      dimension_(dimension),
      dt_(dt),
      data_(count * points * dimension, 0.0) {}

PathCollection sample_paths(const PathEnsemble& ensemble, unsigned threads) {
  ensemble.validate();
  const std::size_t points = ensemble.steps() + 1;
  PathCollection paths(ensemble.count, points, ensemble.dimension, ensemble.dt);
  parallel_for(ensemble.count, threads, [&](std::size_t p) {
    double* first = &paths.at(p, 0, 0);
    sample_path_into(ensemble, p, {first, points * ensemble.dimension});
  });
  return paths;
}

Trajectory particle(std::span<const double> path, std::size_t dimension,
                    std::size_t particle_index) {
  if (dimension % 3 != 0 || particle_index >= dimension / 3) {
    throw Error(ErrorKind::InvalidArgument, "no such particle in the path");
  }
  return {path, 3 * particle_index, dimension, path.size() / dimension};
}

double piezo_brace(double distance, double lag, double cutoff) {
  const double rho2 = distance * distance + lag * lag;
  if (cutoff * std::sqrt(rho2) < 1.0) {
    return piezo_series(distance, lag, cutoff) * rho2;
  }
  const double oscillation = distance > 0.0
                                 ? (lag / distance) * std::sin(cutoff * distance)
                                 : lag * cutoff;
  return 1.0 - std::exp(-cutoff * lag) * (oscillation + std::cos(cutoff * distance));
}

double piezo_kernel_value(double distance, double lag, double cutoff) {
  const double rho2 = distance * distance + lag * lag;
  if (cutoff * std::sqrt(rho2) < 1.0) {
    return 4.0 * kPi * piezo_series(distance, lag, cutoff);
  }
  return 4.0 * kPi * piezo_brace(distance, lag, cutoff) / rho2;
}

double piezo_kernel(const KernelQuery& q, bool use_quadrature_oracle) {
  if (!(q.distance > 0.0) || !(q.lag >= 0.0) || !(q.cutoff > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "kernel query needs d > 0, tau >= 0, cutoff > 0");
  }
  if (!use_quadrature_oracle) return piezo_kernel_value(q.distance, q.lag, q.cutoff);

  // Integrate half-period by half-period of sin(r d).
  const double d = q.distance;
  const double tau = q.lag;
  const auto integrand = [d, tau](double r) { return std::exp(-r * tau) * std::sin(r * d) / d; };
  const double half_period = kPi / d;
  const auto pieces_needed =
      static_cast<std::size_t>(std::ceil(q.cutoff / half_period));
  std::vector<double> pieces;
  pieces.reserve(pieces_needed);
  for (std::size_t k = 0; k < pieces_needed; ++k) {
    const double lo = static_cast<double>(k) * half_period;
    const double hi = std::min(q.cutoff, lo + half_period);
    if (hi <= lo) break;
    pieces.push_back(integrate_relative(integrand, lo, hi, 1e-13).value);
  }
  return 4.0 * kPi * pairwise_sum(pieces);
}

double pair_action(const ActionModel& model, const Trajectory& a, const Trajectory& b,
                   bool same_particle, double alpha, double dt, DiagonalRule rule) {
  if (a.points != b.points || a.points < 2) {
    throw Error(ErrorKind::GridMismatch, "trajectories must share a grid of >= 2 points");
  }
  if (!(dt > 0.0)) throw Error(ErrorKind::GridMismatch, "dt must be positive");
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be >= 0");
  if (alpha == 0.0) return 0.0;
  const bool optical = std::holds_alternative<OpticalModel>(model);
  double cutoff = 0.0;
  if (const auto* piezo = std::get_if<PiezoModel>(&model)) {
    cutoff = piezo->cutoff;
  } else if (!optical) {
    throw Error(ErrorKind::InvalidModel, "retarded action is defined for optical and piezo");
  }
  const std::size_t m = a.points - 1;

  std::vector<double> decay;
  if (optical) {
    decay.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) decay[k] = std::exp(-static_cast<double>(k) * dt);
  }
  const auto kernel = [&](std::size_t i, std::size_t j) {
    const double dist = distance3(a.point(i), b.point(j));
    if (optical) return decay[i - j] / (std::numbers::sqrt2 * dist);
    return piezo_kernel_value(dist, static_cast<double>(i - j) * dt, cutoff);
  };
  const bool singular = optical && same_particle;
  const double diagonal_weight =
      rule == DiagonalRule::SingularityCorrected ? kSingularDiagonalWeight : 0.5;

  std::vector<double> rows(m, 0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    double inner = 0.5 * kernel(i, 0);
    for (std::size_t j = 1; j < i; ++j) inner += kernel(i, j);
    if (singular) {
      inner += diagonal_weight * kernel(i, i - 1);
    } else {
      inner += 0.5 * kernel(i, i);
    }
    rows[i - 1] = (i == m ? 0.5 : 1.0) * inner;
  }
  return alpha * dt * dt * pairwise_sum(rows);
}

double retarded_action(const ActionModel& model, std::span<const double> path,
                       std::size_t dimension, double alpha, double dt, DiagonalRule rule) {
  if (dimension != 3 && dimension != 6) {
    throw Error(ErrorKind::InvalidArgument, "path dimension must be 3 or 6");
  }
  if (path.size() % dimension != 0) {
    throw Error(ErrorKind::GridMismatch, "path length is not a multiple of the dimension");
  }
  const std::size_t particles = dimension / 3;
  double total = 0.0;
  for (std::size_t m = 0; m < particles; ++m) {
    for (std::size_t n = 0; n < particles; ++n) {
      total += pair_action(model, particle(path, dimension, m), particle(path, dimension, n),
                           m == n, alpha, dt, rule);
    }
  }
  return total;
}

double optical_self_action_grid_mean(double alpha, double horizon, double dt,
                                     DiagonalRule rule) {
  const PathEnsemble grid{3, horizon, dt, 1, 0, EndpointMode::Free, {}};
  const std::size_t m = grid.steps();
  // Expected kernel at lag k dt.
  std::vector<double> mean_kernel(m + 1, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    const double u = static_cast<double>(k) * dt;
    mean_kernel[k] = optical_kernel(1.0, u) * std::sqrt(2.0 / kPi) / std::sqrt(u);
  }
  const double diagonal_weight =
      rule == DiagonalRule::SingularityCorrected ? kSingularDiagonalWeight : 0.5;
  std::vector<double> rows(m, 0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    double inner = 0.5 * mean_kernel[i];
    for (std::size_t j = 1; j < i; ++j) inner += mean_kernel[i - j];
    inner += diagonal_weight * mean_kernel[1];
    rows[i - 1] = (i == m ? 0.5 : 1.0) * inner;
  }
  return alpha * dt * dt * pairwise_sum(rows);
}

double optical_self_action_mean(double alpha, double horizon) {
  // int_0^T (T - u) e^{-u} u^{-1/2} du = T gamma(1/2, T) - gamma(3/2, T).
  const double lower_half = boost::math::tgamma_lower(0.5, horizon);
  const double lower_three_halves = boost::math::tgamma_lower(1.5, horizon);
  return alpha / std::sqrt(kPi) * (horizon * lower_half - lower_three_halves);
}

double jensen_rate(const ModelSpec& model, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be >= 0");
  if (std::holds_alternative<OpticalModel>(model)) return alpha;
  const auto* piezo = std::get_if<PiezoModel>(&model);
  if (piezo == nullptr) {
    throw Error(ErrorKind::InvalidModel, "Jensen rate is defined for optical and piezo");
  }
  validate(model);
  // Radial form of int_{|k| <= L} |k|^{-1} (|k| + k^2/2)^{-1} dk.
  const QuadResult radial = integrate(
      [](double r) { return 4.0 * kPi * r * r / (r * (r + 0.5 * r * r)); }, 0.0,
      piezo->cutoff, 1e-12);
  const double closed = 8.0 * kPi * std::log1p(0.5 * piezo->cutoff);
  if (std::abs(radial.value - closed) > 1e-10 * std::max(1.0, closed)) {
    throw Error(ErrorKind::QuadratureFailure, "Jensen rate quadrature disagrees with 8 pi log(1 + L/2)");
  }
  return alpha * radial.value;
}

SeparationCheck separation_bound_check(double distance, double horizon) {
  if (!(distance > 0.0) || !(horizon > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "separation check needs D > 0 and T > 0");
  }
  const QuadResult outer = integrate_relative(
      [distance](double t) { return std::atan(t / distance) / distance; }, 0.0, horizon,
      1e-13);
  return {16.0 * kPi * outer.value, 8.0 * kPi * kPi * horizon / distance};
}

double renorm_integral(double cutoff) {
  if (!(cutoff >= 0.0)) throw Error(ErrorKind::InvalidArgument, "cutoff must be >= 0");
  if (cutoff == 0.0) return 0.0;
  const QuadResult radial = integrate(
      [](double r) { return 4.0 * kPi * r * r / (r * r * (0.5 * r + 1.0)); }, 0.0, cutoff,
      1e-12);
  return radial.value;
}

McProbe mc_energy_probe(const ModelSpec& model, double alpha, const PathEnsemble& ensemble,
                        unsigned threads) {
  ensemble.validate();
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be >= 0");
  const std::size_t steps = ensemble.steps();
  const double cost = static_cast<double>(ensemble.count) * static_cast<double>(steps) *
                      static_cast<double>(steps);
  if (cost > kMcCostLimit) {
    throw Error(ErrorKind::CostGuardExceeded,
                "count * (T/dt)^2 = " + std::to_string(cost) + " exceeds 1e10");
  }
  const std::size_t points = steps + 1;
  std::vector<double> actions(ensemble.count, 0.0);
  parallel_for(ensemble.count, threads, [&](std::size_t p) {
    std::vector<double> path(points * ensemble.dimension);
    sample_path_into(ensemble, p, path);
    actions[p] = retarded_action(model, path, ensemble.dimension, alpha, ensemble.dt);
  });

  McProbe out;
  out.samples = actions.size();
  const double n = static_cast<double>(actions.size());
  out.action_mean = pairwise_sum(actions) / n;
  if (actions.size() > 1) {
    std::vector<double> sq(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const double dev = actions[i] - out.action_mean;
      sq[i] = dev * dev;
    }
    out.action_stderr = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  const double top = *std::max_element(actions.begin(), actions.end());
  std::vector<double> shifted(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) shifted[i] = std::exp(actions[i] - top);
  out.log_mean_exp = top + std::log(pairwise_sum(shifted) / n);
  return out;
}

}  // namespace nobind
