#include "nobind/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nobind/feynman_kac.hpp"
#include "nobind/model_bounds.hpp"
#include "nobind/optimizer.hpp"
#include "nobind/partition.hpp"

namespace nobind {
namespace {

constexpr double kPi = std::numbers::pi;

CheckResult make(std::string name, double residual, double tolerance, std::string detail = {}) {
  return {std::move(name), residual <= tolerance, residual, tolerance, std::move(detail)};
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> out(points);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return out;
}

}  // namespace

CheckResult check_partition_identity(std::size_t samples) {
  const PartitionSchedule schedule = linear_tail_schedule(kReferenceOpticalPoint);
  const double t_max = schedule.partial_sum(schedule.truncation() + 5);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = i % 2 == 0 ? t_max * unit(rng)
                                : std::exp(std::log(1e-6) + (std::log(t_max) - std::log(1e-6)) * unit(rng));
    const std::size_t k = schedule.interval_of(t);
    double sum = 0.0;
    for (std::size_t n = k >= 2 ? k - 2 : 0; n <= k + 2; ++n) {
      const double phi = phi_eval(n, t, schedule);
      sum += phi * phi;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return make("partition_identity", worst, 1e-12, std::to_string(samples) + " samples");
}

CheckResult check_derivative_collapse() {
  const PartitionSchedule schedule = linear_tail_schedule(kReferenceOpticalPoint);
  double worst = 0.0;
  for (std::size_t m = 1; m <= schedule.truncation() + 5; ++m) {
    const double lo = schedule.partial_sum(m - 1);
    const double width = schedule.width(m);
    const double expected = kPi * kPi / (4.0 * width * width);
    for (int j = 1; j < 64; ++j) {
      const double t = lo + width * j / 64.0;
      worst = std::max(worst, std::abs(grad_sq_sum(t, schedule) - expected) / expected);
    }
  }
  return make("derivative_collapse", worst, 1e-12);
}

CheckResult check_pinning_norm() {
  double worst = 0.0;
  for (double radius : {0.5, 1.0, 7.27 / 4.0, 2.0}) {
    worst = std::max(worst, std::abs(pinning_diagnostics(radius).l2_norm - 1.0));
  }
  return make("pinning_l2_norm", worst, 1e-10);
}

CheckResult check_pinning_rayleigh() {
  double worst = 0.0;
  for (double radius : {0.5, 1.0, 7.27 / 4.0}) {
    const double expected = kPi * kPi / (2.0 * radius * radius);
    const double q = pinning_diagnostics(radius).rayleigh_quotient();
    worst = std::max(worst, std::abs(q - expected) / expected);
  }
  return make("pinning_rayleigh_quotient", worst, 1e-8);
}

CheckResult check_kernel_identity() {
  const std::vector<double> distances = log_grid(1e-3, 1e3, 13);
  std::vector<double> lags = log_grid(1e-3, 1e2, 11);
  lags.insert(lags.begin(), 0.0);
  double worst = 0.0;
  std::size_t evaluated = 0;
  for (double cutoff : {0.5, 1.0, 2.0, 10.0}) {
    for (double d : distances) {
      for (double tau : lags) {
        const KernelQuery q{d, tau, cutoff};
        const double closed = piezo_kernel(q);
        const double oracle = piezo_kernel(q, true);
        worst = std::max(worst, std::abs(closed - oracle) / std::abs(oracle));
        ++evaluated;
      }
    }
  }
  return make("kernel_identity", worst, 1e-8, std::to_string(evaluated) + " grid points");
}

CheckResult check_brace_bound(std::size_t samples) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * unit(rng));
  };
  double lowest = 2.0;
  double highest = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double d = log_uniform(1e-3, 1e3);
    const double tau = i % 10 == 0 ? 0.0 : log_uniform(1e-4, 1e2);
    const double cutoff = log_uniform(1e-2, 1e2);
    const double brace = piezo_brace(d, tau, cutoff);
    lowest = std::min(lowest, brace);
    highest = std::max(highest, brace);
  }
  const double excess = std::max({0.0, -lowest, highest - 2.0});
  std::ostringstream detail;
  detail << "range [" << lowest << ", " << highest << "]";
  return make("brace_bound", excess, 0.0, detail.str());
}

CheckResult check_renorm_integral() {
  double worst = 0.0;
  for (double cutoff : {0.5, 1.0, 2.0, 10.0}) {
    const double closed = 8.0 * kPi * std::log1p(0.5 * cutoff);
    worst = std::max(worst, std::abs(renorm_integral(cutoff) - closed));
    // Independent route: the cutoff constant C1.
    worst = std::max(worst, std::abs(c_constants(cutoff).c1 - renorm_integral(cutoff)));
  }
  return make("renorm_integral", worst, 1e-10);
}

CheckResult check_jensen_rate() {
  double worst = std::abs(jensen_rate(OpticalModel{}, 1.0) - 1.0);
  for (double cutoff : {0.5, 1.0, 2.0, 10.0}) {
    const double closed = 8.0 * kPi * std::log1p(0.5 * cutoff);
    worst = std::max(worst, std::abs(jensen_rate(PiezoModel{cutoff}, 1.0) - closed));
  }
  return make("jensen_rate", worst, 1e-10);
}

CheckResult check_separation_bound() {
  double worst = 0.0;  // largest (exact - bound) / bound, must stay <= 0
  for (double d : {1e-2, 0.1, 1.0, 10.0, 100.0}) {
    for (double t : log_grid(1e-3, 1e4, 15)) {
      const SeparationCheck s = separation_bound_check(d, t);
      worst = std::max(worst, (s.exact - s.bound) / s.bound);
    }
  }
  return make("separation_bound", worst, 0.0);
}

CheckResult check_separation_saturation() {
  double worst = 0.0;  // largest shortfall of exact / bound below 0.99
  for (double d : {1e-2, 1.0, 10.0}) {
    const SeparationCheck s = separation_bound_check(d, 1e3 * d);
    worst = std::max(worst, 0.99 - s.exact / s.bound);
  }
  return make("separation_saturation", std::max(0.0, worst), 0.0, "exact / bound > 0.99 at T/D = 1e3");
}

std::vector<CheckResult> run_verification(unsigned /*threads*/) {
  return {check_partition_identity(), check_derivative_collapse(), check_pinning_norm(),
          check_pinning_rayleigh(),   check_kernel_identity(),     check_brace_bound(),
          check_renorm_integral(),    check_jensen_rate(),         check_separation_bound(),
          check_separation_saturation()};
}

}  // namespace nobind
