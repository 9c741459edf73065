#include "nobind/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "nobind/error.hpp"
#include "nobind/numerics.hpp"

namespace nobind {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
constexpr std::size_t kDim = 4;
using Vec = std::array<double, kDim>;

// Relative slack when comparing consecutive F_n, which agree to O(1/n^2).
constexpr double kMonotoneSlack = 1e-14;

TruncatedPoint decode(const Vec& u) {
  return {std::exp(u[0]), std::exp(u[1]), std::exp(u[2]), 1.0 / (1.0 + std::exp(-u[3]))};
}

Vec encode(const TruncatedPoint& p) {
  return {std::log(p.b0), std::log(p.b1), std::log(p.b2), std::log(p.x / (1.0 - p.x))};
}

bool in_domain(const TruncatedPoint& p) {
  const auto ok = [](double b) { return b > 0.0 && std::isfinite(b); };
  return ok(p.b0) && ok(p.b1) && ok(p.b2) && p.x > kRatioMargin &&
         p.x < 1.0 - kRatioMargin;
}

struct LocalResult {
  TruncatedPoint point;
  double value = kInf;
  std::size_t evaluations = 0;
  bool converged = false;
};

// One Nelder-Mead descent from `start` with the given initial step.
// Returns when the spread of simplex values drops below tol or the budget
// runs out.
struct Descent {
  Vec best;
  double value = kInf;
  bool converged = false;
};

template <class F>
Descent nelder_mead(F&& f, const Vec& start, double step, double tol,
                    std::size_t& budget) {
  std::array<Vec, kDim + 1> simplex;
  std::array<double, kDim + 1> values;
  simplex[0] = start;
  for (std::size_t i = 0; i < kDim; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step;
  }
  for (std::size_t i = 0; i <= kDim; ++i) {
    values[i] = f(simplex[i]);
    if (budget > 0) --budget;
  }

  std::array<std::size_t, kDim + 1> order;
  const auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    auto s = simplex;
    auto v = values;
    for (std::size_t i = 0; i <= kDim; ++i) {
      simplex[i] = s[order[i]];
      values[i] = v[order[i]];
    }
  };
  const auto eval = [&](const Vec& p) {
    if (budget > 0) --budget;
    return f(p);
  };
  const auto blend = [](const Vec& a, const Vec& b, double w) {
    Vec out;
    for (std::size_t i = 0; i < kDim; ++i) out[i] = a[i] + w * (b[i] - a[i]);
    return out;
  };

  bool converged = false;
  while (budget > 0) {
    sort_simplex();
    const double spread = values[kDim] - values[0];
    if (std::isfinite(values[kDim]) && spread <= tol) {
      converged = true;
      break;
    }
    Vec centroid{};
    for (std::size_t i = 0; i < kDim; ++i) {
      for (std::size_t d = 0; d < kDim; ++d) centroid[d] += simplex[i][d] / kDim;
    }
    const Vec& worst = simplex[kDim];
    const Vec reflected = blend(centroid, worst, -1.0);
    const double f_r = eval(reflected);
    if (f_r < values[0]) {
      const Vec expanded = blend(centroid, worst, -2.0);
      const double f_e = eval(expanded);
      if (f_e < f_r) {
        simplex[kDim] = expanded;
        values[kDim] = f_e;
      } else {
        simplex[kDim] = reflected;
        values[kDim] = f_r;
      }
      continue;
    }
    if (f_r < values[kDim - 1]) {
      simplex[kDim] = reflected;
      values[kDim] = f_r;
      continue;
    }
    const bool outside = f_r < values[kDim];
    const Vec contracted = outside ? blend(centroid, reflected, 0.5)
                                   : blend(centroid, worst, 0.5);
    const double f_c = eval(contracted);
    if (f_c < std::min(f_r, values[kDim])) {
      simplex[kDim] = contracted;
      values[kDim] = f_c;
      continue;
    }
    for (std::size_t i = 1; i <= kDim; ++i) {
      simplex[i] = blend(simplex[0], simplex[i], 0.5);
      values[i] = eval(simplex[i]);
    }
  }
  sort_simplex();
  return {simplex[0], values[0], converged};
}

LocalResult local_search(const ModelSpec& model, const TruncatedPoint& start,
                         double tol, std::size_t max_evaluations) {
  const auto objective = [&model](const Vec& u) {
    return truncated_objective(model, decode(u));
  };
  std::size_t budget = max_evaluations;
  Vec current = encode(start);
  double current_value = objective(current);
  bool converged = false;
  // Restart from the incumbent with a fresh simplex until a restart no longer
  // improves by more than tol; this un-sticks the simplex at the F_0 = F_1 kink.
  for (double step = 0.25; budget > 0;) {
    const Descent d = nelder_mead(objective, current, step, tol, budget);
    const double gain = current_value - d.value;
    if (d.value < current_value) {
      current = d.best;
      current_value = d.value;
    }
    if (d.converged && gain <= tol) {
      converged = true;
      break;
    }
    step = std::max(0.5 * step, 1e-3);
  }
  return {decode(current), current_value, max_evaluations - budget, converged};
}

TruncatedPoint random_start(std::uint64_t seed, std::size_t index) {
  const double lo = std::log(0.5);
  const double hi = std::log(50.0);
  const auto draw = [&](std::uint64_t slot) {
    return uniform_open(hash_counter(seed, index, slot));
  };
  return {std::exp(lo + (hi - lo) * draw(0)), std::exp(lo + (hi - lo) * draw(1)),
          std::exp(lo + (hi - lo) * draw(2)), 0.1 + 0.8 * draw(3)};
}

double limit_of_brackets(const ModelSpec& model, const TruncatedPoint& p) {
  // t_{n+1} / t_{n-1} -> 1 and t_{n+1} / b_n^2 -> 1 / (2 b2).
  const double localization = kPi2 / (4.0 * p.b2);
  if (std::holds_alternative<OpticalModel>(model)) {
    return localization + std::numbers::sqrt2 / (1.0 - p.x);
  }
  return localization + 8.0 * kPi2 / (1.0 - p.x);
}

}  // namespace

void TailCertificate::require_monotone() const {
  if (first_violation) {
    throw Error(ErrorKind::TailViolation,
                "F_{n+1} > F_n at n = " + std::to_string(*first_violation),
                *first_violation);
  }
}

PartitionSchedule linear_tail_schedule(const TruncatedPoint& point) {
  return PartitionSchedule({point.b0, point.b1, point.b2}, {point.x, point.x},
                           LinearTail{point.b2, point.x});
}

double truncated_objective(const ModelSpec& model, const TruncatedPoint& point) {
  if (!in_domain(point)) return kInf;
  const double f0 = bracket_zero(model, point.b0, point.b1);
  const double f1 = bracket_n(model, 1, linear_tail_schedule(point));
  const double v = std::max(f0, f1);
  return std::isfinite(v) ? v : kInf;
}

OptimumReport evaluate_point(const ModelSpec& model, const TruncatedPoint& point) {
  validate(model);
  if (!in_domain(point)) {
    throw Error(ErrorKind::DomainViolation, "point outside (0, inf)^3 x (0, 1)");
  }
  OptimumReport report;
  report.model = model;
  report.point = point;
  const double f0 = bracket_zero(model, point.b0, point.b1);
  const double f1 = bracket_n(model, 1, linear_tail_schedule(point));
  report.per_region = {{0, f0}, {1, f1}};
  report.value = std::max(f0, f1);
  report.achieving_index = f1 > f0 ? 1 : 0;
  report.converted_value = kinetic_rescale(report.value);
  return report;
}

OptimumReport minimize_truncated(const ModelSpec& model, const OptimizerOptions& options) {
  validate(model);
  if (!(options.tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "optimizer tolerance must be positive");
  }
  const std::size_t total = options.warm_starts.size() + options.starts;
  if (total == 0) throw Error(ErrorKind::InvalidArgument, "no optimizer starts");

  std::vector<LocalResult> results(total);
  parallel_for(total, options.threads, [&](std::size_t i) {
    const TruncatedPoint start =
        i < options.warm_starts.size()
            ? options.warm_starts[i]
            : random_start(options.seed, i - options.warm_starts.size());
    if (!in_domain(start)) {
      throw Error(ErrorKind::DomainViolation, "warm start outside the domain");
    }
    results[i] = local_search(model, start, options.tol, options.max_evaluations);
  });

  // Deterministic merge: lowest value, then lexicographically smallest point.
  const LocalResult* best = nullptr;
  std::size_t evaluations = 0;
  std::size_t converged = 0;
  for (const LocalResult& r : results) {
    evaluations += r.evaluations;
    if (!r.converged) continue;
    ++converged;
    if (best == nullptr || r.value < best->value ||
        (r.value == best->value && r.point < best->point)) {
      best = &r;
    }
  }
  if (best == nullptr) {
    throw Error(ErrorKind::NoConvergence,
                "no start reached value change below " + std::to_string(options.tol));
  }

  OptimumReport report = evaluate_point(model, best->point);
  if (report.value != best->value) {
    throw Error(ErrorKind::NoConvergence, "re-evaluation does not reproduce the optimum");
  }
  report.evaluations = evaluations;
  report.converged_starts = converged;
  return report;
}

FullSchedule build_full_schedule(const OptimumReport& opt, std::size_t n_check) {
  if (n_check < 10) {
    throw Error(ErrorKind::InvalidArgument, "tail check needs n_check >= 10");
  }
  PartitionSchedule schedule = linear_tail_schedule(opt.point);
  std::vector<RegionValue> regions;
  regions.reserve(n_check + 1);
  regions.push_back({0, bracket_zero(opt.model, opt.point.b0, opt.point.b1)});
  TailCertificate cert;
  cert.checked_up_to = n_check;
  double previous = bracket_n(opt.model, 1, schedule);
  regions.push_back({1, previous});
  for (std::size_t n = 1; n <= n_check; ++n) {
    const double next = bracket_n(opt.model, n + 1, schedule);
    if (!cert.first_violation && next > previous * (1.0 + kMonotoneSlack)) {
      cert.first_violation = n;
    }
    if (n + 1 <= n_check) regions.push_back({n + 1, next});
    previous = next;
  }
  cert.last_value = regions.back().value;
  cert.asymptotic_limit = limit_of_brackets(opt.model, opt.point);
  return {std::move(schedule), cert, std::move(regions)};
}

OptimumReport certify(OptimumReport opt, std::size_t n_check) {
  FullSchedule full = build_full_schedule(opt, n_check);
  opt.per_region = std::move(full.per_region);
  opt.tail = full.certificate;
  const auto top = std::max_element(
      opt.per_region.begin(), opt.per_region.end(),
      [](const RegionValue& a, const RegionValue& b) { return a.value < b.value; });
  opt.value = top->value;
  opt.achieving_index = top->n;
  opt.converted_value = kinetic_rescale(opt.value);
  return opt;
}

double no_binding_constant(const ModelSpec& model, const OptimumReport& opt) {
  if (!opt.tail || !opt.tail->monotone()) {
    throw Error(ErrorKind::UncertifiedTail,
                opt.tail ? "tail certificate records a violation"
                         : "report carries no tail certificate");
  }
  if (const auto* nelson = std::get_if<NelsonModel>(&model)) {
    return opt.value * nelson->alpha;
  }
  return opt.value;
}

double kinetic_rescale(double value) {
  if (!(value >= 0.0)) throw Error(ErrorKind::InvalidArgument, "kinetic_rescale needs value >= 0");
  return value * std::numbers::sqrt2;
}

std::vector<CurvePoint> lambda_curve(std::span<const double> cutoffs,
                                     const OptimizerOptions& options,
                                     std::size_t n_check) {
  std::vector<CurvePoint> curve;
  curve.reserve(cutoffs.size());
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    OptimizerOptions local = options;
    if (i > 0) local.warm_starts.insert(local.warm_starts.begin(), curve.back().report.point);
    CurvePoint point;
    point.cutoff = cutoffs[i];
    point.report = minimize_truncated(PiezoModel{cutoffs[i]}, local);
    curve.push_back(std::move(point));
  }
  // Every bracket grows with the cutoff, so the optimum at a larger cutoff is
  // a feasible start whose value already undercuts a non-monotone neighbour.
  for (std::size_t pass = 0; pass < cutoffs.size(); ++pass) {
    bool repaired = false;
    for (std::size_t i = curve.size(); i-- > 1;) {
      if (curve[i - 1].report.value <= curve[i].report.value) continue;
      OptimizerOptions local = options;
      local.warm_starts.insert(local.warm_starts.begin(), curve[i].report.point);
      curve[i - 1].report = minimize_truncated(PiezoModel{curve[i - 1].cutoff}, local);
      repaired = true;
    }
    if (!repaired) break;
  }
  for (CurvePoint& point : curve) {
    point.report = certify(std::move(point.report), n_check);
    point.constant = no_binding_constant(point.report.model, point.report);
  }
  return curve;
}

}  // namespace nobind
