#include "nobind/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <queue>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "nobind/error.hpp"

namespace nobind {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gk_panel(const std::function<double(double)>& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  Panel p{a, b, 0.0, 0.0, 0.0};
  // Depth 0 is a single rule; Boost reports the error on [-1, 1].
  p.value = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
  p.error *= std::abs(b - a) / 2.0;
  return p;
}

struct Totals {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

// Global adaptive bisection: always split the panel with the largest error.
template <class Done>
Totals adaptive_gk(const std::function<double(double)>& f, double a, double b, Done done) {
  constexpr std::size_t kMaxPanels = 20000;
  std::priority_queue<Panel> heap;
  heap.push(gk_panel(f, a, b));
  const auto totals = [&heap] {
    std::vector<Panel> panels;
    auto copy = heap;
    while (!copy.empty()) {
      panels.push_back(copy.top());
      copy.pop();
    }
    std::sort(panels.begin(), panels.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    std::vector<double> v, e, l;
    for (const Panel& p : panels) {
      v.push_back(p.value);
      e.push_back(p.error);
      l.push_back(p.l1);
    }
    return Totals{pairwise_sum(v), pairwise_sum(e), pairwise_sum(l)};
  };
  double err = heap.top().error;
  double l1 = heap.top().l1;
  while (!done(err, l1) && heap.size() < kMaxPanels) {
    const Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    const Panel left = gk_panel(f, worst.a, mid);
    const Panel right = gk_panel(f, mid, worst.b);
    err += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  return totals();
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol) {
  if (!(abs_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "quadrature tolerance must be positive");
  }
  if (a == b) return {};
  // Running sums drift; stop a little inside the target and recheck exactly.
  const Totals t = adaptive_gk(f, a, b, [abs_tol](double err, double) {
    return err <= 0.5 * abs_tol;
  });
  if (!std::isfinite(t.value) || t.error > abs_tol) {
    throw Error(ErrorKind::QuadratureFailure,
                "error estimate " + std::to_string(t.error) + " exceeds tolerance " +
                    std::to_string(abs_tol));
  }
  return {t.value, t.error};
}

QuadResult integrate_relative(const std::function<double(double)>& f, double a,
                              double b, double rel_tol) {
  if (!(rel_tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "quadrature tolerance must be positive");
  }
  if (a == b) return {};
  const Totals t = adaptive_gk(f, a, b, [rel_tol](double err, double l1) {
    return err <= 0.5 * rel_tol * l1;
  });
  if (!std::isfinite(t.value) || t.error > rel_tol * t.l1) {
    throw Error(ErrorKind::QuadratureFailure,
                "relative error estimate " + std::to_string(t.error / t.l1) +
                    " exceeds tolerance " + std::to_string(rel_tol));
  }
  return {t.value, t.error};
}

Extremum golden_section_max(const std::function<double(double)>& f, double a,
                            double b, double x_tol) {
  const double inv_phi = 1.0 / std::numbers::phi;
  double c = b - (b - a) * inv_phi;
  double d = a + (b - a) * inv_phi;
  double fc = f(c);
  double fd = f(d);
  while (b - a > x_tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_phi;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_phi;
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

double bracketed_root(const std::function<double(double)>& f, double a,
                      double b) {
  using boost::math::tools::eps_tolerance;
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      f, a, b, eps_tolerance<double>(std::numeric_limits<double>::digits - 2),
      iters);
  return 0.5 * (lo + hi);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ (b * 0xd6e8feb86659fd93ULL));
  h = mix64(h ^ (c * 0xa0761d6478bd642fULL));
  return h;
}

double uniform_open(std::uint64_t bits) {
  // 52 random bits, shifted off zero by half a step; the top value stays below 1.
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                      std::uint64_t c) {
  const std::uint64_t h1 = hash_counter(seed, a, b, 2 * c);
  const std::uint64_t h2 = hash_counter(seed, a, b, 2 * c + 1);
  const double u1 = uniform_open(h1);
  const double u2 = uniform_open(h2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace nobind
