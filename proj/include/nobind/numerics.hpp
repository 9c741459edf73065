#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace nobind {

/// Pairwise (tree) summation. The split points depend only on the length,
/// so the result is identical however the summands were produced.
double pairwise_sum(std::span<const double> values);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod integration of f over [a, b] to an absolute error
/// estimate below abs_tol. Throws QuadratureFailure when the estimate stays
/// above abs_tol at the deepest subdivision.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol);

/// As integrate(), but to an error estimate below rel_tol times the integral
/// of |f|.
QuadResult integrate_relative(const std::function<double(double)>& f, double a,
                              double b, double rel_tol);

/// Location and value of the maximum of a unimodal f on [a, b].
struct Extremum {
  double x = 0.0;
  double value = 0.0;
};
Extremum golden_section_max(const std::function<double(double)>& f, double a,
                            double b, double x_tol);

/// Root of f on [a, b]; f(a) and f(b) must differ in sign.
double bracketed_root(const std::function<double(double)>& f, double a,
                      double b);

/// Counter-based random source: every draw is a pure function of
/// (key, counter...), so streams can be generated in any order.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t a,
                           std::uint64_t b = 0, std::uint64_t c = 0);
/// Uniform in the open interval (0, 1).
double uniform_open(std::uint64_t bits);
/// Standard normal keyed by (seed, a, b, c).
double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                      std::uint64_t c);

/// 0 means "use hardware concurrency".
unsigned resolve_threads(unsigned requested);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Each index
/// is handled exactly once; body must only write to index-owned storage.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace nobind
