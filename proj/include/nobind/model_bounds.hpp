#pragma once

// Region-by-region no-binding brackets for the optical, piezoelectric and
// Nelson models, and the cutoff constants C1(cutoff), C2(cutoff).

#include <cstddef>
#include <string>
#include <variant>

#include "nobind/partition.hpp"

namespace nobind {

struct OpticalModel {
  friend bool operator==(const OpticalModel&, const OpticalModel&) = default;
};

struct PiezoModel {
  double cutoff = 0.0;  ///< ultraviolet cutoff (Debye wave number)
  friend bool operator==(const PiezoModel&, const PiezoModel&) = default;
};

/// D1, D2 come from an external lower bound; there are no defaults.
struct NelsonModel {
  double d1 = 0.0;
  double d2 = 0.0;
  double alpha = 0.0;
  friend bool operator==(const NelsonModel&, const NelsonModel&) = default;
};

using ModelSpec = std::variant<OpticalModel, PiezoModel, NelsonModel>;

/// Throws InvalidModel unless cutoff > 0 (piezo) or d1, d2, alpha >= 0 (Nelson).
void validate(const ModelSpec& model);
std::string model_name(const ModelSpec& model);

/// (sin x - x cos x) / x^2, with its Taylor series below 1e-2.
double phi_shape(double x);

struct PhiNorms {
  double sup_norm = 0.0;      ///< max over x >= 0 of |phi_shape|
  double argmax = 0.0;
  double over_x_l1 = 0.0;     ///< integral over [0, inf) of |phi_shape(x) / x|
  double truncation_point = 0.0;
  double tail_bound = 0.0;    ///< integral beyond truncation of (1 + x) / x^3
  double tail_estimate = 0.0; ///< mean-value estimate of the neglected tail
};

/// Computes the norms from scratch; see cached_phi_norms() for the shared copy.
PhiNorms phi_norms(double quad_tol = 1e-10);
/// Computed once per process to 1e-10 and reused.
const PhiNorms& cached_phi_norms();

struct CutoffConstants {
  double c1 = 0.0;  ///< 8 pi log(1 + cutoff/2)
  double c2 = 0.0;  ///< 32 pi^2 [over_x_l1 + 4 sup_norm log(1 + cutoff/2)]^2
  double phi_sup = 0.0;
  double phi_over_x_l1 = 0.0;
};

CutoffConstants c_constants(double cutoff);

/// F_0 for the region where the particles are close.
double bracket_zero(const ModelSpec& model, double b0, double b1);

/// F_n, n >= 1, for the region t_{n-1} <= |x - y| <= t_{n+1}. Throws
/// PinningViolation when t_{n-1} - 2 L_n <= 0.
double bracket_n(const ModelSpec& model, std::size_t n,
                 const PartitionSchedule& schedule);

/// Closed-form majorant of the brackets for b_i = b l^i, L_n = t_{n-1}/4.
/// Piezo, or Nelson with d2 = 0 (d1 replaces 8 C2). Throws RatioNotAboveOne.
double geometric_bound(const ModelSpec& model, double b, double l);

/// Same brackets in unscaled lengths (widths a_i, radii R_n) at coupling
/// alpha, returned as the Coulomb strength A they require.
double a_threshold_zero(const ModelSpec& model, double alpha, double a0, double a1);
double a_threshold_n(const ModelSpec& model, double alpha, std::size_t n,
                     const PartitionSchedule& unscaled);

}  // namespace nobind
