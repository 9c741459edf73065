#pragma once

#include <string>
#include <vector>

namespace nobind {

/// One invariant check: passes when residual <= tolerance.
struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// The invariant suite behind `nobind verify`: partition identity and
/// derivative collapse, pinning diagnostics, piezo kernel identity and brace
/// bound, renormalization integral, Jensen rate, separation estimate.
std::vector<CheckResult> run_verification(unsigned threads = 1);

// Individual suites, shared with the acceptance tests.
CheckResult check_partition_identity(std::size_t samples = 100000);
CheckResult check_derivative_collapse();
CheckResult check_pinning_norm();
CheckResult check_pinning_rayleigh();
CheckResult check_kernel_identity();
CheckResult check_brace_bound(std::size_t samples = 100000);
CheckResult check_renorm_integral();
CheckResult check_jensen_rate();
CheckResult check_separation_bound();
CheckResult check_separation_saturation();

}  // namespace nobind
