#pragma once

// Run configuration: the JSON schema read by the command-line tool.
//
// {
//   "command": "optimize" | "bound-curve" | "verify" | "mc" | "kernels",
//   "model": {"kind": "optical"} | {"kind": "piezo", "lambda": L}
//          | {"kind": "nelson", "d1": D1, "d2": D2, "alpha": a},
//   "optimizer": {"starts": 32, "tol": 1e-8, "n_check": 10000, "seed": 0},
//   "mc": {"alpha": 1, "T": 8, "dt": 0.01, "count": 1000, "seed": 1,
//          "dimension": 3, "mode": "free" | "bridge"},
//   "lambda_grid": [0.5, 1, 2, 5, 10],
//   "kernels": {"oracle": false, "points": [{"d": 1, "tau": 0, "lambda": 1}]},
//   "output": {"path": "report.json", "format": "json" | "csv"},
//   "threads": 0
// }
//
// Unknown keys anywhere are errors.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nobind/feynman_kac.hpp"
#include "nobind/model_bounds.hpp"

namespace nobind {

enum class Command { Optimize, BoundCurve, Verify, Mc, Kernels };
enum class OutputFormat { Json, Csv };

std::string_view to_string(Command command);
std::optional<Command> command_from_string(std::string_view name);

struct OptimizerConfig {
  std::size_t starts = 32;
  double tol = 1e-8;
  std::size_t n_check = 10000;
  std::uint64_t seed = 0;
  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct McConfig {
  double alpha = 1.0;
  double horizon = 8.0;
  double dt = 1e-2;
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::size_t dimension = 3;
  EndpointMode mode = EndpointMode::Free;
  friend bool operator==(const McConfig&, const McConfig&) = default;
};

struct KernelsConfig {
  bool oracle = false;
  std::vector<KernelQuery> points;
  friend bool operator==(const KernelsConfig&, const KernelsConfig&) = default;
};

struct OutputConfig {
  std::string path;  ///< empty: standard output
  OutputFormat format = OutputFormat::Json;
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  Command command = Command::Verify;
  std::optional<ModelSpec> model;
  OptimizerConfig optimizer;
  McConfig mc;
  std::vector<double> lambda_grid;
  KernelsConfig kernels;
  OutputConfig output;
  unsigned threads = 0;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates. `fallback_command` is used when the text has no
/// "command" key. Throws ParseError (with byte offset), MissingField,
/// UnknownKey or InvalidModel.
RunConfig parse_config(std::string_view text,
                       std::optional<Command> fallback_command = std::nullopt);

/// Inverse of parse_config: every field, defaults included.
nlohmann::ordered_json config_to_json(const RunConfig& config);

}  // namespace nobind
