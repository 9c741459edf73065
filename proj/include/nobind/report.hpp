#pragma once

// Orchestration of a run and machine-readable output.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "nobind/config.hpp"

namespace nobind {

using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

struct Report {
  Command command = Command::Verify;
  nlohmann::ordered_json body;  ///< JSON payload
  Table table;                  ///< CSV payload
  bool passed = true;           ///< every requested check held
};

/// Runs the command. Library errors propagate as nobind::Error.
Report execute(const RunConfig& config);

/// Provenance embedded in every output.
std::string config_hash(const RunConfig& config);
std::uint64_t provenance_seed(const RunConfig& config);
std::string version();

/// Serialized output: JSON with stable key order, or RFC-4180 CSV; floats
/// printed with 17 significant digits.
std::string render(const Report& report, const RunConfig& config, OutputFormat format);

/// Writes render() to `path` (standard output when empty). Throws IoError.
void emit(const Report& report, const RunConfig& config, OutputFormat format,
          const std::string& path);

/// JSON text with 17-significant-digit floats.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);
/// One RFC-4180 field.
std::string csv_field(const Cell& cell);

}  // namespace nobind
