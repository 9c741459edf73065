#include "nobind/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>

#include "nobind/error.hpp"

namespace nobind {
namespace {

using nlohmann::json;

void reject_unknown(const json& object, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) {
    throw Error(ErrorKind::ParseError, std::string(where) + " must be an object");
  }
  for (const auto& item : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw Error(ErrorKind::UnknownKey,
                  "unknown key \"" + item.key() + "\" in " + std::string(where));
    }
  }
}

const json& require(const json& object, std::string_view where, const char* key) {
  const auto it = object.find(key);
  if (it == object.end()) {
    throw Error(ErrorKind::MissingField,
                std::string(where) + " needs \"" + key + "\"");
  }
  return *it;
}

double as_number(const json& value, std::string_view name) {
  if (!value.is_number()) {
    throw Error(ErrorKind::ParseError, std::string(name) + " must be a number");
  }
  return value.get<double>();
}

std::uint64_t as_unsigned(const json& value, std::string_view name) {
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
    throw Error(ErrorKind::ParseError, std::string(name) + " must be a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

template <class T>
void read_optional(const json& object, const char* key, T& out, std::string_view where) {
  const auto it = object.find(key);
  if (it == object.end()) return;
  const std::string name = std::string(where) + "." + key;
  if constexpr (std::is_same_v<T, double>) {
    out = as_number(*it, name);
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw Error(ErrorKind::ParseError, name + " must be a boolean");
    out = it->template get<bool>();
  } else {
    out = static_cast<T>(as_unsigned(*it, name));
  }
}

ModelSpec parse_model(const json& node) {
  if (!node.is_object()) throw Error(ErrorKind::ParseError, "model must be an object");
  const json& kind_node = require(node, "model", "kind");
  if (!kind_node.is_string()) throw Error(ErrorKind::ParseError, "model.kind must be a string");
  const std::string kind = kind_node.get<std::string>();
  ModelSpec model;
  if (kind == "optical") {
    reject_unknown(node, "model", {"kind"});
    model = OpticalModel{};
  } else if (kind == "piezo") {
    reject_unknown(node, "model", {"kind", "lambda"});
    model = PiezoModel{as_number(require(node, "model", "lambda"), "model.lambda")};
  } else if (kind == "nelson") {
    reject_unknown(node, "model", {"kind", "d1", "d2", "alpha"});
    model = NelsonModel{as_number(require(node, "model", "d1"), "model.d1"),
                        as_number(require(node, "model", "d2"), "model.d2"),
                        as_number(require(node, "model", "alpha"), "model.alpha")};
  } else {
    throw Error(ErrorKind::InvalidModel, "unknown model kind \"" + kind + "\"");
  }
  validate(model);
  return model;
}

json model_to_json(const ModelSpec& model) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, OpticalModel>) {
          return {{"kind", "optical"}};
        } else if constexpr (std::is_same_v<T, PiezoModel>) {
          return {{"kind", "piezo"}, {"lambda", m.cutoff}};
        } else {
          return {{"kind", "nelson"}, {"d1", m.d1}, {"d2", m.d2}, {"alpha", m.alpha}};
        }
      },
      model);
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Optimize: return "optimize";
    case Command::BoundCurve: return "bound-curve";
    case Command::Verify: return "verify";
    case Command::Mc: return "mc";
    case Command::Kernels: return "kernels";
  }
  return "verify";
}

std::optional<Command> command_from_string(std::string_view name) {
  for (Command c : {Command::Optimize, Command::BoundCurve, Command::Verify, Command::Mc,
                    Command::Kernels}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

RunConfig parse_config(std::string_view text, std::optional<Command> fallback_command) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError,
                "at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  reject_unknown(root, "config",
                 {"command", "model", "optimizer", "mc", "lambda_grid", "kernels", "output",
                  "threads"});

  RunConfig config;
  if (const auto it = root.find("command"); it != root.end()) {
    if (!it->is_string()) throw Error(ErrorKind::ParseError, "command must be a string");
    const auto command = command_from_string(it->get<std::string>());
    if (!command) {
      throw Error(ErrorKind::ParseError, "unknown command \"" + it->get<std::string>() + "\"");
    }
    config.command = *command;
  } else if (fallback_command) {
    config.command = *fallback_command;
  } else {
    throw Error(ErrorKind::MissingField, "config needs \"command\"");
  }

  if (const auto it = root.find("model"); it != root.end()) config.model = parse_model(*it);

  if (const auto it = root.find("optimizer"); it != root.end()) {
    reject_unknown(*it, "optimizer", {"starts", "tol", "n_check", "seed"});
    read_optional(*it, "starts", config.optimizer.starts, "optimizer");
    read_optional(*it, "tol", config.optimizer.tol, "optimizer");
    read_optional(*it, "n_check", config.optimizer.n_check, "optimizer");
    read_optional(*it, "seed", config.optimizer.seed, "optimizer");
    if (!(config.optimizer.tol > 0.0)) {
      throw Error(ErrorKind::ParseError, "optimizer.tol must be positive");
    }
    if (config.optimizer.n_check < 10) {
      throw Error(ErrorKind::ParseError, "optimizer.n_check must be >= 10");
    }
  }

  if (const auto it = root.find("mc"); it != root.end()) {
    reject_unknown(*it, "mc", {"alpha", "T", "dt", "count", "seed", "dimension", "mode"});
    read_optional(*it, "alpha", config.mc.alpha, "mc");
    read_optional(*it, "T", config.mc.horizon, "mc");
    read_optional(*it, "dt", config.mc.dt, "mc");
    read_optional(*it, "count", config.mc.count, "mc");
    read_optional(*it, "seed", config.mc.seed, "mc");
    read_optional(*it, "dimension", config.mc.dimension, "mc");
    if (const auto mode = it->find("mode"); mode != it->end()) {
      if (*mode == "free") {
        config.mc.mode = EndpointMode::Free;
      } else if (*mode == "bridge") {
        config.mc.mode = EndpointMode::Bridge;
      } else {
        throw Error(ErrorKind::ParseError, "mc.mode must be \"free\" or \"bridge\"");
      }
    }
  }

  if (const auto it = root.find("lambda_grid"); it != root.end()) {
    if (!it->is_array()) throw Error(ErrorKind::ParseError, "lambda_grid must be an array");
    for (const json& v : *it) {
      const double cutoff = as_number(v, "lambda_grid[]");
      if (!(cutoff > 0.0)) throw Error(ErrorKind::ParseError, "lambda_grid values must be positive");
      config.lambda_grid.push_back(cutoff);
    }
  }

  if (const auto it = root.find("kernels"); it != root.end()) {
    reject_unknown(*it, "kernels", {"oracle", "points"});
    read_optional(*it, "oracle", config.kernels.oracle, "kernels");
    const json& points = require(*it, "kernels", "points");
    if (!points.is_array()) throw Error(ErrorKind::ParseError, "kernels.points must be an array");
    for (const json& p : points) {
      reject_unknown(p, "kernels.points[]", {"d", "tau", "lambda"});
      config.kernels.points.push_back(
          {as_number(require(p, "kernels.points[]", "d"), "d"),
           as_number(require(p, "kernels.points[]", "tau"), "tau"),
           as_number(require(p, "kernels.points[]", "lambda"), "lambda")});
    }
  }

  if (const auto it = root.find("output"); it != root.end()) {
    reject_unknown(*it, "output", {"path", "format"});
    if (const auto path = it->find("path"); path != it->end()) {
      if (!path->is_string()) throw Error(ErrorKind::ParseError, "output.path must be a string");
      config.output.path = path->get<std::string>();
    }
    if (const auto format = it->find("format"); format != it->end()) {
      if (*format == "json") {
        config.output.format = OutputFormat::Json;
      } else if (*format == "csv") {
        config.output.format = OutputFormat::Csv;
      } else {
        throw Error(ErrorKind::ParseError, "output.format must be \"json\" or \"csv\"");
      }
    }
  }

  if (const auto it = root.find("threads"); it != root.end()) {
    config.threads = static_cast<unsigned>(as_unsigned(*it, "threads"));
  }

  // Per-command requirements.
  switch (config.command) {
    case Command::Optimize:
      if (!config.model) throw Error(ErrorKind::MissingField, "optimize needs \"model\"");
      break;
    case Command::Mc:
      if (!config.model) throw Error(ErrorKind::MissingField, "mc needs \"model\"");
      if (std::holds_alternative<NelsonModel>(*config.model)) {
        throw Error(ErrorKind::InvalidModel, "mc supports the optical and piezo models");
      }
      break;
    case Command::BoundCurve:
      if (!root.contains("lambda_grid")) {
        throw Error(ErrorKind::MissingField, "bound-curve needs \"lambda_grid\"");
      }
      break;
    case Command::Kernels:
      if (!root.contains("kernels")) {
        throw Error(ErrorKind::MissingField, "kernels needs \"kernels\"");
      }
      break;
    case Command::Verify:
      break;
  }
  return config;
}

nlohmann::ordered_json config_to_json(const RunConfig& config) {
  nlohmann::ordered_json out;
  out["command"] = std::string(to_string(config.command));
  if (config.model) out["model"] = model_to_json(*config.model);
  out["optimizer"] = {{"starts", config.optimizer.starts},
                      {"tol", config.optimizer.tol},
                      {"n_check", config.optimizer.n_check},
                      {"seed", config.optimizer.seed}};
  out["mc"] = {{"alpha", config.mc.alpha},
               {"T", config.mc.horizon},
               {"dt", config.mc.dt},
               {"count", config.mc.count},
               {"seed", config.mc.seed},
               {"dimension", config.mc.dimension},
               {"mode", config.mc.mode == EndpointMode::Free ? "free" : "bridge"}};
  out["lambda_grid"] = config.lambda_grid;
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (const KernelQuery& q : config.kernels.points) {
    points.push_back({{"d", q.distance}, {"tau", q.lag}, {"lambda", q.cutoff}});
  }
  out["kernels"] = {{"oracle", config.kernels.oracle}, {"points", points}};
  out["output"] = {{"path", config.output.path},
                   {"format", config.output.format == OutputFormat::Json ? "json" : "csv"}};
  out["threads"] = config.threads;
  return out;
}

}  // namespace nobind
