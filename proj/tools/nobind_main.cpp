// nobind: command-line front end.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nobind/config.hpp"
#include "nobind/error.hpp"
#include "nobind/report.hpp"

namespace {

enum Exit : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3 };

int exit_code_for(nobind::ErrorKind kind) {
  using nobind::ErrorKind;
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::MissingField:
    case ErrorKind::UnknownKey:
    case ErrorKind::InvalidModel:
    case ErrorKind::InvalidArgument:
    case ErrorKind::StepGridInvalid:
    case ErrorKind::CostGuardExceeded:
    case ErrorKind::IoError:
      return kUsage;
    case ErrorKind::TailViolation:
    case ErrorKind::UncertifiedTail:
      return kCheckFailed;
    default:
      return kNumeric;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nobind::Error(nobind::ErrorKind::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified no-binding thresholds for polaron models"};
  app.set_version_flag("--version", nobind::version());
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_path;
  std::string format_name;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;

  for (const char* name : {"optimize", "bound-curve", "verify", "mc", "kernels"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "output file (default: standard output)");
    sub->add_option("--format", format_name, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads, "worker threads, 0 = all cores");
    sub->add_option("--seed", seed, "overrides optimizer and Monte Carlo seeds");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const std::string command_name = app.get_subcommands().front()->get_name();
  const auto command = nobind::command_from_string(command_name);

  try {
    nobind::RunConfig config =
        config_path.empty() ? nobind::parse_config("{}", command)
                            : nobind::parse_config(read_file(config_path), command);
    if (config.command != *command) {
      throw nobind::Error(nobind::ErrorKind::InvalidArgument,
                          "config is for '" + std::string(nobind::to_string(config.command)) +
                              "' but '" + command_name + "' was requested");
    }
    if (threads) {
      config.threads = *threads;
    } else if (const char* env = std::getenv("NOBIND_THREADS"); env && *env) {
      try {
        config.threads = static_cast<unsigned>(std::stoul(env));
      } catch (const std::exception&) {
        throw nobind::Error(nobind::ErrorKind::InvalidArgument,
                            "NOBIND_THREADS is not a number: " + std::string(env));
      }
    }
    if (seed) {
      config.optimizer.seed = *seed;
      config.mc.seed = *seed;
    }
    if (!format_name.empty()) {
      config.output.format =
          format_name == "csv" ? nobind::OutputFormat::Csv : nobind::OutputFormat::Json;
    }
    if (!out_path.empty()) config.output.path = out_path;

    const nobind::Report report = nobind::execute(config);
    nobind::emit(report, config, config.output.format, config.output.path);
    if (!report.passed) {
      std::cerr << "nobind: one or more checks failed\n";
      return kCheckFailed;
    }
    return kOk;
  } catch (const nobind::Error& e) {
    std::cerr << "nobind: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "nobind: " << e.what() << '\n';
    return kNumeric;
  }
}
