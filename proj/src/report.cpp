#include "nobind/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nobind/error.hpp"
#include "nobind/feynman_kac.hpp"
#include "nobind/optimizer.hpp"
#include "nobind/verify.hpp"

namespace nobind {
namespace {

using ojson = nlohmann::ordered_json;

// Regions listed in the JSON report; CSV carries all of them.
constexpr std::size_t kJsonRegions = 32;
constexpr double kPriorOpticalThreshold = 52.1;

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump_into(const ojson& v, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case ojson::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& item : v.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += ojson(item.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(item.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case ojson::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_into(item, indent, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case ojson::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

ojson model_json(const ModelSpec& model) {
  ojson m;
  m["kind"] = model_name(model);
  if (const auto* p = std::get_if<PiezoModel>(&model)) m["lambda"] = p->cutoff;
  if (const auto* n = std::get_if<NelsonModel>(&model)) {
    m["d1"] = n->d1;
    m["d2"] = n->d2;
    m["alpha"] = n->alpha;
  }
  return m;
}

ojson point_json(const TruncatedPoint& p) {
  return ojson{{"b0", p.b0}, {"b1", p.b1}, {"b2", p.b2}, {"x", p.x}};
}

ojson tail_json(const TailCertificate& tail) {
  ojson t;
  t["checked_up_to"] = tail.checked_up_to;
  t["monotone"] = tail.monotone();
  t["first_violation"] =
      tail.first_violation ? ojson(*tail.first_violation) : ojson(nullptr);
  t["last_value"] = tail.last_value;
  t["asymptotic_limit"] = tail.asymptotic_limit;
  return t;
}

OptimizerOptions optimizer_options(const RunConfig& config) {
  OptimizerOptions options;
  options.starts = config.optimizer.starts;
  options.tol = config.optimizer.tol;
  options.seed = config.optimizer.seed;
  options.threads = config.threads;
  return options;
}

Report run_optimize(const RunConfig& config) {
  const ModelSpec& model = *config.model;
  OptimumReport opt = minimize_truncated(model, optimizer_options(config));
  opt = certify(std::move(opt), config.optimizer.n_check);

  Report report;
  report.command = Command::Optimize;
  ojson& body = report.body;
  body["model"] = model_json(model);
  body["point"] = point_json(opt.point);
  body["value"] = opt.value;
  body["converted_value"] = opt.converted_value;
  body["achieving_index"] = opt.achieving_index;
  body["evaluations"] = opt.evaluations;
  body["converged_starts"] = opt.converged_starts;
  const double f0 = opt.per_region[0].value;
  const double f1 = opt.per_region[1].value;
  body["balance_f0_f1"] = std::abs(f0 - f1) / std::max(f0, f1);
  body["tail"] = tail_json(*opt.tail);
  report.passed = opt.tail->monotone();
  if (report.passed) {
    const double constant = no_binding_constant(model, opt);
    body["no_binding_constant"] = constant;
    body["constant_kind"] = std::holds_alternative<NelsonModel>(model) ? "A_threshold" : "alpha_multiplier";
  } else {
    body["no_binding_constant"] = nullptr;
  }
  if (std::holds_alternative<OpticalModel>(model)) {
    const OptimumReport reference = evaluate_point(model, kReferenceOpticalPoint);
    body["reference_point"] = point_json(kReferenceOpticalPoint);
    body["reference_value"] = reference.value;
    body["reduction_vs_prior"] = 1.0 - opt.converted_value / kPriorOpticalThreshold;
  }
  ojson regions = ojson::array();
  for (std::size_t i = 0; i < opt.per_region.size() && i < kJsonRegions; ++i) {
    regions.push_back({{"n", opt.per_region[i].n}, {"F", opt.per_region[i].value}});
  }
  body["per_region"] = regions;
  body["per_region_listed"] = regions.size();

  report.table.header = {"n", "F_n"};
  for (const RegionValue& r : opt.per_region) {
    report.table.rows.push_back({static_cast<std::int64_t>(r.n), r.value});
  }
  return report;
}

Report run_bound_curve(const RunConfig& config) {
  const std::vector<CurvePoint> curve =
      lambda_curve(config.lambda_grid, optimizer_options(config), config.optimizer.n_check);
  Report report;
  report.command = Command::BoundCurve;
  ojson rows = ojson::array();
  report.table.header = {"lambda", "C", "converted", "b0", "b1", "b2", "x",
                         "achieving_index", "tail_monotone"};
  bool monotone = true;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const CurvePoint& p = curve[i];
    if (i > 0 && p.constant < curve[i - 1].constant) monotone = false;
    rows.push_back({{"lambda", p.cutoff},
                    {"C", p.constant},
                    {"converted", kinetic_rescale(p.constant)},
                    {"point", point_json(p.report.point)},
                    {"achieving_index", p.report.achieving_index},
                    {"tail", tail_json(*p.report.tail)}});
    report.table.rows.push_back({p.cutoff, p.constant, kinetic_rescale(p.constant),
                                 p.report.point.b0, p.report.point.b1, p.report.point.b2,
                                 p.report.point.x,
                                 static_cast<std::int64_t>(p.report.achieving_index),
                                 p.report.tail->monotone()});
  }
  report.body["curve"] = rows;
  report.body["nondecreasing"] = monotone;
  report.passed = monotone;
  return report;
}

Report run_verify(const RunConfig& config) {
  const std::vector<CheckResult> checks = run_verification(config.threads);
  Report report;
  report.command = Command::Verify;
  ojson list = ojson::array();
  report.table.header = {"check", "passed", "residual", "tolerance", "detail"};
  for (const CheckResult& c : checks) {
    report.passed = report.passed && c.passed;
    list.push_back({{"check", c.name},
                    {"passed", c.passed},
                    {"residual", c.residual},
                    {"tolerance", c.tolerance},
                    {"detail", c.detail}});
    report.table.rows.push_back({c.name, c.passed, c.residual, c.tolerance, c.detail});
  }
  report.body["checks"] = list;
  report.body["all_passed"] = report.passed;
  return report;
}

Report run_mc(const RunConfig& config) {
  const McConfig& mc = config.mc;
  PathEnsemble ensemble{mc.dimension, mc.horizon, mc.dt, mc.count, mc.seed, mc.mode, {}};
  const McProbe probe = mc_energy_probe(*config.model, mc.alpha, ensemble, config.threads);

  Report report;
  report.command = Command::Mc;
  ojson& body = report.body;
  body["model"] = model_json(*config.model);
  body["alpha"] = mc.alpha;
  body["T"] = mc.horizon;
  body["dt"] = mc.dt;
  body["count"] = mc.count;
  body["dimension"] = mc.dimension;
  body["mode"] = mc.mode == EndpointMode::Free ? "free" : "bridge";
  body["action_mean"] = probe.action_mean;
  body["action_stderr"] = probe.action_stderr;
  body["log_mean_exp"] = probe.log_mean_exp;
  body["action_mean_per_time"] = probe.action_mean / mc.horizon;
  body["log_mean_exp_per_time"] = probe.log_mean_exp / mc.horizon;
  body["jensen_rate"] = jensen_rate(*config.model, mc.alpha);
  report.passed = probe.log_mean_exp >= probe.action_mean;

  report.table.header = {"alpha", "T", "dt", "count", "action_mean", "action_stderr",
                         "log_mean_exp"};
  std::vector<Cell> row{mc.alpha, mc.horizon, mc.dt, static_cast<std::int64_t>(mc.count),
                        probe.action_mean, probe.action_stderr, probe.log_mean_exp};
  if (std::holds_alternative<OpticalModel>(*config.model) && mc.dimension == 3 &&
      mc.mode == EndpointMode::Free) {
    const double analytic = optical_self_action_mean(mc.alpha, mc.horizon);
    const double grid = optical_self_action_grid_mean(mc.alpha, mc.horizon, mc.dt);
    body["analytic_mean"] = analytic;
    body["grid_analytic_mean"] = grid;
    body["z_score"] = probe.action_stderr > 0.0
                          ? (probe.action_mean - analytic) / probe.action_stderr
                          : 0.0;
    report.table.header.insert(report.table.header.end(), {"analytic_mean", "grid_analytic_mean"});
    row.insert(row.end(), {analytic, grid});
  }
  report.table.rows.push_back(std::move(row));
  return report;
}

Report run_kernels(const RunConfig& config) {
  Report report;
  report.command = Command::Kernels;
  report.table.header = {"d", "tau", "lambda", "kernel", "brace"};
  if (config.kernels.oracle) report.table.header.push_back("oracle");
  ojson rows = ojson::array();
  for (const KernelQuery& q : config.kernels.points) {
    const double kernel = piezo_kernel(q);
    const double brace = piezo_brace(q.distance, q.lag, q.cutoff);
    ojson row{{"d", q.distance}, {"tau", q.lag}, {"lambda", q.cutoff},
              {"kernel", kernel}, {"brace", brace}};
    std::vector<Cell> cells{q.distance, q.lag, q.cutoff, kernel, brace};
    if (config.kernels.oracle) {
      const double oracle = piezo_kernel(q, true);
      row["oracle"] = oracle;
      cells.push_back(oracle);
    }
    rows.push_back(std::move(row));
    report.table.rows.push_back(std::move(cells));
  }
  report.body["kernels"] = rows;
  return report;
}

}  // namespace

Report execute(const RunConfig& config) {
  switch (config.command) {
    case Command::Optimize: return run_optimize(config);
    case Command::BoundCurve: return run_bound_curve(config);
    case Command::Verify: return run_verify(config);
    case Command::Mc: return run_mc(config);
    case Command::Kernels: return run_kernels(config);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown command");
}

std::string version() { return NOBIND_VERSION; }

namespace {

// Everything that determines the numbers; the destination path does not.
RunConfig provenance_config(const RunConfig& config) {
  RunConfig copy = config;
  copy.output.path.clear();
  return copy;
}

}  // namespace

std::string config_hash(const RunConfig& config) {
  // FNV-1a over the canonical compact config text.
  const std::string text = dump_json(config_to_json(provenance_config(config)), -1);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t provenance_seed(const RunConfig& config) {
  return config.command == Command::Mc ? config.mc.seed : config.optimizer.seed;
}

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  dump_into(value, indent, 0, out);
  return out;
}

std::string csv_field(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char c : v) {
            if (c == '"') quoted += '"';
            quoted += c;
          }
          quoted += '"';
          return quoted;
        }
      },
      cell);
}

std::string render(const Report& report, const RunConfig& config, OutputFormat format) {
  const std::string hash = config_hash(config);
  const std::uint64_t seed = provenance_seed(config);
  if (format == OutputFormat::Json) {
    ojson out;
    out["command"] = std::string(to_string(report.command));
    out["passed"] = report.passed;
    out["provenance"] = {{"config_hash", hash},
                         {"seed", seed},
                         {"version", version()},
                         {"config", config_to_json(provenance_config(config))}};
    out["result"] = report.body;
    return dump_json(out) + "\n";
  }
  std::ostringstream csv;
  std::vector<std::string> header = report.table.header;
  header.insert(header.end(), {"config_hash", "seed", "version"});
  for (std::size_t i = 0; i < header.size(); ++i) {
    csv << (i ? "," : "") << csv_field(header[i]);
  }
  csv << "\r\n";
  for (const auto& row : report.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << csv_field(row[i]);
    csv << ',' << csv_field(hash) << ',' << static_cast<unsigned long long>(seed) << ','
        << csv_field(version()) << "\r\n";
  }
  return csv.str();
}

void emit(const Report& report, const RunConfig& config, OutputFormat format,
          const std::string& path) {
  const std::string text = render(report, config, format);
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error(ErrorKind::IoError, "cannot write to standard output");
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  file << text;
  file.flush();
  if (!file) throw Error(ErrorKind::IoError, "failed writing " + path);
}

}  // namespace nobind
