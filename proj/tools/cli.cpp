#include "cli.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include <CLI11.hpp>

#include "delaysafe/errors.hpp"
#include "delaysafe/scenario.hpp"

namespace delaysafe::cli {

namespace {

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw ConfigError("--values: cannot parse '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError("--values: empty list");
  return values;
}

void set_param(ScenarioConfig& cfg, const std::string& param, double value) {
  if (param == "alpha") {
    cfg.safety.field.alpha = value;
  } else if (param == "b0") {
    cfg.safety.field.b0 = value;
  } else if (param == "vfo_gain") {
    cfg.vfo_gain = value;
  } else if (param == "u_max") {
    cfg.u_max = value;
  } else {
    throw ConfigError("--param: unsupported parameter '" + param +
                      "' (alpha, b0, vfo_gain, u_max)");
  }
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const ScenarioConfig cfg = load_config(path);
  out << "ok name=" << cfg.name << " steps=" << cfg.step_count() << "\n";
  return kExitOk;
}

int cmd_run(const std::string& path, const std::string& csv, bool metrics,
            std::ostream& out) {
  const ScenarioConfig cfg = load_config(path);
  const SimTrace trace = run_scenario(cfg);
  if (!csv.empty()) export_csv(trace, csv);
  if (trace.empty()) {
    out << "samples=0\n";
    return kExitOk;
  }
  const Metrics m = compute_metrics(trace, cfg);
  if (metrics) {
    out << format_metrics(m);
  } else {
    out << "samples=" << m.samples << " settling_time_s="
        << (m.settling_time ? format_number(*m.settling_time) : "none")
        << " violations=" << m.violations << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const std::string& path, const std::string& param,
              const std::string& values_text, std::ostream& out) {
  const ScenarioConfig base = load_config(path);
  const std::vector<double> values = parse_values(values_text);
  std::vector<ScenarioConfig> configs;
  for (double v : values) {
    ScenarioConfig cfg = base;
    set_param(cfg, param, v);
    cfg.validate();
    configs.push_back(std::move(cfg));
  }

  // Independent simulations; each owns all of its state.
  std::vector<std::future<Metrics>> jobs;
  for (const auto& cfg : configs) {
    jobs.push_back(std::async(std::launch::async, [&cfg] {
      return compute_metrics(run_scenario(cfg), cfg);
    }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Metrics m = jobs[i].get();
    out << param << "=" << format_number(values[i])
        << " b_max=" << format_number(m.b_max) << " violations=" << m.violations
        << " override_intervals=" << m.override_intervals << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Delayed differential-drive robot: two-layer Smith predictor, "
               "VFO tracking and barrier-certificate heading filter"};
  app.require_subcommand(1);

  std::string config;
  std::string csv;
  bool metrics = false;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario");
  run_cmd->add_option("config", config, "scenario JSON file")->required();
  run_cmd->add_option("--out", csv, "write the trace as CSV");
  run_cmd->add_flag("--metrics", metrics, "print every metric as key=value");

  std::string param;
  std::string values;
  auto* sweep_cmd = app.add_subcommand("sweep", "rerun a scenario over parameter values");
  sweep_cmd->add_option("config", config, "scenario JSON file")->required();
  sweep_cmd->add_option("--param", param, "alpha | b0 | vfo_gain | u_max")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")->required();

  auto* validate_cmd = app.add_subcommand("validate", "check a scenario file");
  validate_cmd->add_option("config", config, "scenario JSON file")->required();

  // CLI11 parses in reverse order from a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(config, csv, metrics, out);
    if (*sweep_cmd) return cmd_sweep(config, param, values, out);
    return cmd_validate(config, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace delaysafe::cli
