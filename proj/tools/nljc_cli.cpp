// nljc: simulate a scenario, list presets, or locate revivals in a CSV series.
//
// exit codes: 0 ok, 2 invalid input, 3 oracle deviation or integration failure, 4 I/O

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nljc/errors.hpp"
#include "nljc/scenario.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalid = 2, kOracle = 3, kIo = 4 };

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nljc::IoError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SimulateArgs {
  std::string config_path;
  std::string preset_name;
  std::string output;
  std::string format;
  bool oracle = false;
  bool counter_rotating = false;
  unsigned workers = 0;
  std::size_t oracle_step_budget = 0;
};

int simulate(const SimulateArgs& a) {
  nljc::ScenarioConfig cfg;
  if (!a.preset_name.empty()) cfg = nljc::preset(a.preset_name);
  if (!a.config_path.empty()) cfg = nljc::parse_config(slurp(a.config_path), cfg);
  if (!a.output.empty()) cfg.output.path = a.output;
  if (!a.format.empty()) {
    cfg.output.format = nljc::parse_format(a.format);
  } else if (!a.output.empty() && a.output.size() > 5 && a.output.substr(a.output.size() - 5) == ".json") {
    cfg.output.format = nljc::OutputFormat::Json;
  }
  if (a.oracle) cfg.options.oracle_check = true;
  if (a.counter_rotating) cfg.options.counter_rotating_diagnostic = true;
  cfg.validate();

  nljc::RunOptions run;
  run.workers = a.workers;
  if (a.oracle_step_budget) run.oracle.max_steps_per_level = a.oracle_step_budget;
  const nljc::ScenarioResult result = nljc::run_scenario(cfg, run);
  nljc::emit(cfg, result);

  double drift = 0.0;
  const double mass = cfg.distribution().captured_mass;
  for (const auto& r : result.records) drift = std::max(drift, std::abs(r.norm - mass));
  std::fprintf(stderr, "%zu samples, gamma t in [%g, %g], max |norm - captured mass| = %.3e\n",
               result.records.size(), cfg.time.t_start, cfg.time.t_end, drift);
  if (cfg.options.counter_rotating_diagnostic) {
    std::fprintf(stderr, "counter-rotating terms: max |W_rwa - W_full| = %.3e\n",
                 result.max_counter_rotating_deviation);
  }
  if (cfg.options.oracle_check) {
    std::fprintf(stderr, "ODE oracle: max amplitude deviation = %.3e (tolerance %.0e)\n",
                 result.max_oracle_deviation, nljc::kOracleTolerance);
    if (!result.oracle_passed()) {
      std::fprintf(stderr, "error: oracle deviation exceeds tolerance\n");
      return kOracle;
    }
  }
  return kOk;
}

int revivals(const std::string& input, double threshold) {
  const auto records = nljc::read_csv_file(input);
  const auto events = nljc::measure_revivals(records, threshold);
  std::printf("t_center,envelope_amplitude\n");
  for (const auto& e : events) std::printf("%.17g,%.17g\n", e.t_center, e.envelope_amplitude);
  if (records.size() < 100) std::fprintf(stderr, "note: fewer than 100 samples, no revivals measured\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"f-deformed k-photon Jaynes-Cummings simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "run one scenario and write its time series");
  simulate_cmd->add_option("--config", sim.config_path, "scenario JSON document");
  simulate_cmd->add_option("--preset", sim.preset_name, "start from a named preset (the config overrides it)");
  simulate_cmd->add_option("--output", sim.output, "output file (default: config output.path, else stdout)");
  simulate_cmd->add_option("--format", sim.format, "csv or json");
  simulate_cmd->add_flag("--oracle", sim.oracle, "check the closed form against the ODE oracle");
  simulate_cmd->add_flag("--counter-rotating-diagnostic", sim.counter_rotating,
                         "compare with the integration that keeps counter-rotating terms");
  simulate_cmd->add_option("--workers", sim.workers, "worker threads (0: all cores)");
  simulate_cmd->add_option("--oracle-step-budget", sim.oracle_step_budget,
                           "attempted ODE steps allowed per Fock level");

  auto* list_cmd = app.add_subcommand("list-presets", "print the preset names");

  std::string revival_input;
  double threshold = 0.2;
  auto* revivals_cmd = app.add_subcommand("revivals", "revival centers of an emitted CSV series");
  revivals_cmd->add_option("--input", revival_input, "CSV produced by simulate")->required();
  revivals_cmd->add_option("--threshold", threshold, "fraction of the initial envelope");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*simulate_cmd) {
      if (sim.config_path.empty() && sim.preset_name.empty()) {
        std::fprintf(stderr, "error: simulate needs --config or --preset\n");
        return kInvalid;
      }
      return simulate(sim);
    }
    if (*list_cmd) {
      for (const auto& name : nljc::list_presets()) std::printf("%s\n", name.c_str());
      return kOk;
    }
    if (*revivals_cmd) return revivals(revival_input, threshold);
  } catch (const nljc::IntegrationFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOracle;
  } catch (const nljc::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const nljc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInvalid;
  }
  return kOk;
}
