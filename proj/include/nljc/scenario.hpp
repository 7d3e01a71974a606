#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "nljc/dynamics.hpp"
#include "nljc/field_states.hpp"
#include "nljc/nonlinearity.hpp"
#include "nljc/observables.hpp"

namespace nljc {

/// Which deformation a scenario uses; "table" carries f(1..N).
struct NonlinearitySelector {
  enum class Kind { Identity, SqrtN, Table };
  Kind kind = Kind::Identity;
  std::vector<double> table;

  NonlinearitySpec build() const;
  bool operator==(const NonlinearitySelector&) const = default;
};

struct FieldConfig {
  FieldKind kind = FieldKind::Coherent;
  /// Mean photon number; derived from the temperature for thermal fields given as T.
  double nbar = 0.0;
  std::optional<double> temperature;
  std::optional<double> frequency;
  double hbar_over_kB = 7.638232577e-12;  // K s
  double tail_eps = kDefaultTailEps;

  bool operator==(const FieldConfig&) const = default;
};

/// Uniform grid in the scaled time gamma t.
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 50.0;
  std::size_t samples = 2000;

  std::vector<double> points() const;
  bool operator==(const TimeGrid&) const = default;
};

struct ScenarioOptions {
  bool oracle_check = false;
  bool counter_rotating_diagnostic = false;
  bool free_phase_on_coherence = false;

  bool operator==(const ScenarioOptions&) const = default;
};

enum class OutputFormat { Csv, Json };

struct OutputConfig {
  std::string path;  ///< empty: standard output
  OutputFormat format = OutputFormat::Csv;

  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  std::string name;  ///< preset name or empty
  ModelParams params;
  NonlinearitySelector nonlinearity;
  FieldConfig field;
  TimeGrid time;
  ScenarioOptions options;
  OutputConfig output;

  /// Throws ParseError for degenerate grids or tolerances and ValidationError
  /// for physics constraints.
  void validate() const;
  PhotonDistribution distribution() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// JSON document -> validated config. Keys absent from the document keep the
/// values of `base`; unknown keys are rejected with ParseError.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig parse_config(std::string_view text, const ScenarioConfig& base);
ScenarioConfig config_from_json(const nlohmann::json& doc, const ScenarioConfig& base = {});
/// Every resolved field, defaults included.
nlohmann::json config_to_json(const ScenarioConfig& config);

OutputFormat parse_format(std::string_view name);
std::string_view to_string(OutputFormat format);

ScenarioConfig preset(std::string_view name);
std::vector<std::string> list_presets();

/// Oracle threshold on the largest amplitude deviation.
inline constexpr double kOracleTolerance = 1e-6;

struct RunOptions {
  /// Worker threads over time samples; 0 picks the hardware concurrency.
  unsigned workers = 0;
  OracleOptions oracle;
};

struct ScenarioResult {
  std::vector<ObservableRecord> records;
  /// Per-sample max |closed form - ODE oracle| amplitude deviation (oracle_check only).
  std::vector<double> oracle_deviation;
  double max_oracle_deviation = 0.0;
  /// Per-sample |W_rwa - W_full| against the integration that keeps the
  /// counter-rotating terms (counter_rotating_diagnostic only).
  std::vector<double> counter_rotating_deviation;
  double max_counter_rotating_deviation = 0.0;

  bool oracle_passed() const { return max_oracle_deviation <= kOracleTolerance; }
};

/// Closed-form evolution and observables on every grid point. Time in the
/// records is gamma t; the dynamics run at t = (gamma t) / gamma.
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& run = {});

/// CSV columns: t, W, rho_ee, rho_gg, re_rho_eg, im_rho_eg, H_x, H_y, H_z, E_x, E_y, norm.
void write_csv(std::ostream& out, const std::vector<ObservableRecord>& records);
nlohmann::json records_to_json(const ScenarioConfig& config, const ScenarioResult& result);

/// Writes to config.output (standard output when the path is empty).
/// Empty records raise InvalidParameter before anything is created; an
/// unwritable path raises IoError.
void emit(const ScenarioConfig& config, const ScenarioResult& result);
void emit(const std::vector<ObservableRecord>& records, OutputFormat format, const std::string& path,
          const ScenarioConfig& metadata = {});

std::vector<ObservableRecord> read_csv(std::istream& in);
std::vector<ObservableRecord> read_csv_file(const std::string& path);
std::vector<ObservableRecord> records_from_json(const nlohmann::json& doc);

struct RevivalEvent {
  double t_center = 0.0;
  double envelope_amplitude = 0.0;
};

/// Revivals of the |W - mean W| envelope (sliding RMS over 2% of the grid).
/// The reference amplitude is the largest envelope within the first window.
/// After the envelope has collapsed below `threshold` times that reference,
/// each stretch back above it is one event, reported at its largest envelope.
/// Fewer than 100 samples give no events.
std::vector<RevivalEvent> measure_revivals(const std::vector<ObservableRecord>& records,
                                           double threshold = 0.2);
std::vector<double> revival_envelope(const std::vector<ObservableRecord>& records);

}  // namespace nljc
