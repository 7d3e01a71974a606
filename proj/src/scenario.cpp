#include "nljc/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "nljc/errors.hpp"

namespace nljc {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// schema helpers

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.count(item.key())) {
      throw ParseError("unknown key '" + where + item.key() + "'");
    }
  }
}

const json& require_object(const json& doc, const std::string& name) {
  if (!doc.is_object()) throw ParseError("'" + name + "' must be an object");
  return doc;
}

double number_at(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ParseError("'" + where + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError("'" + where + key + "' must be finite");
  return x;
}

bool bool_at(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ParseError("'" + where + key + "' must be true or false");
  return v.get<bool>();
}

std::string string_at(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ParseError("'" + where + key + "' must be a string");
  return v.get<std::string>();
}

template <class T>
void read_number(const json& obj, const char* key, const std::string& where, T& out) {
  if (obj.contains(key)) out = static_cast<T>(number_at(obj, key, where));
}

std::size_t count_at(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) {
    throw ParseError("'" + where + key + "' must be a non-negative integer");
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x >= 0.0 && x == std::floor(x) && x < 9.0e15) return static_cast<std::size_t>(x);
  }
  throw ParseError("'" + where + key + "' must be a non-negative integer");
}

FieldKind parse_field_kind(const std::string& s) {
  if (s == "coherent") return FieldKind::Coherent;
  if (s == "squeezed" || s == "squeezed_vacuum") return FieldKind::SqueezedVacuum;
  if (s == "thermal") return FieldKind::Thermal;
  throw ParseError("'field.kind' must be one of coherent, squeezed, thermal; got '" + s + "'");
}

NonlinearitySelector parse_selector(const json& v) {
  NonlinearitySelector sel;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "identity") {
      sel.kind = NonlinearitySelector::Kind::Identity;
    } else if (s == "sqrt_n") {
      sel.kind = NonlinearitySelector::Kind::SqrtN;
    } else {
      throw ParseError("'nonlinearity' must be identity, sqrt_n or {\"table\": [...]}; got '" + s + "'");
    }
    return sel;
  }
  if (v.is_object()) {
    reject_unknown(v, "nonlinearity.", {"table"});
    if (!v.contains("table") || !v.at("table").is_array() || v.at("table").empty()) {
      throw ParseError("'nonlinearity.table' must be a non-empty array of f(1), f(2), ...");
    }
    sel.kind = NonlinearitySelector::Kind::Table;
    for (const auto& x : v.at("table")) {
      if (!x.is_number()) throw ParseError("'nonlinearity.table' entries must be numbers");
      sel.table.push_back(x.get<double>());
    }
    return sel;
  }
  throw ParseError("'nonlinearity' must be a string or an object");
}

// ---------------------------------------------------------------------------
// number formatting

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// Contiguous blocks per worker; each index is computed independently, so the
// output does not depend on the worker count.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

const char* const kCsvColumns[] = {"t",   "W",   "rho_ee", "rho_gg", "re_rho_eg", "im_rho_eg",
                                   "H_x", "H_y", "H_z",    "E_x",    "E_y",       "norm"};

}  // namespace

// ---------------------------------------------------------------------------
// config

NonlinearitySpec NonlinearitySelector::build() const {
  switch (kind) {
    case Kind::Identity:
      return NonlinearitySpec::identity();
    case Kind::SqrtN:
      return NonlinearitySpec::sqrt_n();
    case Kind::Table:
      return NonlinearitySpec::table(table);
  }
  return NonlinearitySpec::identity();
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> out(samples);
  const double span = t_end - t_start;
  const double denom = static_cast<double>(samples - 1);
  for (std::size_t j = 0; j < samples; ++j) {
    out[j] = t_start + span * (static_cast<double>(j) / denom);
  }
  if (samples > 1) out.back() = t_end;
  return out;
}

void ScenarioConfig::validate() const {
  if (time.samples < 2) throw ParseError("'time.samples' must be >= 2");
  if (!(time.t_start >= 0.0)) throw ParseError("'time.t_start' must be >= 0");
  if (!(time.t_end > time.t_start)) throw ParseError("'time.t_end' must exceed 'time.t_start'");
  if (!(field.tail_eps > 0.0 && field.tail_eps < 1.0)) throw ParseError("'field.tail_eps' must lie in (0,1)");
  if (!(field.nbar >= 0.0) || !std::isfinite(field.nbar)) throw ValidationError("'field.nbar' must be >= 0");
  if (field.temperature && field.kind != FieldKind::Thermal) {
    throw ValidationError("a field temperature only applies to thermal fields");
  }
  params.validate();
  if (!(params.gamma > 0.0)) throw ValidationError("gamma must be > 0 (time is reported as gamma t)");
  if (nonlinearity.kind == NonlinearitySelector::Kind::Table) {
    for (double v : nonlinearity.table) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError("nonlinearity table entries must be finite and positive");
      }
    }
  }
}

PhotonDistribution ScenarioConfig::distribution() const {
  return make_distribution(field.kind, field.nbar, field.tail_eps, params.k);
}

ScenarioConfig config_from_json(const json& doc, const ScenarioConfig& base) {
  if (!doc.is_object()) throw ParseError("scenario document must be a JSON object");
  ScenarioConfig c = base;
  reject_unknown(doc, "", {"name", "model", "nonlinearity", "field", "time", "options", "output"});

  if (doc.contains("name")) c.name = string_at(doc, "name", "");

  if (doc.contains("model")) {
    const json& m = require_object(doc.at("model"), "model");
    reject_unknown(m, "model.", {"k", "gamma", "mu", "nu", "detuning", "beta1", "beta2", "chi"});
    if (m.contains("k")) {
      const std::size_t k = count_at(m, "k", "model.");
      if (k < 1 || k > 64) throw ParseError("'model.k' must be an integer in [1, 64]");
      c.params.k = static_cast<unsigned>(k);
    }
    read_number(m, "gamma", "model.", c.params.gamma);
    read_number(m, "mu", "model.", c.params.mu);
    read_number(m, "nu", "model.", c.params.nu);
    read_number(m, "detuning", "model.", c.params.detuning);
    read_number(m, "beta1", "model.", c.params.beta1);
    read_number(m, "beta2", "model.", c.params.beta2);
    read_number(m, "chi", "model.", c.params.chi);
  }

  if (doc.contains("nonlinearity")) c.nonlinearity = parse_selector(doc.at("nonlinearity"));

  if (doc.contains("field")) {
    const json& f = require_object(doc.at("field"), "field");
    reject_unknown(f, "field.", {"kind", "nbar", "temperature", "frequency", "hbar_over_kB", "tail_eps"});
    if (f.contains("kind")) c.field.kind = parse_field_kind(string_at(f, "kind", "field."));
    if (f.contains("nbar") && f.contains("temperature")) {
      throw ParseError("'field.nbar' and 'field.temperature' are mutually exclusive");
    }
    if (f.contains("nbar")) {
      c.field.nbar = number_at(f, "nbar", "field.");
      c.field.temperature.reset();
      c.field.frequency.reset();
    }
    if (f.contains("temperature")) c.field.temperature = number_at(f, "temperature", "field.");
    if (f.contains("frequency")) c.field.frequency = number_at(f, "frequency", "field.");
    read_number(f, "hbar_over_kB", "field.", c.field.hbar_over_kB);
    read_number(f, "tail_eps", "field.", c.field.tail_eps);
    if (c.field.temperature) {
      if (c.field.kind != FieldKind::Thermal) throw ValidationError("a field temperature only applies to thermal fields");
      if (!c.field.frequency) throw ParseError("'field.temperature' needs 'field.frequency'");
      try {
        c.field.nbar = thermal_nbar_from_temperature(*c.field.frequency, *c.field.temperature, c.field.hbar_over_kB);
      } catch (const InvalidParameter& e) {
        throw ValidationError(e.what());
      }
    }
  }

  if (doc.contains("time")) {
    const json& t = require_object(doc.at("time"), "time");
    reject_unknown(t, "time.", {"t_start", "t_end", "samples"});
    read_number(t, "t_start", "time.", c.time.t_start);
    read_number(t, "t_end", "time.", c.time.t_end);
    if (t.contains("samples")) c.time.samples = count_at(t, "samples", "time.");
  }

  if (doc.contains("options")) {
    const json& o = require_object(doc.at("options"), "options");
    reject_unknown(o, "options.", {"oracle_check", "counter_rotating_diagnostic", "free_phase_on_coherence"});
    if (o.contains("oracle_check")) c.options.oracle_check = bool_at(o, "oracle_check", "options.");
    if (o.contains("counter_rotating_diagnostic")) {
      c.options.counter_rotating_diagnostic = bool_at(o, "counter_rotating_diagnostic", "options.");
    }
    if (o.contains("free_phase_on_coherence")) {
      c.options.free_phase_on_coherence = bool_at(o, "free_phase_on_coherence", "options.");
    }
  }

  if (doc.contains("output")) {
    const json& o = require_object(doc.at("output"), "output");
    reject_unknown(o, "output.", {"path", "format"});
    if (o.contains("path")) c.output.path = string_at(o, "path", "output.");
    if (o.contains("format")) c.output.format = parse_format(string_at(o, "format", "output."));
  }

  c.validate();
  return c;
}

ScenarioConfig parse_config(std::string_view text, const ScenarioConfig& base) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scenario document: ") + e.what());
  }
  return config_from_json(doc, base);
}

ScenarioConfig parse_config(std::string_view text) { return parse_config(text, ScenarioConfig{}); }

json config_to_json(const ScenarioConfig& c) {
  json doc;
  doc["name"] = c.name;
  doc["model"] = {{"k", c.params.k},         {"gamma", c.params.gamma}, {"mu", c.params.mu},
                  {"nu", c.params.nu},       {"detuning", c.params.detuning},
                  {"beta1", c.params.beta1}, {"beta2", c.params.beta2}, {"chi", c.params.chi}};
  switch (c.nonlinearity.kind) {
    case NonlinearitySelector::Kind::Identity:
      doc["nonlinearity"] = "identity";
      break;
    case NonlinearitySelector::Kind::SqrtN:
      doc["nonlinearity"] = "sqrt_n";
      break;
    case NonlinearitySelector::Kind::Table:
      doc["nonlinearity"] = {{"table", c.nonlinearity.table}};
      break;
  }
  json field = {{"kind", std::string(to_string(c.field.kind))},
                {"hbar_over_kB", c.field.hbar_over_kB},
                {"tail_eps", c.field.tail_eps}};
  if (c.field.temperature) {
    field["temperature"] = *c.field.temperature;
    field["frequency"] = *c.field.frequency;
  } else {
    field["nbar"] = c.field.nbar;
  }
  doc["field"] = field;
  doc["time"] = {{"t_start", c.time.t_start}, {"t_end", c.time.t_end}, {"samples", c.time.samples}};
  doc["options"] = {{"oracle_check", c.options.oracle_check},
                    {"counter_rotating_diagnostic", c.options.counter_rotating_diagnostic},
                    {"free_phase_on_coherence", c.options.free_phase_on_coherence}};
  doc["output"] = {{"path", c.output.path}, {"format", std::string(to_string(c.output.format))}};
  return doc;
}

OutputFormat parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw ParseError("output format must be csv or json, got '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat format) { return format == OutputFormat::Json ? "json" : "csv"; }

// ---------------------------------------------------------------------------
// presets

namespace {

struct Regime {
  const char* name;
  unsigned k;
  double chi, beta, detuning;
};

// Kerr and Stark strengths are artifact choices: chi within the 0.01-0.03
// range, beta1 = beta2 = 0.1, detuning 5 gamma.
constexpr Regime kRegimes[] = {
    {"bare", 1, 0.0, 0.0, 0.0},
    {"kerr", 1, 0.03, 0.0, 0.0},
    {"kerr_stark", 2, 0.03, 0.1, 0.0},
    {"kerr_stark_detuned", 2, 0.03, 0.1, 5.0},
};

constexpr FieldKind kFields[] = {FieldKind::Coherent, FieldKind::SqueezedVacuum, FieldKind::Thermal};

ScenarioConfig base_preset(FieldKind field, const Regime& r, NonlinearitySelector::Kind f, double nbar) {
  ScenarioConfig c;
  c.params.k = r.k;
  c.params.gamma = 1.0;
  c.params.mu = 0.1;
  c.params.chi = r.chi;
  c.params.beta1 = r.beta;
  c.params.beta2 = r.beta;
  c.params.detuning = r.detuning;
  c.nonlinearity.kind = f;
  c.field.kind = field;
  c.field.nbar = nbar;
  c.time = {0.0, 80.0, 3201};
  return c;
}

const std::map<std::string, ScenarioConfig>& preset_table() {
  static const std::map<std::string, ScenarioConfig> table = [] {
    std::map<std::string, ScenarioConfig> t;
    const std::pair<const char*, NonlinearitySelector::Kind> fs[] = {
        {"identity", NonlinearitySelector::Kind::Identity}, {"sqrt_n", NonlinearitySelector::Kind::SqrtN}};
    for (FieldKind field : kFields) {
      const std::string fname(to_string(field));
      for (const Regime& r : kRegimes) {
        for (const auto& [flabel, fkind] : fs) {
          const std::string name = fname + "_" + r.name + "_" + flabel;
          t.emplace(name, base_preset(field, r, fkind, 25.0));
          // Low-intensity variants for the entropy-squeezing regime.
          if (r.k == 1) t.emplace(name + "_lown", base_preset(field, r, fkind, 1.0));
        }
      }
      // Higher photon-number transitions, deformed coupling only.
      for (unsigned k : {3u, 4u}) {
        for (const Regime& r : {kRegimes[0], kRegimes[1]}) {
          Regime rk = r;
          rk.k = k;
          const std::string name = fname + "_" + r.name + "_sqrt_n_k" + std::to_string(k);
          t.emplace(name, base_preset(field, rk, NonlinearitySelector::Kind::SqrtN, 25.0));
        }
      }
    }
    for (auto& [name, cfg] : t) cfg.name = name;
    return t;
  }();
  return table;
}

}  // namespace

ScenarioConfig preset(std::string_view name) {
  const auto& table = preset_table();
  const auto it = table.find(std::string(name));
  if (it == table.end()) {
    std::string msg = "unknown preset '" + std::string(name) + "'; available:";
    for (const auto& [n, _] : table) msg += " " + n;
    throw LookupError(msg);
  }
  return it->second;
}

std::vector<std::string> list_presets() {
  std::vector<std::string> out;
  for (const auto& [n, _] : preset_table()) out.push_back(n);
  return out;
}

// ---------------------------------------------------------------------------
// run

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& run) {
  config.validate();
  const PhotonDistribution dist = config.distribution();
  const NonlinearitySpec f = config.nonlinearity.build();
  const ClosedFormEvolver evolver(config.params, f, dist);
  const std::vector<double> scaled = config.time.points();
  const double gamma = config.params.gamma;
  std::vector<double> physical(scaled.size());
  std::transform(scaled.begin(), scaled.end(), physical.begin(), [gamma](double s) { return s / gamma; });

  ScenarioResult result;
  result.records.resize(scaled.size());
  parallel_for(scaled.size(), run.workers, [&](std::size_t j) {
    const AmplitudeState s = evolver.at(physical[j]);
    ReducedAtomDensity rho = reduced_density(s);
    if (config.options.free_phase_on_coherence) {
      rho = attach_free_phase(rho, config.params.nu, config.params.k, physical[j]);
    }
    result.records[j] = make_record(s, scaled[j], rho);
  });

  if (!config.options.oracle_check && !config.options.counter_rotating_diagnostic) return result;

  // The oracle grid must start at 0.
  std::vector<double> grid = physical;
  const bool prepended = grid.front() != 0.0;
  if (prepended) grid.insert(grid.begin(), 0.0);
  const std::size_t offset = prepended ? 1 : 0;

  OracleOptions oracle_options = run.oracle;
  oracle_options.workers = run.workers;
  if (config.options.oracle_check) {
    const auto oracle = evolve_ode_oracle(config.params, f, evolver.initial(), grid, false, oracle_options);
    result.oracle_deviation.resize(scaled.size());
    parallel_for(scaled.size(), run.workers, [&](std::size_t j) {
      result.oracle_deviation[j] = max_amplitude_deviation(evolver.at(physical[j]), oracle[j + offset]);
    });
    for (double d : result.oracle_deviation) result.max_oracle_deviation = std::max(result.max_oracle_deviation, d);
  }
  if (config.options.counter_rotating_diagnostic) {
    const auto full = evolve_ode_oracle(config.params, f, evolver.initial(), grid, true, oracle_options);
    result.counter_rotating_deviation.resize(scaled.size());
    for (std::size_t j = 0; j < scaled.size(); ++j) {
      result.counter_rotating_deviation[j] = std::abs(atomic_inversion(full[j + offset]) - result.records[j].W);
      result.max_counter_rotating_deviation =
          std::max(result.max_counter_rotating_deviation, result.counter_rotating_deviation[j]);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// output

void write_csv(std::ostream& out, const std::vector<ObservableRecord>& records) {
  std::string line;
  for (std::size_t i = 0; i < std::size(kCsvColumns); ++i) {
    if (i) line += ',';
    line += kCsvColumns[i];
  }
  out << line << '\n';
  for (const auto& r : records) {
    const double v[] = {r.time, r.W,   r.rho.rho_ee, r.rho.rho_gg, r.rho.rho_eg.real(), r.rho.rho_eg.imag(),
                        r.H_x,  r.H_y, r.H_z,        r.E_x,        r.E_y,               r.norm};
    line.clear();
    for (std::size_t i = 0; i < std::size(v); ++i) {
      if (i) line += ',';
      line += format_double(v[i]);
    }
    out << line << '\n';
  }
}

json records_to_json(const ScenarioConfig& config, const ScenarioResult& result) {
  json recs = json::array();
  for (std::size_t j = 0; j < result.records.size(); ++j) {
    const auto& r = result.records[j];
    json o = {{"t", r.time},          {"W", r.W},       {"rho_ee", r.rho.rho_ee}, {"rho_gg", r.rho.rho_gg},
              {"re_rho_eg", r.rho.rho_eg.real()},       {"im_rho_eg", r.rho.rho_eg.imag()},
              {"H_x", r.H_x},         {"H_y", r.H_y},   {"H_z", r.H_z},           {"dH_x", r.dH_x},
              {"dH_y", r.dH_y},       {"dH_z", r.dH_z}, {"E_x", r.E_x},           {"E_y", r.E_y},
              {"norm", r.norm}};
    if (!result.oracle_deviation.empty()) o["oracle_deviation"] = result.oracle_deviation[j];
    if (!result.counter_rotating_deviation.empty()) {
      o["counter_rotating_deviation"] = result.counter_rotating_deviation[j];
    }
    recs.push_back(std::move(o));
  }
  json doc = {{"metadata", config_to_json(config)}, {"records", std::move(recs)}};
  if (!result.oracle_deviation.empty()) doc["oracle"] = {{"max_deviation", result.max_oracle_deviation},
                                                          {"tolerance", kOracleTolerance}};
  if (!result.counter_rotating_deviation.empty()) {
    doc["counter_rotating"] = {{"max_inversion_deviation", result.max_counter_rotating_deviation}};
  }
  return doc;
}

namespace {

void write_result(std::ostream& out, const ScenarioConfig& config, const ScenarioResult& result,
                  OutputFormat format) {
  if (format == OutputFormat::Csv) {
    write_csv(out, result.records);
  } else {
    out << records_to_json(config, result).dump(1) << '\n';
  }
}

}  // namespace

void emit(const ScenarioConfig& config, const ScenarioResult& result) {
  if (result.records.empty()) throw InvalidParameter("no records to emit");
  if (config.output.path.empty()) {
    write_result(std::cout, config, result, config.output.format);
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to standard output");
    return;
  }
  std::ostringstream buffer;
  write_result(buffer, config, result, config.output.format);
  std::ofstream out(config.output.path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + config.output.path + "' for writing");
  out << buffer.str();
  out.close();
  if (!out) throw IoError("failed writing '" + config.output.path + "'");
}

void emit(const std::vector<ObservableRecord>& records, OutputFormat format, const std::string& path,
          const ScenarioConfig& metadata) {
  ScenarioConfig cfg = metadata;
  cfg.output.format = format;
  cfg.output.path = path;
  ScenarioResult r;
  r.records = records;
  emit(cfg, r);
}

namespace {

ObservableRecord finish_record(ObservableRecord r) {
  r.dH_x = std::exp(r.H_x);
  r.dH_y = std::exp(r.H_y);
  r.dH_z = std::exp(r.H_z);
  return r;
}

}  // namespace

std::vector<ObservableRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV input");
  {
    std::string expected;
    for (std::size_t i = 0; i < std::size(kCsvColumns); ++i) {
      if (i) expected += ',';
      expected += kCsvColumns[i];
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) throw ParseError("unexpected CSV header: " + line);
  }
  std::vector<ObservableRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v[std::size(kCsvColumns)];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t i = 0; i < std::size(v); ++i) {
      const auto res = std::from_chars(p, end, v[i]);
      if (res.ec != std::errc()) throw ParseError("bad number in CSV row " + std::to_string(row));
      p = res.ptr;
      if (i + 1 < std::size(v)) {
        if (p == end || *p != ',') throw ParseError("too few columns in CSV row " + std::to_string(row));
        ++p;
      }
    }
    if (p != end) throw ParseError("too many columns in CSV row " + std::to_string(row));
    ObservableRecord r;
    r.time = v[0];
    r.W = v[1];
    r.rho.rho_ee = v[2];
    r.rho.rho_gg = v[3];
    r.rho.rho_eg = {v[4], v[5]};
    r.H_x = v[6];
    r.H_y = v[7];
    r.H_z = v[8];
    r.E_x = v[9];
    r.E_y = v[10];
    r.norm = v[11];
    out.push_back(finish_record(r));
  }
  return out;
}

std::vector<ObservableRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_csv(in);
}

std::vector<ObservableRecord> records_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("records") || !doc.at("records").is_array()) {
    throw ParseError("JSON output must contain a 'records' array");
  }
  std::vector<ObservableRecord> out;
  try {
    for (const auto& o : doc.at("records")) {
      ObservableRecord r;
      r.time = o.at("t").get<double>();
      r.W = o.at("W").get<double>();
      r.rho.rho_ee = o.at("rho_ee").get<double>();
      r.rho.rho_gg = o.at("rho_gg").get<double>();
      r.rho.rho_eg = {o.at("re_rho_eg").get<double>(), o.at("im_rho_eg").get<double>()};
      r.H_x = o.at("H_x").get<double>();
      r.H_y = o.at("H_y").get<double>();
      r.H_z = o.at("H_z").get<double>();
      r.dH_x = o.at("dH_x").get<double>();
      r.dH_y = o.at("dH_y").get<double>();
      r.dH_z = o.at("dH_z").get<double>();
      r.E_x = o.at("E_x").get<double>();
      r.E_y = o.at("E_y").get<double>();
      r.norm = o.at("norm").get<double>();
      out.push_back(r);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed record: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// revivals

std::vector<double> revival_envelope(const std::vector<ObservableRecord>& records) {
  const std::size_t n = records.size();
  if (n == 0) return {};
  double mean = 0.0;
  for (const auto& r : records) mean += r.W;
  mean /= static_cast<double>(n);

  // Prefix sums of squared deviations; window of 2% of the grid, centered.
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double d = records[j].W - mean;
    prefix[j + 1] = prefix[j] + d * d;
  }
  const std::size_t window = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.02 * n)));
  const std::size_t half = window / 2;
  std::vector<double> env(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t lo = j >= half ? j - half : 0;
    const std::size_t hi = std::min(n, lo + window);
    const std::size_t lo2 = hi - std::min(hi, window);
    env[j] = std::sqrt(std::max(0.0, prefix[hi] - prefix[lo2]) / static_cast<double>(hi - lo2));
  }
  return env;
}

std::vector<RevivalEvent> measure_revivals(const std::vector<ObservableRecord>& records, double threshold) {
  std::vector<RevivalEvent> events;
  if (records.size() < 100) return events;
  const std::vector<double> env = revival_envelope(records);
  const std::size_t window = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.02 * env.size())));
  const double reference = *std::max_element(env.begin(), env.begin() + std::min(window, env.size()));
  if (!(reference > 0.0)) return events;
  const double level = threshold * reference;

  bool collapsed = false;
  bool inside = false;
  RevivalEvent current;
  for (std::size_t j = 0; j < env.size(); ++j) {
    if (!collapsed) {
      collapsed = env[j] < level;
      continue;
    }
    if (env[j] >= level) {
      if (!inside || env[j] > current.envelope_amplitude) {
        current = {records[j].time, env[j]};
      }
      inside = true;
    } else if (inside) {
      events.push_back(current);
      inside = false;
    }
  }
  if (inside) events.push_back(current);
  return events;
}

}  // namespace nljc
