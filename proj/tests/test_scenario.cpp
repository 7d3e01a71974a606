#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nljc/errors.hpp"
#include "nljc/scenario.hpp"

using namespace nljc;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "model": {"k": 1, "gamma": 1, "mu": 0.1},
  "field": {"kind": "coherent", "nbar": 25},
  "time": {"t_end": 50, "samples": 2000}
})";

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "nljc_scenario_tests";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig small(const std::string& name, std::size_t samples = 201, double t_end = 20.0) {
  auto c = preset(name);
  c.time = {0.0, t_end, samples};
  return c;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.params.k == 1);
  CHECK(c.params.mu == 0.1);
  CHECK(c.params.chi == 0.0);
  CHECK(c.params.beta1 == 0.0);
  CHECK(c.nonlinearity.kind == NonlinearitySelector::Kind::Identity);
  CHECK(c.field.nbar == 25.0);
  CHECK(c.field.tail_eps == 1e-12);
  CHECK(c.time.t_start == 0.0);
  CHECK(c.time.samples == 2000);
  CHECK_FALSE(c.options.oracle_check);
  CHECK(c.output.format == OutputFormat::Csv);
}

TEST_CASE("schema and physics errors") {
  try {
    parse_config(R"({"model": {"k": 1, "beta1": 0.3}, "field": {"nbar": 1}})");
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("Stark coefficients require k=2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"time": {"samples": 1}})"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"time": {"samples": 2.5}})"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"time": {"t_end": 0}})"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"gamma": 0}})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"field": {"kind": "fock"}})"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"nonlinearity": "q_deformed"})"), ParseError);
  CHECK_THROWS_AS(parse_config("{ not json"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"model": {"k": "two"}})"), ParseError);
  try {
    parse_config(R"({"model": {"kappa": 1}})");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("model.kappa") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"colour": "red"})"), ParseError);
}

TEST_CASE("thermal field from a temperature") {
  const auto c = parse_config(
      R"({"field": {"kind": "thermal", "temperature": 1.0, "frequency": 0.6931471805599453, "hbar_over_kB": 1.0}})");
  CHECK(c.field.nbar == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(parse_config(R"({"field": {"kind": "coherent", "temperature": 1.0, "frequency": 1.0}})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"field": {"kind": "thermal", "temperature": 1.0}})"), ParseError);
}

TEST_CASE("tabulated nonlinearity") {
  const auto c = parse_config(R"({"nonlinearity": {"table": [1, 1.1, 1.2, 1.3]}, "field": {"nbar": 0}})");
  CHECK(c.nonlinearity.kind == NonlinearitySelector::Kind::Table);
  CHECK(c.nonlinearity.build().eval(3) == 1.2);
  CHECK_THROWS_AS(parse_config(R"({"nonlinearity": {"table": [1, -1]}})"), ValidationError);
}

TEST_CASE("config echo round-trips") {
  for (const auto& name : list_presets()) {
    const auto c = preset(name);
    CHECK(config_from_json(config_to_json(c)) == c);
  }
  auto c = parse_config(
      R"({"field": {"kind": "thermal", "temperature": 2.0, "frequency": 1.0, "hbar_over_kB": 1.0},
          "options": {"oracle_check": true}, "output": {"path": "x.json", "format": "json"}})");
  CHECK(config_from_json(config_to_json(c)) == c);
}

TEST_CASE("presets") {
  const auto names = list_presets();
  CHECK(names.size() == 48);
  for (const auto& n : names) {
    const auto c = preset(n);
    CHECK(c.params.mu == 0.1);
    CHECK(c.name == n);
    const bool low = n.find("_lown") != std::string::npos;
    CHECK(c.field.nbar == (low ? 1.0 : 25.0));
    CHECK_NOTHROW(c.validate());
  }
  const auto c = preset("coherent_bare_sqrt_n");
  CHECK(c.params.k == 1);
  CHECK(c.nonlinearity.kind == NonlinearitySelector::Kind::SqrtN);
  CHECK(c.params.chi == 0.0);
  CHECK(c.params.beta1 == 0.0);
  CHECK(c.params.detuning == 0.0);
  CHECK(c.field.kind == FieldKind::Coherent);

  const auto low = preset("squeezed_bare_sqrt_n_lown");
  CHECK(low.field.kind == FieldKind::SqueezedVacuum);
  CHECK(low.field.nbar == 1.0);

  const auto th = preset("thermal_kerr_identity");
  CHECK(th.field.kind == FieldKind::Thermal);
  CHECK(th.params.chi == 0.03);
  CHECK(th.nonlinearity.kind == NonlinearitySelector::Kind::Identity);

  CHECK(preset("coherent_kerr_stark_sqrt_n").params.k == 2);
  CHECK(preset("thermal_bare_sqrt_n_k4").params.k == 4);

  try {
    preset("coherent_nope");
    FAIL("expected lookup error");
  } catch (const LookupError& e) {
    CHECK(std::string(e.what()).find("coherent_bare_identity") != std::string::npos);
  }
}

TEST_CASE("first sample of every preset") {
  for (const auto& n : list_presets()) {
    CAPTURE(n);
    const auto cfg = small(n, 3, 1.0);
    const auto res = run_scenario(cfg);
    const auto& r = res.records.front();
    const double mass = cfg.distribution().captured_mass;
    CHECK(r.time == 0.0);
    CHECK(r.W == doctest::Approx(mass).epsilon(1e-15));
    CHECK(std::abs(r.E_x) <= 1e-15);
    CHECK(std::abs(r.E_y) <= 1e-15);
    CHECK(r.H_z == 0.0);
  }
}

TEST_CASE("time is reported as gamma t") {
  auto cfg = small("coherent_bare_identity", 11, 10.0);
  // Doubling every rate is a pure rescaling of time.
  cfg.params.gamma = 2.0;
  cfg.params.mu = 0.2;
  const auto a = run_scenario(cfg);
  auto ref = cfg;
  ref.params.gamma = 1.0;
  ref.params.mu = 0.1;
  const auto b = run_scenario(ref);
  for (std::size_t j = 0; j < a.records.size(); ++j) {
    CHECK(a.records[j].time == b.records[j].time);
    CHECK(std::abs(a.records[j].W - b.records[j].W) <= 1e-12);
  }
}

TEST_CASE("byte-identical output across worker counts") {
  const auto cfg = small("thermal_kerr_stark_sqrt_n", 301, 30.0);
  std::string first;
  for (unsigned workers : {1u, 2u, 3u, 8u}) {
    RunOptions run;
    run.workers = workers;
    const auto res = run_scenario(cfg, run);
    std::ostringstream out;
    write_csv(out, res.records);
    if (first.empty()) {
      first = out.str();
    } else {
      CHECK(out.str() == first);
    }
  }
}

TEST_CASE("oracle check and counter-rotating diagnostic") {
  auto cfg = small("coherent_kerr_sqrt_n_lown", 101, 10.0);
  cfg.options.oracle_check = true;
  cfg.options.counter_rotating_diagnostic = true;
  const auto res = run_scenario(cfg);
  REQUIRE(res.oracle_deviation.size() == res.records.size());
  CHECK(res.oracle_passed());
  CHECK(res.max_oracle_deviation <= 1e-8);
  REQUIRE(res.counter_rotating_deviation.size() == res.records.size());
  CHECK(res.max_counter_rotating_deviation > 0.0);
  const auto doc = records_to_json(cfg, res);
  CHECK(doc.at("records").at(5).contains("oracle_deviation"));
  CHECK(doc.at("oracle").at("max_deviation").get<double>() == res.max_oracle_deviation);
}

TEST_CASE("norm column matches the captured mass") {
  const auto cfg = small("squeezed_kerr_stark_detuned_identity", 201, 50.0);
  const double mass = cfg.distribution().captured_mass;
  for (const auto& r : run_scenario(cfg).records) CHECK(std::abs(r.norm - mass) <= 1e-10);
}

TEST_CASE("CSV emission") {
  const auto dir = scratch_dir();
  auto cfg = small("coherent_bare_sqrt_n", 2, 1.0);
  const auto res = run_scenario(cfg);
  cfg.output.path = (dir / "two.csv").string();
  emit(cfg, res);
  const std::string text = read_file(cfg.output.path);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.rfind("t,W,rho_ee,rho_gg,re_rho_eg,im_rho_eg,H_x,H_y,H_z,E_x,E_y,norm\n", 0) == 0);
  CHECK(text.back() == '\n');

  const auto back = read_csv_file(cfg.output.path);
  REQUIRE(back.size() == 2);
  CHECK(back[1].W == res.records[1].W);
  CHECK(back[1].rho.rho_eg == res.records[1].rho.rho_eg);
  CHECK(back[1].norm == res.records[1].norm);

  const auto empty_path = dir / "empty.csv";
  fs::remove(empty_path);
  CHECK_THROWS(emit({}, OutputFormat::Csv, empty_path.string()));
  CHECK_FALSE(fs::exists(empty_path));

  CHECK_THROWS_AS(emit(res.records, OutputFormat::Csv, (dir / "missing" / "x.csv").string()), IoError);
}

TEST_CASE("JSON emission round-trips") {
  const auto dir = scratch_dir();
  auto cfg = small("thermal_kerr_sqrt_n_lown", 57, 7.0);
  cfg.output.path = (dir / "r.json").string();
  cfg.output.format = OutputFormat::Json;
  const auto res = run_scenario(cfg);
  emit(cfg, res);
  const auto doc = nlohmann::json::parse(read_file(cfg.output.path));
  const auto back = records_from_json(doc);
  REQUIRE(back.size() == res.records.size());
  for (std::size_t j = 0; j < back.size(); ++j) CHECK(back[j] == res.records[j]);
  CHECK(config_from_json(doc.at("metadata")) == cfg);
}

TEST_CASE("revival detection") {
  std::vector<ObservableRecord> flat(400);
  for (std::size_t j = 0; j < flat.size(); ++j) {
    flat[j].time = 0.1 * j;
    flat[j].W = 0.3;
  }
  CHECK(measure_revivals(flat).empty());

  std::vector<ObservableRecord> rabi(2000);
  for (std::size_t j = 0; j < rabi.size(); ++j) {
    rabi[j].time = 0.025 * j;
    rabi[j].W = std::cos(rabi[j].time);
  }
  CHECK(measure_revivals(rabi).empty());

  std::vector<ObservableRecord> few(rabi.begin(), rabi.begin() + 99);
  CHECK(measure_revivals(few).empty());

  const auto res = run_scenario(preset("coherent_bare_identity"));
  const auto events = measure_revivals(res.records);
  REQUIRE(events.size() >= 1);
  // first revival of the linear model near 4 pi sqrt(nbar) / gamma
  CHECK(events.front().t_center == doctest::Approx(4.0 * M_PI * 5.0).epsilon(0.05));
}
