#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "nljc_cli_tests";

int run(const std::string& args, const std::string& stdout_file = "") {
  fs::create_directories(kDir);
  std::string cmd = std::string("\"") + NLJC_CLI_PATH + "\" " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > \"" + (kDir / stdout_file).string() + "\"";
  cmd += " 2> \"" + (kDir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string path(const std::string& name) { return "\"" + (kDir / name).string() + "\""; }

void write(const std::string& name, const std::string& text) {
  fs::create_directories(kDir);
  std::ofstream(kDir / name) << text;
}

std::string slurp(const std::string& name) {
  std::ifstream in(kDir / name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("list-presets") {
  CHECK(run("list-presets", "presets.txt") == 0);
  const auto text = slurp("presets.txt");
  CHECK(text.find("coherent_bare_identity\n") != std::string::npos);
  CHECK(text.find("squeezed_bare_sqrt_n_lown\n") != std::string::npos);
}

TEST_CASE("simulate writes CSV and JSON") {
  write("short.json", R"({"time": {"t_end": 10, "samples": 101}})");
  CHECK(run("simulate --preset coherent_bare_identity --config " + path("short.json") + " --output " +
            path("out.csv")) == 0);
  const auto csv = slurp("out.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 102);

  CHECK(run("simulate --preset coherent_bare_identity --config " + path("short.json") + " --format json --output " +
            path("out.json")) == 0);
  CHECK(slurp("out.json").find("\"metadata\"") != std::string::npos);

  CHECK(run("simulate --preset coherent_bare_identity --config " + path("short.json"), "stdout.csv") == 0);
  CHECK(slurp("stdout.csv") == csv);
}

TEST_CASE("repeated runs are byte-identical") {
  write("det.json", R"({"time": {"t_end": 20, "samples": 400}})");
  CHECK(run("simulate --preset squeezed_kerr_stark_sqrt_n --workers 1 --config " + path("det.json") + " --output " +
            path("a.csv")) == 0);
  CHECK(run("simulate --preset squeezed_kerr_stark_sqrt_n --workers 4 --config " + path("det.json") + " --output " +
            path("b.csv")) == 0);
  CHECK(slurp("a.csv") == slurp("b.csv"));
}

TEST_CASE("oracle option") {
  write("oracle.json", R"({"time": {"t_end": 5, "samples": 51}})");
  CHECK(run("simulate --preset coherent_kerr_sqrt_n_lown --oracle --config " + path("oracle.json") + " --output " +
            path("o.csv")) == 0);
  CHECK(slurp("stderr.txt").find("ODE oracle") != std::string::npos);
  CHECK(run("simulate --preset coherent_kerr_sqrt_n_lown --oracle --oracle-step-budget 3 --config " +
            path("oracle.json") + " --output " + path("o.csv")) == 3);
  CHECK(slurp("stderr.txt").find("level n=") != std::string::npos);
}

TEST_CASE("exit codes for bad input") {
  write("stark.json", R"({"model": {"k": 1, "beta1": 0.3}})");
  CHECK(run("simulate --config " + path("stark.json")) == 2);
  CHECK(slurp("stderr.txt").find("Stark coefficients require k=2") != std::string::npos);
  write("one.json", R"({"time": {"samples": 1}})");
  CHECK(run("simulate --config " + path("one.json")) == 2);
  CHECK(run("simulate --preset no_such_preset") == 2);
  CHECK(run("simulate") == 2);
  CHECK(run("") == 2);
  CHECK(run("simulate --config " + path("does_not_exist.json")) == 4);
  CHECK(run("simulate --preset coherent_bare_identity --output /nonexistent_dir/x.csv") == 4);
}

TEST_CASE("revivals") {
  CHECK(run("simulate --preset coherent_bare_identity --output " + path("rev.csv")) == 0);
  CHECK(run("revivals --input " + path("rev.csv"), "rev.txt") == 0);
  const auto text = slurp("rev.txt");
  CHECK(text.rfind("t_center,envelope_amplitude\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') >= 2);
  CHECK(run("revivals --input " + path("nothing.csv")) == 4);
}
