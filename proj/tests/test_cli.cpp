#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fracwave/fracwave.hpp"

using namespace fracwave;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fracwave_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_json(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream os(p);
  os << j.dump(2);
  return p;
}

std::string cli_binary() {
  const char* env = std::getenv("FRACWAVE_CLI");
  REQUIRE(env != nullptr);
  return env;
}

int run_cli(const std::string& args, const fs::path& stderr_file = {}) {
  std::string cmd = cli_binary() + " " + args;
  if (!stderr_file.empty()) cmd += " 2>" + stderr_file.string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json free_wave_config() {
  return json{{"grid", {{"d", 1}, {"N", 128}, {"L", 2.0}}},
              {"s", 0.5},
              {"T", 0.5},
              {"dt", 1.0 / 128.0},
              {"data", {{"u0", {{"preset", "gaussian"}, {"width", 0.25}}}}}};
}

}  // namespace

TEST_CASE("config parsing fails closed") {
  CHECK_THROWS_AS(parse_config(json{{"typo_key", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"grid", {{"d", 1}, {"M", 64}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"scheme", "rk4"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"s", 0.0}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"dt", -0.1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"eps_list", {0.1, 0.2}}}), ConfigError);
  CHECK_THROWS_AS(
      parse_config(json{{"coefficients", {{"a", {{"kind", "fractal"}}}}}}),
      ConfigError);
  CHECK_THROWS_AS(
      parse_config(json{{"data", {{"u0", {{"preset", "from_file"}}}}}}),
      ConfigError);

  const RunConfig cfg = parse_config(free_wave_config());
  CHECK(cfg.N == 128);
  CHECK(cfg.L == 2.0);
  CHECK(cfg.u0.preset == "gaussian");
  CHECK(cfg.scheme == "strang_split");
  CHECK(cfg.quadrature_points == 17);
}

TEST_CASE("solve: free wave keeps the energy constant to 1e-8") {
  TempDir tmp;
  const fs::path cfg = write_json(tmp.path, "run.json", free_wave_config());
  const fs::path out = tmp.path / "out";
  CHECK(run_cli("solve --config " + cfg.string() + " --out " + out.string()) == 0);

  const CsvTable energy = read_csv(out / "energy.csv");
  REQUIRE(!energy.rows.empty());
  const double E0 = energy.rows.front()[1];
  for (const auto& row : energy.rows)
    CHECK(std::abs(row[1] - E0) <= 1e-8 * std::max(1.0, E0));

  CHECK(fs::exists(out / "u_final.fwf1"));
  CHECK(fs::exists(out / "ut_final.fwf1"));
  const Fwf1Snapshot snap = read_fwf1(out / "u_final.fwf1");
  CHECK(snap.time == doctest::Approx(0.5));

  json verdict;
  std::ifstream(out / "verdict.json") >> verdict;
  CHECK(verdict.at("study") == "energy_audit");
  CHECK(verdict.at("pass") == true);
  CHECK(verdict.contains("metrics"));
  CHECK(verdict.contains("thresholds"));
  CHECK(verdict.contains("paper_ref"));
}

TEST_CASE("solve: CFL violation exits 2 and names the bound") {
  TempDir tmp;
  json j = free_wave_config();
  j["dt"] = 0.25;  // above 0.5/|xi_max|^s ~ 0.05
  const fs::path cfg = write_json(tmp.path, "bad_dt.json", j);
  const fs::path err = tmp.path / "stderr.txt";
  CHECK(run_cli("solve --config " + cfg.string() + " --out " +
                    (tmp.path / "o").string(),
                err) == 2);
  const std::string msg = slurp(err);
  CHECK(msg.find("CFL") != std::string::npos);
  CHECK(msg.find("0.049") != std::string::npos);  // the computed bound value
}

TEST_CASE("missing config file exits 2") {
  TempDir tmp;
  CHECK(run_cli("solve --config " + (tmp.path / "nope.json").string() + " --out " +
                tmp.path.string()) == 2);
}

TEST_CASE("sweep-moderateness: short eps_list exits 2, smooth run records N ~ 0") {
  TempDir tmp;
  json j = free_wave_config();
  j["grid"]["N"] = 256;
  j["T"] = 0.25;
  j["dt"] = 1.0 / 64.0;
  j["eps_list"] = {0.25};
  const fs::path short_cfg = write_json(tmp.path, "short.json", j);
  CHECK(run_cli("sweep-moderateness --config " + short_cfg.string() + " --out " +
                (tmp.path / "s").string()) == 2);

  j["eps_list"] = {0.5, 0.25, 0.125, 0.0625};
  j["coefficients"] = {{"a", {{"kind", "smooth"},
                              {"base", {{"profile", "constant"}, {"value", 0.8}}}}}};
  const fs::path cfg = write_json(tmp.path, "smooth.json", j);
  const fs::path out = tmp.path / "out";
  CHECK(run_cli("sweep-moderateness --config " + cfg.string() + " --out " +
                out.string()) == 0);
  const CsvTable sweep = read_csv(out / "sweep.csv");
  CHECK(sweep.header.front() == "eps");
  CHECK(sweep.rows.size() == 4);
  json verdict;
  std::ifstream(out / "verdict.json") >> verdict;
  CHECK(verdict.at("pass") == true);
  CHECK(std::abs(verdict.at("metrics").at("N_solution").get<double>()) < 0.05);
}

TEST_CASE("coherence: constant coefficients give a ~0 error column") {
  TempDir tmp;
  json j = free_wave_config();
  j["grid"] = {{"d", 1}, {"N", 256}, {"L", 1.0}};
  j["T"] = 0.25;
  j["dt"] = 1.0 / 128.0;
  j["eps_list"] = {0.25, 0.125, 0.0625, 0.03125};
  j["coefficients"] = {{"a", {{"kind", "smooth"},
                              {"base", {{"profile", "constant"}, {"value", 0.9}}}}},
                       {"b", {{"kind", "smooth"},
                              {"base", {{"profile", "constant"}, {"value", 0.4}}}}}};
  const fs::path cfg = write_json(tmp.path, "coh.json", j);
  const fs::path out = tmp.path / "out";
  CHECK(run_cli("coherence --config " + cfg.string() + " --out " + out.string()) == 0);
  const CsvTable t = read_csv(out / "coherence.csv");
  CHECK(t.header == std::vector<std::string>{"eps", "l2_err"});
  for (const auto& row : t.rows) CHECK(row[1] <= 1e-12);
  json verdict;
  std::ifstream(out / "verdict.json") >> verdict;
  CHECK(verdict.at("pass") == true);
  CHECK(verdict.at("metrics").at("exact") == 1.0);

  // delta coefficients are outside the coherence regime.
  json bad = j;
  bad["coefficients"] = {{"a", {{"kind", "delta"}}}};
  const fs::path bad_cfg = write_json(tmp.path, "bad_coh.json", bad);
  CHECK(run_cli("coherence --config " + bad_cfg.string() + " --out " +
                (tmp.path / "b").string()) == 2);
}

TEST_CASE("duhamel-check: N = 64 agreement, M = 2 exits 2") {
  TempDir tmp;
  json j = free_wave_config();
  j["grid"]["N"] = 64;
  j["source"] = {{"preset", "sine_gaussian"}, {"omega", 3.0}, {"width", 0.4}};
  j["quadrature_points"] = 17;
  const fs::path cfg = write_json(tmp.path, "duh.json", j);
  const fs::path out = tmp.path / "out";
  CHECK(run_cli("duhamel-check --config " + cfg.string() + " --out " + out.string()) ==
        0);
  json verdict;
  std::ifstream(out / "verdict.json") >> verdict;
  CHECK(verdict.at("study") == "duhamel_check");
  CHECK(verdict.at("pass") == true);
  CHECK(verdict.at("metrics").at("l2_difference").get<double>() <=
        verdict.at("thresholds").at("tolerance").get<double>());

  j["quadrature_points"] = 2;
  const fs::path bad = write_json(tmp.path, "duh_bad.json", j);
  CHECK(run_cli("duhamel-check --config " + bad.string() + " --out " +
                (tmp.path / "b").string()) == 2);
}

TEST_CASE("unknown subcommand / missing required flag exit nonzero") {
  CHECK(run_cli("frobnicate 2>/dev/null") != 0);
  CHECK(run_cli("solve 2>/dev/null") == 2);
}

TEST_CASE("sweep CSVs are byte-identical across thread counts") {
  TempDir tmp;
  json j = free_wave_config();
  j["grid"]["N"] = 256;
  j["T"] = 0.125;
  j["dt"] = 1.0 / 64.0;
  j["eps_list"] = {0.5, 0.25, 0.125, 0.0625};
  j["coefficients"] = {{"a", {{"kind", "delta"}}}};
  const fs::path cfg = write_json(tmp.path, "det.json", j);
  std::string ref;
  for (unsigned threads : {1u, 2u, 8u}) {
    const fs::path out = tmp.path / ("out" + std::to_string(threads));
    CHECK(run_cli("sweep-moderateness --config " + cfg.string() + " --out " +
                  out.string() + " --threads " + std::to_string(threads)) == 0);
    const std::string csv = slurp(out / "sweep.csv");
    if (ref.empty())
      ref = csv;
    else
      CHECK(csv == ref);
  }
}
