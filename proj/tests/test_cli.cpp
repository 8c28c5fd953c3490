#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <sys/wait.h>
#include <fstream>
#include <sstream>
#include <string>

#include "dtcl/commands.hpp"

using namespace dtcl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dtcl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Config small_config(const fs::path& out) {
  return parse_config(nlohmann::json{
      {"environment", {{"total_windows", 600}, {"p_dr0", 0.3}}},
      {"run", {{"seeds", {1, 2}}, {"sweep_pdr", {0.1, 0.3}}, {"output_dir", out.string()}}}});
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DTCL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("empty config resolves to the reference scenario") {
  const auto c = parse_config(nlohmann::json::object());
  CHECK(c.system.n_frames == 1500);
  CHECK(c.system.eta == 0.8);
  CHECK(c.system.acs_tol == 1e-2);
  CHECK(c.env.p_matched == 0.75);
  CHECK(c.env.markov_stay == 0.3);
  REQUIRE(c.env.states.size() == 2);
  CHECK(c.env.states[1] == AccuracyModel{1.30, 0.30});
  REQUIRE(c.env.drift_schedule.size() == 2);
  CHECK(c.env.drift_schedule[1].start_window == 5001);
  CHECK(c.env.drift_schedule[1].p_drift == doctest::Approx(0.075));
  CHECK(c.policies.size() == 4);
  CHECK(c.instance.rho_min == 0.75);
}

TEST_CASE("config validation names the field") {
  using nlohmann::json;
  CHECK_THROWS_WITH_AS(parse_config(json::parse(R"({"system": {"etta": 0.5}})")),
                       "unknown key 'system.etta'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(json::parse(R"({"bogus": 1})")), "unknown key 'bogus'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(json::parse(R"({"system": {"eta": "high"}})")), "system.eta: wrong type",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(json::parse(R"({"system": {"eta": 0}})")), "system: eta out of range",
                       ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"environment": {"p_dr0": 0.2, "drift_schedule": [[1, 0.2]]}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"policies": ["proposed", "oracle"]})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"run": {"seeds": []}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"run": {"sweep_pdr": [0.0, 0.2]}})")), ConfigError);
}

TEST_CASE("effective config round-trips") {
  using nlohmann::json;
  const auto c = parse_config(json::parse(R"({
    "system": {"acc_min": 0.85},
    "environment": {"drift_schedule": [[1, 0.2], [300, 0.05]], "states": [{"a": 1.1, "b": 0.4}],
                    "obs_noise_std": 0.02},
    "policies": ["proposed", "no_dt"],
    "solver": {"instance": {"b": 1.5}}
  })"));
  const auto j = to_json(c);
  CHECK(to_json(parse_config(j)) == j);
  CHECK(j["environment"]["drift_schedule"][1][0] == 300);
  CHECK(!j["environment"].contains("p_dr0"));
}

TEST_CASE("simulate writes deterministic CSV files") {
  const auto dir = scratch("simulate");
  auto c = small_config(dir / "a");
  std::ostringstream log;
  REQUIRE(cmd_simulate(c, true, dir / "a", log) == exit_code::ok);
  REQUIRE(cmd_simulate(c, true, dir / "b", log) == exit_code::ok);
  for (auto f : {"windows.csv", "summary.csv", "gamma_trace.svg", "effective_config.json"}) {
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }

  const auto rows = read_csv(dir / "a" / "windows.csv");
  CHECK(rows.size() == 600u * 4 * 2 + 1);
  CHECK(rows[0] == std::vector<std::string>{"window", "policy", "seed", "i_t", "m_t", "rho", "gamma",
                                            "infer_cost", "retrain_cost", "acc_device", "retrain_samples"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 11u);
    for (std::size_t k = 5; k < 11; ++k) {
      const double v = std::stod(rows[i][k]);
      CHECK(std::isfinite(v));
    }
    if (std::stod(rows[i][6]) > 0.0) CHECK((rows[i][3] == "1" && rows[i][4] == "0"));
  }
  CHECK(read_csv(dir / "a" / "summary.csv").size() == 4u * 2 + 1);

  // Re-running from the echoed configuration reproduces the outputs.
  const auto echoed = load_config(dir / "a" / "effective_config.json");
  REQUIRE(cmd_simulate(echoed, true, dir / "c", log) == exit_code::ok);
  CHECK(slurp(dir / "a" / "windows.csv") == slurp(dir / "c" / "windows.csv"));
  CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "c" / "summary.csv"));
}

TEST_CASE("sweep writes one row per point and policy") {
  const auto dir = scratch("sweep");
  auto c = small_config(dir);
  c.run.sweep_pdr = {0.1, 0.2, 0.3};
  std::ostringstream log;
  REQUIRE(cmd_sweep(c, dir, log) == exit_code::ok);
  const auto rows = read_csv(dir / "sweep.csv");
  CHECK(rows.size() == 3u * 4 + 1);
  CHECK(rows[0] == std::vector<std::string>{"p_dr0", "policy", "mean_cost", "std_cost", "n_seeds"});
  CHECK(fs::exists(dir / "cost_vs_pdr.svg"));
  CHECK(slurp(dir / "cost_vs_pdr.svg").find("<svg") == 0);

  c.run.sweep_pdr = {0.3};
  CHECK_THROWS_AS(cmd_sweep(c, dir, log), ConfigError);
}

TEST_CASE("format_number") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(29880) == "29880");
  CHECK_THROWS_AS(format_number(std::nan("")), NumericError);
  CHECK_THROWS_AS(format_number(INFINITY), NumericError);
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch("cli");
  write_text(dir / "ok.json", "{}");
  write_text(dir / "concave.json", R"({"solver": {"instance": {"b": 1.5}}})");
  write_text(dir / "bad.json", R"({"system": {"n_frame": 10}})");
  write_text(dir / "broken.json", "{ not json");

  CHECK(run_cli("solve --config " + (dir / "ok.json").string() + " --oracle") == 0);
  CHECK(run_cli("solve --config " + (dir / "concave.json").string() + " --oracle") == 0);
  CHECK(run_cli("solve --config " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("solve --config " + (dir / "broken.json").string()) == 2);
  CHECK(run_cli("solve --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("probe --config " + (dir / "ok.json").string()) == 0);
  CHECK(run_cli("sweep --config " + (dir / "ok.json").string() + " --pdr 0.3 --seeds 1") == 2);

  write_text(dir / "sim.json", R"({"environment": {"total_windows": 200}, "run": {"output_dir": ")" +
                                   (dir / "sim_out").string() + R"("}})");
  CHECK(run_cli("simulate --config " + (dir / "sim.json").string() + " --seed 3 --plots") == 0);
  CHECK(fs::exists(dir / "sim_out" / "gamma_trace.svg"));
  CHECK(read_csv(dir / "sim_out" / "summary.csv")[1][1] == "3");
}

TEST_CASE("solve reports the branch and the oracle gap") {
  auto c = parse_config(nlohmann::json::object());
  std::ostringstream out;
  CHECK(cmd_solve(c, true, out) == exit_code::ok);
  CHECK(out.str().find("branch=acs") != std::string::npos);
  CHECK(out.str().find("OK") != std::string::npos);

  c.instance.model.b = 1.5;
  std::ostringstream out2;
  CHECK(cmd_solve(c, false, out2) == exit_code::ok);
  CHECK(out2.str().find("branch=vertex") != std::string::npos);
  const auto r = solve(c.instance);
  CHECK((r.decision.rho == c.instance.rho_min || r.decision.rho == 1.0));
  CHECK((r.decision.gamma == 0.0 || r.decision.gamma == 1.0));

  // A coarse oracle and a negative tolerance force the gap check to fail.
  c = parse_config(nlohmann::json::object());
  c.instance.params.oracle_grid = 3;
  c.oracle_gap_tol = -1.0;
  std::ostringstream out3;
  CHECK(cmd_solve(c, true, out3) == exit_code::gap);
}

TEST_CASE("probe flags the b = 1 boundary") {
  auto c = parse_config(nlohmann::json::parse(R"({"solver": {"instance": {"b": 1.0}, "probe": {"fit_seeds": 20}}})"));
  std::ostringstream out;
  CHECK(cmd_probe(c, out) == exit_code::ok);
  CHECK(out.str().find("boundary: second differences") != std::string::npos);
  CHECK(out.str().find("median_err") != std::string::npos);
}
