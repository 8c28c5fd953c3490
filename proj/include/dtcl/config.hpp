#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dtcl/core.hpp"
#include "dtcl/optimizer.hpp"
#include "dtcl/sim.hpp"

namespace dtcl {

/// Configuration problem; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ProbeSettings {
  int n_points = 1000;
  int fit_seeds = 100;
  double fit_noise_std = 0.01;
};

struct RunSettings {
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  std::vector<double> sweep_pdr{0.05, 0.1, 0.2, 0.3};
  bool full_horizon = false;  // T = 1e5 instead of the configured horizon
};

/// The whole experiment description. Sections of the JSON document:
/// system, environment, policies, solver (with nested instance/probe), run.
struct Config {
  SystemParams system;
  EnvConfig env;
  std::optional<double> p_dr0 = 0.3;  // when set, env.drift_schedule is the halved schedule
  std::vector<PolicyKind> policies{std::begin(kAllPolicies), std::end(kAllPolicies)};
  double oracle_gap_tol = 1e-3;
  P2Instance instance{SystemParams{}, AccuracyModel{0.81, 0.25}, 10.0, 0.75};  // params mirror `system`
  ProbeSettings probe;
  RunSettings run;

  /// Environment for one (p_dr0, seed) run.
  EnvConfig env_for(std::optional<double> p0, std::uint64_t seed) const;
};

inline constexpr int kFullHorizon = 100000;

Config parse_config(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);

/// Fully resolved configuration; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const Config& c);

}  // namespace dtcl
