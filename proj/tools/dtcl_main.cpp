// Command-line front end: solve / simulate / sweep / probe.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dtcl/commands.hpp"

int main(int argc, char** argv) {
  using namespace dtcl;

  CLI::App app{"Digital-twin-based offloading and training-sample selection for edge continual learning"};
  app.require_subcommand(1);

  std::string config_path;
  bool with_oracle = false;
  bool plots = false;
  std::vector<std::uint64_t> seeds;
  std::vector<double> pdr;
  int n_seeds = 0;

  auto* solve = app.add_subcommand("solve", "Solve the configured one-shot instance");
  solve->add_option("--config", config_path, "JSON config")->required();
  solve->add_flag("--oracle", with_oracle, "Cross-check against the grid oracle");

  auto* simulate = app.add_subcommand("simulate", "Run the window-by-window simulation");
  simulate->add_option("--config", config_path, "JSON config")->required();
  simulate->add_flag("--plots", plots, "Also write gamma_trace.svg");
  simulate->add_option("--seed", seeds, "Seed(s), overriding run.seeds");

  auto* sweep = app.add_subcommand("sweep", "Sweep the initial drift probability");
  sweep->add_option("--config", config_path, "JSON config")->required();
  sweep->add_option("--pdr", pdr, "Comma-separated P_dr0 values")->delimiter(',');
  sweep->add_option("--seeds", n_seeds, "Use seeds 1..N")->check(CLI::PositiveNumber);

  auto* probe = app.add_subcommand("probe", "Convexity and fit-recovery diagnostics");
  probe->add_option("--config", config_path, "JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_code::ok : exit_code::config;
  }

  Config cfg;
  try {
    cfg = load_config(config_path);
    if (!seeds.empty()) cfg.run.seeds = seeds;
    if (!pdr.empty()) cfg.run.sweep_pdr = pdr;
    if (n_seeds > 0) {
      cfg.run.seeds.clear();
      for (int s = 1; s <= n_seeds; ++s) cfg.run.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    for (double v : cfg.run.sweep_pdr)
      if (!(v > 0.0 && v <= 1.0)) throw ConfigError("--pdr: values must lie in (0, 1]");
    if (sweep->parsed() && cfg.run.sweep_pdr.size() < 2)
      throw ConfigError("--pdr: need at least two values");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::config;
  }

  try {
    if (solve->parsed()) return cmd_solve(cfg, with_oracle, std::cout);
    if (simulate->parsed()) return cmd_simulate(cfg, plots, resolve_output_dir(cfg), std::cout);
    if (sweep->parsed()) return cmd_sweep(cfg, resolve_output_dir(cfg), std::cout);
    if (probe->parsed()) return cmd_probe(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::runtime;
  }
  return exit_code::runtime;
}
