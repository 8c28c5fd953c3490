#include "dtcl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "dtcl/dt.hpp"
#include "dtcl/optimizer.hpp"

namespace dtcl {

std::vector<AccuracySample> power_law_samples(const AccuracyModel& m, std::span<const int> xs) {
  std::vector<AccuracySample> out;
  out.reserve(xs.size());
  for (int x : xs) out.push_back({x, 1.0 - m.a * std::pow(static_cast<double>(x), -m.b)});
  return out;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  if (!std::isfinite(v[hi])) return v[hi];
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + p.string());
}

std::string effective_config(const Config& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace

FitRecoveryStats fit_recovery_battery(const AccuracyModel& truth, std::span<const int> xs,
                                      double noise_std, int n_seeds, std::uint64_t base_seed) {
  FitRecoveryStats st;
  st.truth = truth;
  st.runs = n_seeds;
  std::vector<double> ea, eb;
  const auto clean = power_law_samples(truth, xs);
  for (int s = 0; s < n_seeds; ++s) {
    std::mt19937_64 rng(base_seed + static_cast<std::uint64_t>(s));
    std::normal_distribution<double> noise(0.0, noise_std);
    auto samples = clean;
    for (auto& p : samples) p.acc = std::clamp(p.acc + noise(rng), 0.0, 1.0 - 1e-6);
    try {
      const auto fit = fit_accuracy_model(samples);
      ea.push_back(std::abs(fit.model.a - truth.a) / truth.a);
      eb.push_back(std::abs(fit.model.b - truth.b) / truth.b);
    } catch (const std::exception&) {
      ++st.failures;
      ea.push_back(std::numeric_limits<double>::infinity());
      eb.push_back(std::numeric_limits<double>::infinity());
    }
  }
  st.median_err_a = quantile(ea, 0.5);
  st.median_err_b = quantile(eb, 0.5);
  st.p90_err_a = quantile(ea, 0.9);
  st.p90_err_b = quantile(eb, 0.9);
  return st;
}

std::filesystem::path resolve_output_dir(const Config& c) {
  if (const char* env = std::getenv("DTCL_OUTPUT_DIR"); env && *env) return env;
  return c.run.output_dir;
}

int cmd_solve(const Config& c, bool with_oracle, std::ostream& out) {
  const P2Instance& inst = c.instance;
  const SolveResult r = solve(inst);
  out << fmt::format("branch={} rho={:.6f} gamma={:.6f} objective={:.6f} iterations={}\n",
                     to_string(r.branch), r.decision.rho, r.decision.gamma, r.objective, r.iterations);
  if (!with_oracle) return exit_code::ok;

  const SolveResult o = oracle_solve(inst);
  const double scale = std::max(1.0, std::abs(o.objective));
  const double gap = (r.objective - o.objective) / scale;
  const bool ok = gap <= c.oracle_gap_tol;
  out << fmt::format("oracle grid={} rho={:.6f} gamma={:.6f} objective={:.6f}\n", inst.params.oracle_grid,
                     o.decision.rho, o.decision.gamma, o.objective);
  out << fmt::format("gap={:.3e} tolerance={:.3e} {}\n", gap, c.oracle_gap_tol, ok ? "OK" : "EXCEEDED");
  return ok ? exit_code::ok : exit_code::gap;
}

int cmd_simulate(const Config& c, bool plots, const std::filesystem::path& dir, std::ostream& out) {
  std::ostringstream windows, summary;
  write_windows_header(windows);
  write_summary_header(summary);
  LineChart chart{"Training probability per retraining window", "window", "gamma", {}, false};

  for (std::size_t si = 0; si < c.run.seeds.size(); ++si) {
    const auto seed = c.run.seeds[si];
    const EnvConfig env = c.env_for(c.p_dr0, seed);
    const Realization real = generate_schedule(env);
    for (auto kind : c.policies) {
      const SimResult res = run_simulation(env, c.system, kind, real);
      write_window_rows(windows, res.records, seed);
      write_summary_row(summary, res.summary);
      out << fmt::format("seed={} policy={} mean_cost={:.3f} gamma_halves={:.4f}/{:.4f} drifts={}\n",
                         seed, to_string(kind), res.summary.mean_cost, res.summary.mean_gamma_first_half,
                         res.summary.mean_gamma_second_half, res.summary.drift_count);
      if (plots && si == 0) {
        ChartSeries s{std::string(to_string(kind)), {}};
        for (const auto& r : res.records)
          if (r.i_t && !r.m_t) s.points.emplace_back(r.window, r.decision.gamma);
        chart.series.push_back(std::move(s));
      }
    }
  }

  std::filesystem::create_directories(dir);
  write_file(dir / "windows.csv", windows.str());
  write_file(dir / "summary.csv", summary.str());
  write_file(dir / "effective_config.json", effective_config(c));
  if (plots) {
    write_file(dir / "gamma_trace.svg", render_svg(chart));
  }
  return exit_code::ok;
}

std::vector<SweepRow> run_sweep(const Config& c, std::span<const double> pdr,
                                std::span<const std::uint64_t> seeds) {
  std::vector<SweepRow> rows;
  for (double p0 : pdr) {
    std::map<PolicyKind, std::vector<double>> costs;
    for (auto seed : seeds) {
      const EnvConfig env = c.env_for(p0, seed);
      const Realization real = generate_schedule(env);
      for (auto kind : c.policies) costs[kind].push_back(run_simulation(env, c.system, kind, real).summary.mean_cost);
    }
    for (auto kind : c.policies) {
      const auto& v = costs[kind];
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / (v.size() - 1)) : 0.0;
      rows.push_back({p0, kind, mean, sd, static_cast<int>(v.size())});
    }
  }
  return rows;
}

int cmd_sweep(const Config& c, const std::filesystem::path& dir, std::ostream& out) {
  if (c.run.sweep_pdr.size() < 2) throw ConfigError("run.sweep_pdr: need at least two values");
  const auto rows = run_sweep(c, c.run.sweep_pdr, c.run.seeds);

  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  LineChart chart{"Average edge computation cost per window", "P_dr0", "GFLOPs per window", {}, true};
  for (auto kind : c.policies) {
    ChartSeries s{std::string(to_string(kind)), {}};
    for (const auto& r : rows)
      if (r.policy == kind) s.points.emplace_back(r.p_dr0, r.mean_cost);
    chart.series.push_back(std::move(s));
  }
  for (const auto& r : rows)
    out << fmt::format("p_dr0={} policy={} mean_cost={:.3f} std={:.3f}\n", r.p_dr0, to_string(r.policy),
                       r.mean_cost, r.std_cost);

  std::filesystem::create_directories(dir);
  write_file(dir / "sweep.csv", csv.str());
  write_file(dir / "cost_vs_pdr.svg", render_svg(chart));
  write_file(dir / "effective_config.json", effective_config(c));
  return exit_code::ok;
}

int cmd_probe(const Config& c, std::ostream& out) {
  bool all_ok = true;
  auto row = [&](const std::string& check, bool ok, const std::string& detail) {
    all_ok = all_ok && ok;
    out << fmt::format("{:<34} {:<5} {}\n", check, ok ? "PASS" : "FAIL", detail);
  };

  const P2Instance& inst = c.instance;
  const auto rep = convexity_probe(inst, c.probe.n_points);
  const double b = inst.model.b;
  const char* expected = b < 1.0 ? "bi-convex" : (b > 1.0 ? "bi-concave" : "boundary");
  std::string detail = fmt::format("b={} verdict={} d2_rho=[{:.3e}, {:.3e}] d2_gamma=[{:.3e}, {:.3e}]", b,
                                   rep.verdict, rep.min_d2_rho, rep.max_d2_rho, rep.min_d2_gamma,
                                   rep.max_d2_gamma);
  if (rep.verdict == "boundary") detail = "boundary: second differences ~ 0; " + detail;
  row("convexity signature", rep.verdict == expected, detail);

  for (const auto& state : c.env.states) {
    const auto samples = power_law_samples(state, c.env.checkpoint_xs);
    bool ok = false;
    std::string d;
    try {
      const auto fit = fit_accuracy_model(samples);
      const double err = std::max(std::abs(fit.model.a - state.a), std::abs(fit.model.b - state.b));
      ok = err <= 1e-6;
      d = fmt::format("fitted=({:.8f}, {:.8f}) max_abs_err={:.2e}", fit.model.a, fit.model.b, err);
    } catch (const std::exception& e) {
      d = e.what();
    }
    row(fmt::format("noiseless fit ({}, {})", state.a, state.b), ok, d);
  }

  for (const auto& state : c.env.states) {
    const auto st = fit_recovery_battery(state, c.env.checkpoint_xs, c.probe.fit_noise_std, c.probe.fit_seeds);
    const bool ok = st.median_err_a <= 0.10 && st.median_err_b <= 0.10;
    row(fmt::format("noisy fit ({}, {}) sigma={}", state.a, state.b, c.probe.fit_noise_std), ok,
        fmt::format("runs={} failures={} median_err a={:.3f} b={:.3f} p90 a={:.3f} b={:.3f}", st.runs,
                    st.failures, st.median_err_a, st.median_err_b, st.p90_err_a, st.p90_err_b));
  }
  return all_ok ? exit_code::ok : exit_code::gap;
}

}  // namespace dtcl
