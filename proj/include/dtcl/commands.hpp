#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "dtcl/config.hpp"
#include "dtcl/report.hpp"

namespace dtcl {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int runtime = 1;
inline constexpr int config = 2;
inline constexpr int gap = 3;
}  // namespace exit_code

/// Noiseless power-law observations at the given sample counts.
std::vector<AccuracySample> power_law_samples(const AccuracyModel& m, std::span<const int> xs);

struct FitRecoveryStats {
  AccuracyModel truth;
  int runs = 0;
  int failures = 0;  // fits that threw
  double median_err_a = 0.0;  // relative errors
  double median_err_b = 0.0;
  double p90_err_a = 0.0;
  double p90_err_b = 0.0;
};

/// Fits `n_seeds` noisy copies of the power law (Gaussian noise, clipped
/// into [0, 1 - 1e-6]) and summarizes the relative parameter errors.
/// Failed fits count as infinite error.
FitRecoveryStats fit_recovery_battery(const AccuracyModel& truth, std::span<const int> xs,
                                      double noise_std, int n_seeds, std::uint64_t base_seed = 1);

/// run.output_dir, overridden by the DTCL_OUTPUT_DIR environment variable.
std::filesystem::path resolve_output_dir(const Config& c);

int cmd_solve(const Config& c, bool with_oracle, std::ostream& out);

/// Writes windows.csv, summary.csv, effective_config.json and, with
/// `plots`, gamma_trace.svg into `dir`.
int cmd_simulate(const Config& c, bool plots, const std::filesystem::path& dir, std::ostream& out);

/// One row per (p_dr0, policy), each averaged over `seeds`. All policies
/// of a (p_dr0, seed) pair share one environment realization.
std::vector<SweepRow> run_sweep(const Config& c, std::span<const double> pdr,
                                std::span<const std::uint64_t> seeds);

/// Writes sweep.csv, cost_vs_pdr.svg and effective_config.json into `dir`.
int cmd_sweep(const Config& c, const std::filesystem::path& dir, std::ostream& out);

int cmd_probe(const Config& c, std::ostream& out);

}  // namespace dtcl
