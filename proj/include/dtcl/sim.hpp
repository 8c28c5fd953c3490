#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "dtcl/core.hpp"
#include "dtcl/dt.hpp"
#include "dtcl/optimizer.hpp"

namespace dtcl {

/// Drift probability in effect from `start_window` (1-based) onward.
struct DriftPiece {
  int start_window = 1;
  double p_drift = 0.0;
};

struct EnvConfig {
  int total_windows = 10000;
  std::vector<DriftPiece> drift_schedule{{1, 0.3}, {5001, 0.075}};
  double p_matched = 0.75;
  double markov_stay = 0.3;  // probability the learning-curve state is kept at a drift
  std::vector<AccuracyModel> states{{0.81, 0.25}, {1.30, 0.30}};
  double drift_acc_lo = 0.4;  // degraded device accuracy right after a drift
  double drift_acc_hi = 0.7;
  int matched_ref_samples = 600;
  std::vector<int> checkpoint_xs{50, 150, 300, 600};
  double obs_noise_std = 0.0;
  std::uint64_t seed = 1;

  int initial_state = 0;
  AccuracyModel initial_model{0.81, 0.25};  // DT accuracy model before the first fit
  int calibration_drifts = 10;              // no_dt_update freezes after this many drifts
  double prior_t_bar = 10.0;                // T-bar before any drift has been seen
};

/// P_dr0 for the first half of the horizon and P_dr0 / 4 for the second.
std::vector<DriftPiece> halved_schedule(double p_dr0, int total_windows);

void validate_env(const EnvConfig& cfg);

double drift_probability(const EnvConfig& cfg, int window);

enum class PolicyKind { proposed, lower_bound, no_dt_update, no_dt };

std::string_view to_string(PolicyKind k);
std::optional<PolicyKind> parse_policy(std::string_view name);
inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::proposed, PolicyKind::lower_bound,
                                             PolicyKind::no_dt_update, PolicyKind::no_dt};

/// Environment draw for one window. The remaining fields are only
/// meaningful when `drift` is set.
struct WindowDraw {
  bool drift = false;
  bool matched = false;
  int state_idx = 0;         // learning-curve state in effect from this window
  double degraded_acc = 0.0; // device accuracy during the detection window
  int windows_to_next = 0;   // true T_t: next drift index - t (or T - t + 1)
};

/// Full pre-drawn environment realization shared by all policies.
///
/// Draw order, one 64-bit Mersenne Twister seeded with cfg.seed, per window
/// t = 1..T: a drift uniform; then only if a drift occurred, a matched
/// uniform, a Markov-transition uniform and a degraded-accuracy uniform.
struct Realization {
  std::vector<WindowDraw> windows;
  int drift_count = 0;
};

Realization generate_schedule(const EnvConfig& cfg);

/// Ground-truth device state tracked by the simulator.
struct EnvTruth {
  int window = 1;
  int state_idx = 0;
  double acc_device = 0.0;
  int windows_since_drift = 0;
  bool i_t = false;
  bool m_t = false;
};

struct WindowRecord {
  int window = 0;
  PolicyKind policy = PolicyKind::proposed;
  bool i_t = false;
  bool m_t = false;
  Decision decision;
  double infer_cost = 0.0;
  double retrain_cost = 0.0;
  double acc_device = 0.0;
  double retrain_samples = 0.0;
  double rho_min = 0.0;  // minimum offloading for the accuracy known to the policy
};

/// What the digital twin knows: drift intervals, the last fitted learning
/// curve, and whether it has been frozen (no_dt_update).
struct TwinState {
  DriftHistory history{5};
  AccuracyModel model;
  int drifts_seen = 0;
  int last_drift_window = 0;
  bool frozen = false;
  std::optional<double> frozen_t_bar;
};

/// Expected windows to the next drift as seen by the twin: the sliding
/// mean, or windows-elapsed / drifts-seen before any interval exists.
double twin_t_bar(const TwinState& twin, int window, double prior_t_bar);

/// Inputs a policy may see at the start of a window.
struct PolicyInputs {
  bool retraining = false;      // I_t = 1 and M_t = 0
  double acc_device = 0.0;      // accuracy of the DNN currently on the device
  double t_bar = 1.0;           // twin estimate (proposed, no_dt_update)
  AccuracyModel model;          // twin estimate
  std::optional<double> true_t; // lower_bound only
  std::optional<AccuracyModel> true_model;
};

Decision policy_decide(PolicyKind kind, const PolicyInputs& in, const SystemParams& params);

/// Device accuracy of a DNN trained on `samples` samples under `state`,
/// kept inside [0, 1).
double trained_accuracy(const AccuracyModel& state, double samples);

/// Applies a decision to the current window and returns its record with
/// the device state for the next window. A retrained or matched DNN takes
/// effect from the next window; the degraded accuracy stays in force for
/// the detection window itself.
std::pair<WindowRecord, EnvTruth> step_window(const EnvTruth& env, const Decision& d,
                                              const SystemParams& params, const EnvConfig& cfg,
                                              PolicyKind kind);

/// Accuracy observations of a retraining run: one per checkpoint strictly
/// below the final count, plus the final count floor(samples). Noise, when
/// configured, is Gaussian and clipped into [0, 1 - 1e-6].
std::vector<AccuracySample> observe_training(const AccuracyModel& state, double samples,
                                             const EnvConfig& cfg, std::mt19937_64* noise_rng);

struct SimSummary {
  PolicyKind policy = PolicyKind::proposed;
  std::uint64_t seed = 0;
  double total_cost = 0.0;
  double mean_cost = 0.0;
  double mean_gamma_first_half = 0.0;
  double mean_gamma_second_half = 0.0;
  int retrain_first_half = 0;
  int retrain_second_half = 0;
  int drift_count = 0;
  int refit_failures = 0;
  int twin_history_length = 0;  // recorded drift intervals at the end of the run
};

struct SimResult {
  std::vector<WindowRecord> records;
  SimSummary summary;
};

SimResult run_simulation(const EnvConfig& cfg, const SystemParams& params, PolicyKind kind,
                         const Realization& realization);
SimResult run_simulation(const EnvConfig& cfg, const SystemParams& params, PolicyKind kind);

}  // namespace dtcl
