#include "dtcl/sim.hpp"

#include <algorithm>
#include <cmath>

namespace dtcl {

namespace {

// Portable [0, 1) uniform from the raw generator output.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

constexpr double kMaxAccuracy = 1.0 - 1e-12;
constexpr double kNoiseCeiling = 1.0 - 1e-6;
constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;

bool uses_twin(PolicyKind k) { return k == PolicyKind::proposed || k == PolicyKind::no_dt_update; }

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

double required_offload(double acc_device, const SystemParams& p) {
  if (acc_device >= p.acc_min) return 0.0;
  return min_offload_prob(acc_device, p.acc_min, p.acc_edge);
}

}  // namespace

std::vector<DriftPiece> halved_schedule(double p_dr0, int total_windows) {
  return {{1, p_dr0}, {total_windows / 2 + 1, p_dr0 / 4.0}};
}

void validate_env(const EnvConfig& cfg) {
  require(cfg.total_windows >= 1, "total_windows out of range");
  require(!cfg.drift_schedule.empty(), "drift_schedule is empty");
  int prev = 0;
  for (const auto& piece : cfg.drift_schedule) {
    require(piece.start_window > prev, "drift_schedule start windows must increase");
    require(piece.p_drift >= 0.0 && piece.p_drift <= 1.0, "drift probability out of range");
    prev = piece.start_window;
  }
  require(cfg.drift_schedule.front().start_window == 1, "drift_schedule must start at window 1");
  require(cfg.p_matched >= 0.0 && cfg.p_matched <= 1.0, "p_matched out of range");
  require(cfg.markov_stay >= 0.0 && cfg.markov_stay <= 1.0, "markov_stay out of range");
  require(!cfg.states.empty(), "states is empty");
  for (const auto& s : cfg.states) validate_model(s);
  require(cfg.drift_acc_lo >= 0.0 && cfg.drift_acc_lo <= cfg.drift_acc_hi && cfg.drift_acc_hi < 1.0,
          "drift_acc_range out of range");
  require(cfg.matched_ref_samples >= 1, "matched_ref_samples out of range");
  prev = 0;
  for (int x : cfg.checkpoint_xs) {
    require(x > prev, "checkpoint_xs must be strictly increasing positive integers");
    prev = x;
  }
  require(cfg.obs_noise_std >= 0.0, "obs_noise_std out of range");
  require(cfg.initial_state >= 0 && cfg.initial_state < static_cast<int>(cfg.states.size()),
          "initial_state out of range");
  validate_model(cfg.initial_model);
  require(cfg.calibration_drifts >= 1, "calibration_drifts out of range");
  require(cfg.prior_t_bar >= 1.0, "prior_t_bar out of range");
}

double drift_probability(const EnvConfig& cfg, int window) {
  double p = 0.0;
  for (const auto& piece : cfg.drift_schedule) {
    if (piece.start_window > window) break;
    p = piece.p_drift;
  }
  return p;
}

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::proposed: return "proposed";
    case PolicyKind::lower_bound: return "lower_bound";
    case PolicyKind::no_dt_update: return "no_dt_update";
    case PolicyKind::no_dt: return "no_dt";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (auto k : kAllPolicies)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

Realization generate_schedule(const EnvConfig& cfg) {
  validate_env(cfg);
  std::mt19937_64 rng(cfg.seed);
  const int n_states = static_cast<int>(cfg.states.size());

  Realization r;
  r.windows.resize(cfg.total_windows);
  int state = cfg.initial_state;
  for (int t = 1; t <= cfg.total_windows; ++t) {
    WindowDraw& w = r.windows[t - 1];
    w.drift = uniform01(rng) < drift_probability(cfg, t);
    if (w.drift) {
      w.matched = uniform01(rng) < cfg.p_matched;
      const double u_markov = uniform01(rng);
      if (n_states > 1 && u_markov >= cfg.markov_stay) {
        // Leave the current state, uniformly among the others.
        const double u_pick = (u_markov - cfg.markov_stay) / (1.0 - cfg.markov_stay);
        int pick = std::min(static_cast<int>(u_pick * (n_states - 1)), n_states - 2);
        state = pick >= state ? pick + 1 : pick;
      }
      w.degraded_acc = cfg.drift_acc_lo + (cfg.drift_acc_hi - cfg.drift_acc_lo) * uniform01(rng);
      ++r.drift_count;
    }
    w.state_idx = state;
  }

  int next = cfg.total_windows + 1;
  for (int t = cfg.total_windows; t >= 1; --t) {
    WindowDraw& w = r.windows[t - 1];
    w.windows_to_next = next - t;
    if (w.drift) next = t;
  }
  return r;
}

double twin_t_bar(const TwinState& twin, int window, double prior_t_bar) {
  if (twin.frozen_t_bar) return *twin.frozen_t_bar;
  if (!twin.history.empty()) return predict_drift_interval(twin.history);
  if (twin.drifts_seen > 0) return std::max(1.0, static_cast<double>(window) / twin.drifts_seen);
  return prior_t_bar;
}

Decision policy_decide(PolicyKind kind, const PolicyInputs& in, const SystemParams& params) {
  const double rho_min = required_offload(in.acc_device, params);
  if (!in.retraining) return {rho_min, 0.0};

  if (kind == PolicyKind::no_dt) return {rho_min, 1.0};

  P2Instance inst;
  inst.params = params;
  inst.rho_min = rho_min;
  if (kind == PolicyKind::lower_bound) {
    if (!in.true_t || !in.true_model) throw InvalidArgument("lower_bound policy needs the truth");
    inst.t_bar = std::max(1.0, *in.true_t);
    inst.model = *in.true_model;
  } else {
    inst.t_bar = std::max(1.0, in.t_bar);
    inst.model = in.model;
  }
  return solve(inst).decision;
}

double trained_accuracy(const AccuracyModel& state, double samples) {
  return std::min(predict_accuracy(state, samples), kMaxAccuracy);
}

std::pair<WindowRecord, EnvTruth> step_window(const EnvTruth& env, const Decision& d,
                                              const SystemParams& params, const EnvConfig& cfg,
                                              PolicyKind kind) {
  const bool retraining = env.i_t && !env.m_t;
  const auto costs = window_costs(params, d, retraining);

  WindowRecord rec;
  rec.window = env.window;
  rec.policy = kind;
  rec.i_t = env.i_t;
  rec.m_t = env.m_t;
  rec.decision = d;
  rec.infer_cost = costs.infer;
  rec.retrain_cost = costs.retrain;
  rec.acc_device = env.acc_device;
  rec.retrain_samples = retraining ? params.eta * params.n_frames * d.rho * d.gamma : 0.0;
  rec.rho_min = required_offload(env.acc_device, params);

  EnvTruth next = env;
  next.window = env.window + 1;
  next.i_t = false;
  next.m_t = false;
  next.windows_since_drift = env.windows_since_drift + 1;
  const AccuracyModel& state = cfg.states.at(env.state_idx);
  if (retraining)
    next.acc_device = trained_accuracy(state, rec.retrain_samples);
  else if (env.i_t)
    next.acc_device = trained_accuracy(state, cfg.matched_ref_samples);
  return {rec, next};
}

std::vector<AccuracySample> observe_training(const AccuracyModel& state, double samples,
                                             const EnvConfig& cfg, std::mt19937_64* noise_rng) {
  std::vector<AccuracySample> out;
  const double floored = std::floor(samples);
  if (!(floored >= 1.0)) return out;
  const int final_count = static_cast<int>(floored);
  for (int x : cfg.checkpoint_xs)
    if (x < final_count) out.push_back({x, 0.0});
  out.push_back({final_count, 0.0});

  std::normal_distribution<double> noise(0.0, cfg.obs_noise_std);
  for (auto& s : out) {
    s.acc = trained_accuracy(state, s.x);
    if (cfg.obs_noise_std > 0.0 && noise_rng)
      s.acc = std::clamp(s.acc + noise(*noise_rng), 0.0, kNoiseCeiling);
  }
  return out;
}

SimResult run_simulation(const EnvConfig& cfg, const SystemParams& params, PolicyKind kind,
                         const Realization& realization) {
  validate_env(cfg);
  validate_params(params);
  if (static_cast<int>(realization.windows.size()) != cfg.total_windows)
    throw InvalidArgument("realization length does not match total_windows");

  std::mt19937_64 noise_rng(cfg.seed ^ kNoiseStream);

  EnvTruth env;
  env.window = 1;
  env.state_idx = cfg.initial_state;
  env.acc_device = trained_accuracy(cfg.states[cfg.initial_state], cfg.matched_ref_samples);

  TwinState twin;
  twin.history = DriftHistory(params.window_w);
  twin.model = cfg.initial_model;

  SimResult result;
  result.records.reserve(cfg.total_windows);
  SimSummary& sum = result.summary;
  sum.policy = kind;
  sum.seed = cfg.seed;

  const int half = cfg.total_windows / 2;
  double gamma_first = 0.0, gamma_second = 0.0;
  std::vector<AccuracySample> pending;

  for (int t = 1; t <= cfg.total_windows; ++t) {
    const WindowDraw& draw = realization.windows[t - 1];

    // The twin absorbs the previous window's training observations first.
    if (!pending.empty()) {
      if (!twin.frozen) {
        try {
          twin.model = fit_accuracy_model(pending).model;
        } catch (const std::exception&) {
          ++sum.refit_failures;
        }
      }
      pending.clear();
    }

    env.window = t;
    env.i_t = draw.drift;
    env.m_t = draw.drift && draw.matched;
    if (draw.drift) {
      env.state_idx = draw.state_idx;
      env.acc_device = draw.degraded_acc;
      env.windows_since_drift = 0;
      ++sum.drift_count;
      if (uses_twin(kind)) {
        if (kind == PolicyKind::no_dt_update && !twin.frozen &&
            twin.drifts_seen >= cfg.calibration_drifts) {
          twin.frozen_t_bar = twin_t_bar(twin, t, cfg.prior_t_bar);
          twin.frozen = true;
        }
        if (!twin.frozen && twin.last_drift_window > 0)
          twin.history = update_drift_history(twin.history, t - twin.last_drift_window);
        ++twin.drifts_seen;
        twin.last_drift_window = t;
      }
    }

    PolicyInputs in;
    in.retraining = env.i_t && !env.m_t;
    in.acc_device = env.acc_device;
    if (in.retraining) {
      if (uses_twin(kind)) {
        in.t_bar = twin_t_bar(twin, t, cfg.prior_t_bar);
        in.model = twin.model;
      } else if (kind == PolicyKind::lower_bound) {
        in.true_t = static_cast<double>(draw.windows_to_next);
        in.true_model = cfg.states[env.state_idx];
      }
    }
    const Decision d = policy_decide(kind, in, params);

    auto [rec, next] = step_window(env, d, params, cfg, kind);
    if (in.retraining) {
      (t <= half ? gamma_first : gamma_second) += d.gamma;
      ++(t <= half ? sum.retrain_first_half : sum.retrain_second_half);
      if (uses_twin(kind) && !twin.frozen)
        pending = observe_training(cfg.states[env.state_idx], rec.retrain_samples, cfg, &noise_rng);
    }
    sum.total_cost += rec.infer_cost + rec.retrain_cost;
    result.records.push_back(rec);
    env = next;
  }

  sum.twin_history_length = static_cast<int>(twin.history.size());
  sum.mean_cost = sum.total_cost / cfg.total_windows;
  sum.mean_gamma_first_half = sum.retrain_first_half ? gamma_first / sum.retrain_first_half : 0.0;
  sum.mean_gamma_second_half =
      sum.retrain_second_half ? gamma_second / sum.retrain_second_half : 0.0;
  return result;
}

SimResult run_simulation(const EnvConfig& cfg, const SystemParams& params, PolicyKind kind) {
  return run_simulation(cfg, params, kind, generate_schedule(cfg));
}

}  // namespace dtcl
