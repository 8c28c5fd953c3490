#include "dtcl/config.hpp"

#include <fstream>
#include <set>

namespace dtcl {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!keys.count(it.key()))
      throw ConfigError("unknown key '" + (path.empty() ? it.key() : path + "." + it.key()) + "'");
}

template <class T>
void read(const json& obj, const char* key, const std::string& path, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

void read_model(const json& obj, const std::string& path, AccuracyModel& m) {
  reject_unknown(obj, path, {"a", "b"});
  read(obj, "a", path, m.a);
  read(obj, "b", path, m.b);
}

// Runs `fn`, rethrowing invariant violations with the section prefixed.
template <class F>
void checked(const std::string& section, F&& fn) {
  try {
    fn();
  } catch (const InvalidArgument& e) {
    throw ConfigError(section + ": " + e.what());
  }
}

}  // namespace

EnvConfig Config::env_for(std::optional<double> p0, std::uint64_t seed) const {
  EnvConfig e = env;
  if (p0) e.drift_schedule = halved_schedule(*p0, e.total_windows);
  e.seed = seed;
  return e;
}

Config parse_config(const json& doc) {
  Config c;
  reject_unknown(doc, "", {"system", "environment", "policies", "solver", "run"});

  if (auto it = doc.find("system"); it != doc.end()) {
    const std::string path = "system";
    reject_unknown(*it, path,
                   {"n_frames", "eta", "cost_infer", "cost_train", "acc_min", "acc_edge", "window_w"});
    auto& s = c.system;
    read(*it, "n_frames", path, s.n_frames);
    read(*it, "eta", path, s.eta);
    read(*it, "cost_infer", path, s.cost_infer);
    read(*it, "cost_train", path, s.cost_train);
    read(*it, "acc_min", path, s.acc_min);
    read(*it, "acc_edge", path, s.acc_edge);
    read(*it, "window_w", path, s.window_w);
  }

  if (auto it = doc.find("solver"); it != doc.end()) {
    const std::string path = "solver";
    reject_unknown(*it, path,
                   {"acs_tol", "acs_max_iter", "oracle_grid", "oracle_gap_tol", "instance", "probe"});
    read(*it, "acs_tol", path, c.system.acs_tol);
    read(*it, "acs_max_iter", path, c.system.acs_max_iter);
    read(*it, "oracle_grid", path, c.system.oracle_grid);
    read(*it, "oracle_gap_tol", path, c.oracle_gap_tol);
    if (auto inst = it->find("instance"); inst != it->end()) {
      const std::string ipath = "solver.instance";
      reject_unknown(*inst, ipath, {"a", "b", "t_bar", "rho_min"});
      read(*inst, "a", ipath, c.instance.model.a);
      read(*inst, "b", ipath, c.instance.model.b);
      read(*inst, "t_bar", ipath, c.instance.t_bar);
      read(*inst, "rho_min", ipath, c.instance.rho_min);
    }
    if (auto pr = it->find("probe"); pr != it->end()) {
      const std::string ppath = "solver.probe";
      reject_unknown(*pr, ppath, {"n_points", "fit_seeds", "fit_noise_std"});
      read(*pr, "n_points", ppath, c.probe.n_points);
      read(*pr, "fit_seeds", ppath, c.probe.fit_seeds);
      read(*pr, "fit_noise_std", ppath, c.probe.fit_noise_std);
    }
  }

  if (auto it = doc.find("environment"); it != doc.end()) {
    const std::string path = "environment";
    reject_unknown(*it, path,
                   {"total_windows", "p_dr0", "drift_schedule", "p_matched", "markov_stay", "states",
                    "drift_acc_range", "matched_ref_samples", "checkpoint_xs", "obs_noise_std",
                    "initial_state", "initial_model", "calibration_drifts", "prior_t_bar"});
    auto& e = c.env;
    read(*it, "total_windows", path, e.total_windows);
    if (it->contains("p_dr0") && it->contains("drift_schedule"))
      throw ConfigError("environment: give either p_dr0 or drift_schedule, not both");
    if (it->contains("p_dr0")) {
      double p0 = 0.0;
      read(*it, "p_dr0", path, p0);
      c.p_dr0 = p0;
    }
    if (auto ds = it->find("drift_schedule"); ds != it->end()) {
      if (!ds->is_array()) throw ConfigError("environment.drift_schedule: expected an array");
      e.drift_schedule.clear();
      for (const auto& piece : *ds) {
        if (!piece.is_array() || piece.size() != 2 || !piece[0].is_number_integer() ||
            !piece[1].is_number())
          throw ConfigError("environment.drift_schedule: expected [start_window, p] pairs");
        e.drift_schedule.push_back({piece[0].get<int>(), piece[1].get<double>()});
      }
      c.p_dr0.reset();
    }
    read(*it, "p_matched", path, e.p_matched);
    read(*it, "markov_stay", path, e.markov_stay);
    if (auto st = it->find("states"); st != it->end()) {
      if (!st->is_array()) throw ConfigError("environment.states: expected an array");
      e.states.clear();
      for (std::size_t i = 0; i < st->size(); ++i) {
        AccuracyModel m{0.0, 0.0};
        read_model((*st)[i], path + ".states[" + std::to_string(i) + "]", m);
        e.states.push_back(m);
      }
    }
    if (auto r = it->find("drift_acc_range"); r != it->end()) {
      if (!r->is_array() || r->size() != 2 || !(*r)[0].is_number() || !(*r)[1].is_number())
        throw ConfigError("environment.drift_acc_range: expected [lo, hi]");
      e.drift_acc_lo = (*r)[0].get<double>();
      e.drift_acc_hi = (*r)[1].get<double>();
    }
    read(*it, "matched_ref_samples", path, e.matched_ref_samples);
    read(*it, "checkpoint_xs", path, e.checkpoint_xs);
    read(*it, "obs_noise_std", path, e.obs_noise_std);
    read(*it, "initial_state", path, e.initial_state);
    if (auto im = it->find("initial_model"); im != it->end())
      read_model(*im, path + ".initial_model", e.initial_model);
    read(*it, "calibration_drifts", path, e.calibration_drifts);
    read(*it, "prior_t_bar", path, e.prior_t_bar);
  }

  if (auto it = doc.find("policies"); it != doc.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("policies: expected a non-empty array");
    c.policies.clear();
    for (const auto& name : *it) {
      auto k = name.is_string() ? parse_policy(name.get<std::string>()) : std::nullopt;
      if (!k) throw ConfigError("policies: unknown policy " + name.dump());
      c.policies.push_back(*k);
    }
  }

  if (auto it = doc.find("run"); it != doc.end()) {
    const std::string path = "run";
    reject_unknown(*it, path, {"seeds", "output_dir", "sweep_pdr", "full_horizon"});
    read(*it, "seeds", path, c.run.seeds);
    read(*it, "output_dir", path, c.run.output_dir);
    read(*it, "sweep_pdr", path, c.run.sweep_pdr);
    read(*it, "full_horizon", path, c.run.full_horizon);
  }

  if (c.run.full_horizon) c.env.total_windows = kFullHorizon;
  if (c.p_dr0) {
    if (!(*c.p_dr0 >= 0.0 && *c.p_dr0 <= 1.0)) throw ConfigError("environment.p_dr0 out of range");
    c.env.drift_schedule = halved_schedule(*c.p_dr0, c.env.total_windows);
  }
  c.instance.params = c.system;

  checked("system", [&] { validate_params(c.system); });
  checked("environment", [&] { validate_env(c.env); });
  checked("solver.instance", [&] { validate_instance(c.instance); });
  if (!(c.oracle_gap_tol >= 0.0)) throw ConfigError("solver.oracle_gap_tol out of range");
  if (c.probe.n_points < 1) throw ConfigError("solver.probe.n_points out of range");
  if (c.probe.fit_seeds < 1) throw ConfigError("solver.probe.fit_seeds out of range");
  if (!(c.probe.fit_noise_std >= 0.0)) throw ConfigError("solver.probe.fit_noise_std out of range");
  if (c.run.seeds.empty()) throw ConfigError("run.seeds: need at least one seed");
  for (double v : c.run.sweep_pdr)
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError("run.sweep_pdr: values must lie in (0, 1]");
  if (c.run.output_dir.empty()) throw ConfigError("run.output_dir is empty");
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

json to_json(const Config& c) {
  json j;
  const auto& s = c.system;
  j["system"] = {{"n_frames", s.n_frames}, {"eta", s.eta},         {"cost_infer", s.cost_infer},
                 {"cost_train", s.cost_train}, {"acc_min", s.acc_min}, {"acc_edge", s.acc_edge},
                 {"window_w", s.window_w}};
  j["solver"] = {{"acs_tol", s.acs_tol},
                 {"acs_max_iter", s.acs_max_iter},
                 {"oracle_grid", s.oracle_grid},
                 {"oracle_gap_tol", c.oracle_gap_tol},
                 {"instance",
                  {{"a", c.instance.model.a},
                   {"b", c.instance.model.b},
                   {"t_bar", c.instance.t_bar},
                   {"rho_min", c.instance.rho_min}}},
                 {"probe",
                  {{"n_points", c.probe.n_points},
                   {"fit_seeds", c.probe.fit_seeds},
                   {"fit_noise_std", c.probe.fit_noise_std}}}};

  const auto& e = c.env;
  json env = {{"total_windows", e.total_windows},
              {"p_matched", e.p_matched},
              {"markov_stay", e.markov_stay},
              {"drift_acc_range", {e.drift_acc_lo, e.drift_acc_hi}},
              {"matched_ref_samples", e.matched_ref_samples},
              {"checkpoint_xs", e.checkpoint_xs},
              {"obs_noise_std", e.obs_noise_std},
              {"initial_state", e.initial_state},
              {"initial_model", {{"a", e.initial_model.a}, {"b", e.initial_model.b}}},
              {"calibration_drifts", e.calibration_drifts},
              {"prior_t_bar", e.prior_t_bar}};
  if (c.p_dr0) {
    env["p_dr0"] = *c.p_dr0;
  } else {
    json ds = json::array();
    for (const auto& p : e.drift_schedule) ds.push_back({p.start_window, p.p_drift});
    env["drift_schedule"] = ds;
  }
  json states = json::array();
  for (const auto& m : e.states) states.push_back({{"a", m.a}, {"b", m.b}});
  env["states"] = states;
  if (c.run.full_horizon) env.erase("total_windows");
  j["environment"] = env;

  json pol = json::array();
  for (auto k : c.policies) pol.push_back(std::string(to_string(k)));
  j["policies"] = pol;

  j["run"] = {{"seeds", c.run.seeds},
              {"output_dir", c.run.output_dir},
              {"sweep_pdr", c.run.sweep_pdr},
              {"full_horizon", c.run.full_horizon}};
  return j;
}

}  // namespace dtcl
