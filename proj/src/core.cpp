#include "dtcl/core.hpp"

#include <algorithm>
#include <cmath>

namespace dtcl {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

bool is_probability(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

SystemParams validate_params(const SystemParams& p) {
  require(p.n_frames >= 1, "n_frames out of range");
  require(std::isfinite(p.eta) && p.eta > 0.0 && p.eta <= 1.0, "eta out of range");
  require(std::isfinite(p.cost_infer) && p.cost_infer > 0.0, "cost_infer out of range");
  require(std::isfinite(p.cost_train) && p.cost_train > 0.0, "cost_train out of range");
  require(std::isfinite(p.acc_min) && p.acc_min > 0.0 && p.acc_min < 1.0, "acc_min out of range");
  require(std::isfinite(p.acc_edge) && p.acc_edge > 0.0 && p.acc_edge <= 1.0,
          "acc_edge out of range");
  require(p.acc_min <= p.acc_edge, "acc_min exceeds acc_edge");
  require(p.window_w >= 1, "window_w out of range");
  require(std::isfinite(p.acs_tol) && p.acs_tol > 0.0, "acs_tol out of range");
  require(p.acs_max_iter >= 1, "acs_max_iter out of range");
  require(p.oracle_grid >= 2, "oracle_grid out of range");
  return p;
}

void validate_model(const AccuracyModel& m) {
  require(std::isfinite(m.a) && m.a > 0.0, "model a out of range");
  require(std::isfinite(m.b) && m.b > 0.0, "model b out of range");
}

void validate_decision(const Decision& d) {
  require(is_probability(d.rho), "rho out of range");
  require(is_probability(d.gamma), "gamma out of range");
}

double average_accuracy(double rho, double acc_device, double acc_edge) {
  return (1.0 - rho) * acc_device + rho * acc_edge;
}

double min_offload_prob(double acc_device, double acc_min, double acc_edge) {
  const double headroom = acc_edge - acc_device;
  if (!(headroom > 0.0)) throw NumericError("min_offload_prob: device accuracy at pole");
  if (acc_device >= acc_min) return 0.0;
  if (acc_edge == 1.0) {
    // 1 - (1 - A_min) / (1 - A_D)
    return std::clamp(1.0 - (1.0 - acc_min) / (1.0 - acc_device), 0.0, 1.0);
  }
  return std::clamp((acc_min - acc_device) / headroom, 0.0, 1.0);
}

WindowCosts window_costs(const SystemParams& p, const Decision& d, bool retraining) {
  const double n = p.n_frames;
  WindowCosts c;
  c.infer = n * d.rho * p.cost_infer;
  c.retrain = retraining ? p.eta * n * d.rho * d.gamma * p.cost_train : 0.0;
  return c;
}

}  // namespace dtcl
