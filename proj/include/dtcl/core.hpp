#pragma once

#include <stdexcept>
#include <string>

namespace dtcl {

/// Raised when a parameter or configuration value violates its invariant.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised by numerical routines that cannot produce a meaningful answer
/// (singular data, wrong solver branch, non-monotone fit).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Static scenario constants shared by the solver and the simulator.
/// Costs are in GFLOPs.
struct SystemParams {
  int n_frames = 1500;       // frames per window
  double eta = 0.8;          // fraction of a window usable for sample collection
  double cost_infer = 4.5;   // per offloaded task on the large DNN
  double cost_train = 24.9;  // per training sample
  double acc_min = 0.9;      // required average accuracy
  double acc_edge = 1.0;     // server DNN accuracy
  int window_w = 5;          // sliding window for drift-interval averaging
  double acs_tol = 1e-2;
  int acs_max_iter = 100;
  int oracle_grid = 2000;    // lattice points per axis for the brute-force solver
};

/// Power-law learning curve: accuracy(x) = 1 - a * x^(-b).
struct AccuracyModel {
  double a = 0.81;
  double b = 0.25;

  friend bool operator==(const AccuracyModel&, const AccuracyModel&) = default;
};

/// Offloading probability and training probability for one window.
struct Decision {
  double rho = 0.0;
  double gamma = 0.0;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// One (training-sample count, observed accuracy) point.
struct AccuracySample {
  int x = 1;
  double acc = 0.0;
};

struct WindowCosts {
  double infer = 0.0;
  double retrain = 0.0;

  double total() const { return infer + retrain; }
};

/// Returns `p` unchanged, or throws InvalidArgument naming the first
/// violated invariant ("eta out of range", ...).
SystemParams validate_params(const SystemParams& p);

void validate_model(const AccuracyModel& m);
void validate_decision(const Decision& d);

/// (1 - rho) * acc_device + rho * acc_edge
double average_accuracy(double rho, double acc_device, double acc_edge);

/// Smallest offloading probability meeting `acc_min` on average, clamped
/// into [0, 1]. Throws NumericError at the pole acc_device >= acc_edge;
/// callers with a perfect device model must special-case it.
double min_offload_prob(double acc_device, double acc_min, double acc_edge = 1.0);

/// Expected server cost of one window. The retrain part is zero unless
/// `retraining` is set.
WindowCosts window_costs(const SystemParams& p, const Decision& d, bool retraining);

}  // namespace dtcl
