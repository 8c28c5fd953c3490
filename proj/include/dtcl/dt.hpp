#pragma once

#include <span>
#include <vector>

#include "dtcl/core.hpp"

namespace dtcl {

/// Recorded window counts between consecutive drifts, plus the sliding
/// window length used to average them. Updates return new values.
class DriftHistory {
 public:
  explicit DriftHistory(int w, std::vector<int> intervals = {});

  int window() const { return w_; }
  const std::vector<int>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }

 private:
  int w_;
  std::vector<int> intervals_;
};

/// Mean of the latest min(|intervals|, W) intervals. Throws on empty history.
double predict_drift_interval(const DriftHistory& h);

DriftHistory update_drift_history(const DriftHistory& h, int new_interval);

/// clamp(1 - a * x^(-b), 0, 1); x <= 0 yields 0.
double predict_accuracy(const AccuracyModel& m, double x);

/// Minimum offloading probability once the device runs a DNN trained on
/// `x` (expected, possibly fractional) samples. x <= 0 yields 1.
double predicted_min_offload(const AccuracyModel& m, double acc_min, double x);

struct FitReport {
  AccuracyModel model;
  double residual_mse = 0.0;
  int n_samples = 0;
  int iterations = 0;  // Gauss-Newton iterations after the log-linear start
};

/// Least-squares fit of accuracy = 1 - a * x^(-b).
///
/// Starts from the closed-form regression of log(1 - acc) on log(x), which
/// is exact for noiseless power-law data, then refines the untransformed
/// squared error with damped Gauss-Newton (the step halves until the
/// objective decreases; stops when the parameter change is below 1e-8 or
/// after 100 iterations).
///
/// Throws InvalidArgument with fewer than two distinct x values or when any
/// 1 - acc < 1e-9, and NumericError when the fitted exponent is not positive.
FitReport fit_accuracy_model(std::span<const AccuracySample> samples);

}  // namespace dtcl
