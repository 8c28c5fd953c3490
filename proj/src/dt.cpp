#include "dtcl/dt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace dtcl {

DriftHistory::DriftHistory(int w, std::vector<int> intervals) : w_(w), intervals_(std::move(intervals)) {
  if (w_ < 1) throw InvalidArgument("window_w out of range");
  for (int d : intervals_)
    if (d < 1) throw InvalidArgument("drift interval must be >= 1");
}

double predict_drift_interval(const DriftHistory& h) {
  const auto& d = h.intervals();
  if (d.empty()) throw InvalidArgument("predict_drift_interval: empty drift history");
  const std::size_t count = std::min<std::size_t>(d.size(), static_cast<std::size_t>(h.window()));
  const double sum = std::accumulate(d.end() - static_cast<std::ptrdiff_t>(count), d.end(), 0.0);
  return sum / static_cast<double>(count);
}

DriftHistory update_drift_history(const DriftHistory& h, int new_interval) {
  if (new_interval < 1) throw InvalidArgument("drift interval must be >= 1");
  auto next = h.intervals();
  next.push_back(new_interval);
  return DriftHistory(h.window(), std::move(next));
}

double predict_accuracy(const AccuracyModel& m, double x) {
  if (!(x > 0.0)) return 0.0;
  return std::clamp(1.0 - m.a * std::pow(x, -m.b), 0.0, 1.0);
}

double predicted_min_offload(const AccuracyModel& m, double acc_min, double x) {
  if (!(x > 0.0)) return 1.0;
  const double err = m.a * std::pow(x, -m.b);
  return std::clamp(1.0 - (1.0 - acc_min) / err, 0.0, 1.0);
}

namespace {

constexpr double kAccPole = 1e-9;
constexpr double kStepTol = 1e-8;
constexpr int kMaxIter = 100;
constexpr int kMaxHalvings = 60;

double sum_squares(std::span<const AccuracySample> s, double a, double b) {
  double total = 0.0;
  for (const auto& p : s) {
    const double r = 1.0 - a * std::pow(static_cast<double>(p.x), -b) - p.acc;
    total += r * r;
  }
  return total;
}

}  // namespace

FitReport fit_accuracy_model(std::span<const AccuracySample> samples) {
  std::set<int> distinct;
  for (const auto& p : samples) {
    if (p.x < 1) throw InvalidArgument("fit_accuracy_model: sample count must be >= 1");
    if (!std::isfinite(p.acc) || 1.0 - p.acc < kAccPole)
      throw InvalidArgument("fit_accuracy_model: accuracy too close to 1");
    distinct.insert(p.x);
  }
  if (distinct.size() < 2) throw InvalidArgument("fit_accuracy_model: need >= 2 distinct x values");

  // log(1 - acc) = log(a) - b * log(x)
  const double n = static_cast<double>(samples.size());
  double mu = 0.0, mv = 0.0;
  for (const auto& p : samples) {
    mu += std::log(static_cast<double>(p.x));
    mv += std::log(1.0 - p.acc);
  }
  mu /= n;
  mv /= n;
  double suu = 0.0, suv = 0.0;
  for (const auto& p : samples) {
    const double du = std::log(static_cast<double>(p.x)) - mu;
    suu += du * du;
    suv += du * (std::log(1.0 - p.acc) - mv);
  }
  double b = -suv / suu;
  double a = std::exp(mv + b * mu);

  double f = sum_squares(samples, a, b);
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    // Normal equations of the residual r = 1 - a x^-b - acc.
    double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
    for (const auto& p : samples) {
      const double xb = std::pow(static_cast<double>(p.x), -b);
      const double r = 1.0 - a * xb - p.acc;
      const double da = -xb;
      const double db = a * xb * std::log(static_cast<double>(p.x));
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    const double det = jaa * jbb - jab * jab;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
    double step_a = -(jbb * ga - jab * gb) / det;
    double step_b = -(jaa * gb - jab * ga) / det;

    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      const double na = a + step_a;
      const double nb = b + step_b;
      const double nf = sum_squares(samples, na, nb);
      if (std::isfinite(nf) && nf < f) {
        a = na;
        b = nb;
        f = nf;
        accepted = true;
        break;
      }
      step_a *= 0.5;
      step_b *= 0.5;
    }
    if (!accepted || std::hypot(step_a, step_b) < kStepTol) break;
  }

  if (!(b > 0.0) || !(a > 0.0))
    throw NumericError("fit_accuracy_model: fitted curve is not increasing (b <= 0)");

  FitReport report;
  report.model = {a, b};
  report.residual_mse = f / n;
  report.n_samples = static_cast<int>(samples.size());
  report.iterations = iter;
  return report;
}

}  // namespace dtcl
