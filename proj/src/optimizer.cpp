#include "dtcl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dtcl {

namespace {

constexpr double kDegenerateBox = 1e-12;

// Shorthands for the constants of one instance.
struct Terms {
  double n;       // N
  double eta_n;   // eta N
  double ci;      // c_I
  double cr;      // c_R
  double slack;   // 1 - A_min
  double future;  // t_bar N c_I
  double a;
  double b;

  explicit Terms(const P2Instance& inst)
      : n(inst.params.n_frames),
        eta_n(inst.params.eta * inst.params.n_frames),
        ci(inst.params.cost_infer),
        cr(inst.params.cost_train),
        slack(1.0 - inst.params.acc_min),
        future(inst.t_bar * inst.params.n_frames * inst.params.cost_infer),
        a(inst.model.a),
        b(inst.model.b) {}
};

void require_convex_branch(const P2Instance& inst, const char* who) {
  const double b = inst.model.b;
  if (!(b > 0.0 && b < 1.0)) throw NumericError(std::string(who) + ": requires 0 < b < 1");
}

}  // namespace

void validate_instance(const P2Instance& inst) {
  validate_params(inst.params);
  validate_model(inst.model);
  if (!std::isfinite(inst.t_bar) || inst.t_bar < 1.0) throw InvalidArgument("t_bar out of range");
  if (!std::isfinite(inst.rho_min) || inst.rho_min < 0.0 || inst.rho_min > 1.0)
    throw InvalidArgument("rho_min out of range");
}

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::acs: return "acs";
    case Branch::vertex: return "vertex";
    case Branch::oracle: return "oracle";
  }
  return "unknown";
}

double long_term_cost(const P2Instance& inst, const Decision& d) {
  const Terms t(inst);
  const double x = t.eta_n * d.rho * d.gamma;
  const double future_offload = x > 0.0 ? 1.0 - t.slack * std::pow(x, t.b) / t.a : 1.0;
  return x * t.cr + t.n * d.rho * t.ci + t.future * future_offload;
}

double cost_magnitude(const P2Instance& inst, const Decision& d) {
  const Terms t(inst);
  const double x = t.eta_n * d.rho * d.gamma;
  const double power = x > 0.0 ? t.future * t.slack * std::pow(x, t.b) / t.a : 0.0;
  return x * t.cr + t.n * d.rho * t.ci + t.future + power;
}

CostGradient cost_partials(const P2Instance& inst, const Decision& d) {
  if (!(d.rho > 0.0) || !(d.gamma > 0.0))
    throw NumericError("cost_partials: rho and gamma must be positive");
  const Terms t(inst);
  const double k = t.future * t.slack * t.b / t.a;
  CostGradient g;
  g.d_rho = t.eta_n * d.gamma * t.cr + t.n * t.ci -
            k * std::pow(t.eta_n * d.gamma, t.b) * std::pow(d.rho, t.b - 1.0);
  g.d_gamma = t.eta_n * d.rho * t.cr -
              k * std::pow(t.eta_n * d.rho, t.b) * std::pow(d.gamma, t.b - 1.0);
  return g;
}

CostGradient cost_partials_scale(const P2Instance& inst, const Decision& d) {
  const Terms t(inst);
  const double k = t.future * t.slack * t.b / t.a;
  CostGradient s;
  s.d_rho = std::abs(t.eta_n * d.gamma * t.cr) + t.n * t.ci +
            std::abs(k * std::pow(t.eta_n * d.gamma, t.b) * std::pow(d.rho, t.b - 1.0));
  s.d_gamma = std::abs(t.eta_n * d.rho * t.cr) +
              std::abs(k * std::pow(t.eta_n * d.rho, t.b) * std::pow(d.gamma, t.b - 1.0));
  return s;
}

double stationary_gamma(const P2Instance& inst, double rho) {
  require_convex_branch(inst, "stationary_gamma");
  if (!(rho > 0.0)) throw NumericError("stationary_gamma: rho must be positive");
  const Terms t(inst);
  // Optimal expected sample count, independent of rho.
  const double x_opt = std::pow(t.a * t.cr / (t.future * t.slack * t.b), 1.0 / (t.b - 1.0));
  return x_opt / (t.eta_n * rho);
}

double stationary_rho(const P2Instance& inst, double gamma) {
  require_convex_branch(inst, "stationary_rho");
  if (!(gamma > 0.0)) throw NumericError("stationary_rho: gamma must be positive");
  const Terms t(inst);
  const double eta = inst.params.eta;
  const double ratio = t.a * (eta * gamma * t.cr + t.ci) /
                       (inst.t_bar * t.ci * t.slack * t.b * std::pow(t.eta_n * gamma, t.b));
  return std::pow(ratio, 1.0 / (t.b - 1.0));
}

double clamp_gamma(double gamma_o) { return gamma_o > 1.0 ? 1.0 : gamma_o; }

double clamp_rho(double rho_o, double rho_min) {
  if (rho_o <= rho_min) return rho_min;
  if (rho_o <= 1.0) return rho_o;
  return 1.0;
}

SolveResult acs_solve(const P2Instance& inst, const AcsOptions& opts) {
  validate_instance(inst);
  require_convex_branch(inst, "acs_solve");
  const auto& p = inst.params;

  SolveResult out;
  out.branch = Branch::acs;

  if (inst.rho_min >= 1.0 - kDegenerateBox) {
    out.decision = {1.0, clamp_gamma(stationary_gamma(inst, 1.0))};
    out.objective = long_term_cost(inst, out.decision);
    return out;
  }

  double rho = opts.init_rho.value_or(0.5 * (inst.rho_min + 1.0));
  if (!(rho >= inst.rho_min && rho <= 1.0)) throw InvalidArgument("init_rho outside [rho_min, 1]");
  // rho_min may be 0; the gamma step needs a positive rho.
  rho = std::max(rho, std::numeric_limits<double>::min());
  double gamma = std::numeric_limits<double>::infinity();

  int iter = 0;
  while (iter < p.acs_max_iter) {
    ++iter;
    const double next_gamma = clamp_gamma(stationary_gamma(inst, rho));
    const double next_rho = clamp_rho(stationary_rho(inst, next_gamma), inst.rho_min);
    const bool converged =
        std::abs(next_rho - rho) < p.acs_tol && std::abs(next_gamma - gamma) < p.acs_tol;
    rho = next_rho;
    gamma = next_gamma;
    out.objective_trace.push_back(long_term_cost(inst, {rho, gamma}));
    if (converged) break;
  }

  out.decision = {rho, gamma};
  out.objective = out.objective_trace.back();
  out.iterations = iter;
  return out;
}

SolveResult vertex_solve(const P2Instance& inst) {
  validate_instance(inst);
  SolveResult out;
  out.branch = Branch::vertex;
  out.objective = std::numeric_limits<double>::infinity();
  for (double gamma : {0.0, 1.0}) {
    for (double rho : {inst.rho_min, 1.0}) {
      const double f = long_term_cost(inst, {rho, gamma});
      if (f < out.objective) {
        out.objective = f;
        out.decision = {rho, gamma};
      }
    }
  }
  return out;
}

SolveResult solve(const P2Instance& inst) {
  return inst.model.b < 1.0 ? acs_solve(inst) : vertex_solve(inst);
}

SolveResult oracle_solve(const P2Instance& inst, std::optional<int> grid) {
  validate_instance(inst);
  const int g = grid.value_or(inst.params.oracle_grid);
  if (g < 2) throw InvalidArgument("oracle_grid out of range");
  const Terms t(inst);
  const double span = 1.0 - inst.rho_min;
  const double step = 1.0 / (g - 1);

  // cost(rho, gamma) = rho * (gamma * eta N c_R + N c_I) + t_bar N c_I
  //                    - t_bar N c_I (1 - A_min) / a * (eta N)^b * rho^b * gamma^b
  std::vector<double> rhos(g), rho_pow(g);
  for (int i = 0; i < g; ++i) {
    rhos[i] = i == g - 1 ? 1.0 : inst.rho_min + span * (i * step);
    rho_pow[i] = std::pow(rhos[i], t.b);
  }
  const double gain = t.future * t.slack / t.a * std::pow(t.eta_n, t.b);

  SolveResult out;
  out.branch = Branch::oracle;
  out.objective = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g; ++j) {
    const double gamma = j == g - 1 ? 1.0 : j * step;
    const double slope = gamma * t.eta_n * t.cr + t.n * t.ci;
    const double pull = gain * std::pow(gamma, t.b);
    for (int i = 0; i < g; ++i) {
      const double f = rhos[i] * slope + t.future - pull * rho_pow[i];
      if (f < out.objective) {
        out.objective = f;
        out.decision = {rhos[i], gamma};
      }
    }
  }
  out.iterations = g * g;
  return out;
}

ConvexityReport convexity_probe(const P2Instance& inst, int n_points, std::uint64_t seed,
                                double tol) {
  validate_instance(inst);
  if (n_points < 1) throw InvalidArgument("n_points must be >= 1");
  constexpr double h = 1e-4;
  constexpr double margin = 1e-3;
  const double lo_rho = std::min(inst.rho_min + margin, 1.0 - margin);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  ConvexityReport r;
  r.n_points = n_points;
  r.step = h;
  r.min_d2_rho = r.min_d2_gamma = std::numeric_limits<double>::infinity();
  r.max_d2_rho = r.max_d2_gamma = -std::numeric_limits<double>::infinity();
  bool convex_ok = true, concave_ok = true;
  for (int k = 0; k < n_points; ++k) {
    const double rho = lo_rho + (1.0 - margin - lo_rho) * u01(rng);
    const double gamma = margin + (1.0 - 2.0 * margin) * u01(rng);
    const double f0 = long_term_cost(inst, {rho, gamma});
    const double d2r = long_term_cost(inst, {rho + h, gamma}) - 2.0 * f0 +
                       long_term_cost(inst, {rho - h, gamma});
    const double d2g = long_term_cost(inst, {rho, gamma + h}) - 2.0 * f0 +
                       long_term_cost(inst, {rho, gamma - h});
    r.min_d2_rho = std::min(r.min_d2_rho, d2r);
    r.max_d2_rho = std::max(r.max_d2_rho, d2r);
    r.min_d2_gamma = std::min(r.min_d2_gamma, d2g);
    r.max_d2_gamma = std::max(r.max_d2_gamma, d2g);

    // The unclamped power term can be orders of magnitude larger than the
    // cost itself, so sign decisions allow for its rounding error.
    const double scale = 4.0 * cost_magnitude(inst, {std::min(rho + h, 1.0), gamma + h});
    const double allow = tol + 16.0 * std::numeric_limits<double>::epsilon() * scale;
    convex_ok = convex_ok && d2r >= -allow && d2g >= -allow;
    concave_ok = concave_ok && d2r <= allow && d2g <= allow;
  }
  r.biconvex = convex_ok;
  r.biconcave = concave_ok;
  if (r.biconvex && r.biconcave)
    r.verdict = "boundary";
  else if (r.biconvex)
    r.verdict = "bi-convex";
  else if (r.biconcave)
    r.verdict = "bi-concave";
  else
    r.verdict = "indefinite";
  return r;
}

}  // namespace dtcl
