#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dtcl/core.hpp"

namespace dtcl {

/// One-shot problem solved at the start of a retraining window: choose
/// (rho, gamma) in [rho_min, 1] x [0, 1] minimizing the long-term cost.
struct P2Instance {
  SystemParams params;
  AccuracyModel model;
  double t_bar = 1.0;    // expected windows until the next drift
  double rho_min = 0.0;  // minimum offloading for the degraded device DNN
};

/// Throws InvalidArgument if t_bar < 1, rho_min is outside [0, 1], or the
/// params/model are invalid.
void validate_instance(const P2Instance& inst);

enum class Branch { acs, vertex, oracle };

std::string_view to_string(Branch b);

struct SolveResult {
  Decision decision;
  double objective = 0.0;
  int iterations = 0;
  Branch branch = Branch::acs;
  std::vector<double> objective_trace;  // ACS only: cost after each iteration
};

/// Retraining cost + inference cost now + inference cost over the next
/// t_bar windows at the predicted minimum offloading probability:
///
///   eta N rho gamma c_R + N rho c_I + t_bar N c_I (1 - (1 - A_min) x^b / a),
///   x = eta N rho gamma.
///
/// The last factor is left unclamped so the surrogate keeps its bi-convex
/// (b < 1) or bi-concave (b >= 1) structure on the whole box. At x = 0 it
/// equals 1, i.e. full offloading after a window without retraining.
double long_term_cost(const P2Instance& inst, const Decision& d);

/// Sum of the absolute values of the terms of long_term_cost; bounds its
/// rounding error.
double cost_magnitude(const P2Instance& inst, const Decision& d);

struct CostGradient {
  double d_rho = 0.0;
  double d_gamma = 0.0;
};

/// Analytic partial derivatives of long_term_cost. Requires rho > 0 and
/// gamma > 0 (the power term is singular at x = 0).
CostGradient cost_partials(const P2Instance& inst, const Decision& d);

/// Sum of absolute values of the terms making up each partial. Used as the
/// scale for relative comparisons near a stationary point.
CostGradient cost_partials_scale(const P2Instance& inst, const Decision& d);

/// Root of d/dgamma = 0 for fixed rho (unclamped). Requires 0 < b < 1.
/// The implied sample count eta N rho gamma is independent of rho.
double stationary_gamma(const P2Instance& inst, double rho);

/// Root of d/drho = 0 for fixed gamma (unclamped). Requires 0 < b < 1.
double stationary_rho(const P2Instance& inst, double gamma);

double clamp_gamma(double gamma_o);
double clamp_rho(double rho_o, double rho_min);

struct AcsOptions {
  std::optional<double> init_rho;  // default: midpoint of [rho_min, 1]
};

/// Alternate convex search: exact gamma step, then exact rho step, until
/// both coordinates move less than acs_tol or acs_max_iter is reached.
SolveResult acs_solve(const P2Instance& inst, const AcsOptions& opts = {});

/// Best of the four box vertices {rho_min, 1} x {0, 1}. Ties go to the
/// smaller gamma, then the smaller rho.
SolveResult vertex_solve(const P2Instance& inst);

/// Dispatch on the learning-curve exponent: ACS for 0 < b < 1, vertex
/// enumeration for b >= 1.
SolveResult solve(const P2Instance& inst);

/// Exhaustive search over a uniform grid x grid lattice on
/// [rho_min, 1] x [0, 1]. Scans gamma rows in ascending order and rho
/// ascending within a row; the first strict minimum wins.
SolveResult oracle_solve(const P2Instance& inst, std::optional<int> grid = std::nullopt);

struct ConvexityReport {
  int n_points = 0;
  double step = 0.0;
  double min_d2_rho = 0.0;
  double max_d2_rho = 0.0;
  double min_d2_gamma = 0.0;
  double max_d2_gamma = 0.0;
  // Sign checks use tol plus a rounding allowance; the min/max above are raw.
  bool biconvex = false;    // every second difference >= -tol
  bool biconcave = false;   // every second difference <= +tol
  std::string_view verdict; // "bi-convex", "bi-concave", "boundary", "indefinite"
};

/// Second central differences of long_term_cost in each coordinate at
/// `n_points` random interior points.
ConvexityReport convexity_probe(const P2Instance& inst, int n_points, std::uint64_t seed = 1,
                                double tol = 1e-8);

}  // namespace dtcl
