#include "doctest.h"

#include <cmath>
#include <random>

#include "dtcl/optimizer.hpp"
#include "instances.hpp"

using namespace dtcl;
using dtcl::testing::random_instance;
using dtcl::testing::reference_cost;
using dtcl::testing::reference_instance;

namespace {

double rel(double x, double y, double scale) { return std::abs(x - y) / scale; }

}  // namespace

TEST_CASE("long_term_cost") {
  auto inst = reference_instance();
  CHECK(long_term_cost(inst, {0.5, 0.0}) == doctest::Approx(70875.0));
  CHECK(long_term_cost(inst, {0.0, 0.3}) == doctest::Approx(10.0 * 1500 * 4.5));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double rho = inst.rho_min + (1 - inst.rho_min) * u(rng), gamma = u(rng);
    const double ref = reference_cost(inst, rho, gamma);
    CHECK(std::abs(long_term_cost(inst, {rho, gamma}) - ref) <= 1e-9 * std::abs(ref));
  }
}

TEST_CASE("oracle lattice evaluation agrees with long_term_cost") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    auto inst = random_instance(rng, 0.05, 2.0);
    for (int g : {2, 3, 17}) {
      const auto o = oracle_solve(inst, g);
      CHECK(o.objective == doctest::Approx(long_term_cost(inst, o.decision)).epsilon(1e-12));
      // Exhaustive check of the argmin on a tiny lattice.
      double best = INFINITY;
      for (int j = 0; j < g; ++j)
        for (int k = 0; k < g; ++k) {
          const double rho = k == g - 1 ? 1.0 : inst.rho_min + (1 - inst.rho_min) * k / (g - 1.0);
          best = std::min(best, reference_cost(inst, rho, j / (g - 1.0)));
        }
      CHECK(o.objective == doctest::Approx(best).epsilon(1e-10));
    }
  }
}

TEST_CASE("cost_partials match central finite differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, 0.05, 2.0);
    const double rho = inst.rho_min + (1 - inst.rho_min) * u(rng), gamma = u(rng);
    const auto g = cost_partials(inst, {rho, gamma});
    const auto s = cost_partials_scale(inst, {rho, gamma});
    const double fd_rho =
        (long_term_cost(inst, {rho + h, gamma}) - long_term_cost(inst, {rho - h, gamma})) / (2 * h);
    const double fd_gamma =
        (long_term_cost(inst, {rho, gamma + h}) - long_term_cost(inst, {rho, gamma - h})) / (2 * h);
    CHECK(rel(g.d_rho, fd_rho, s.d_rho) <= 1e-4);
    CHECK(rel(g.d_gamma, fd_gamma, s.d_gamma) <= 1e-4);
  }
  auto inst = reference_instance();
  CHECK_THROWS_AS(cost_partials(inst, {0.0, 0.5}), NumericError);
  CHECK_THROWS_AS(cost_partials(inst, {0.8, 0.0}), NumericError);
}

TEST_CASE("rho partial is constant in rho when b = 1") {
  auto inst = reference_instance();
  inst.model.b = 1.0;
  const double a = cost_partials(inst, {0.8, 0.4}).d_rho;
  CHECK(cost_partials(inst, {0.95, 0.4}).d_rho == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("stationary_gamma") {
  auto inst = reference_instance();
  const double g = stationary_gamma(inst, 0.8);
  const auto s = cost_partials_scale(inst, {0.8, g});
  CHECK(std::abs(cost_partials(inst, {0.8, g}).d_gamma) <= 1e-8 * s.d_gamma);

  // eta N rho gamma^o does not depend on rho.
  const double x1 = 0.5 * stationary_gamma(inst, 0.5), x2 = 1.0 * stationary_gamma(inst, 1.0);
  CHECK(std::abs(x1 - x2) <= 1e-10 * x2);

  auto longer = inst;
  longer.t_bar *= 2;
  CHECK(stationary_gamma(longer, 0.8) > g);

  inst.model.b = 1.0;
  CHECK_THROWS_AS(stationary_gamma(inst, 0.8), NumericError);
  inst.model.b = 0.3;
  CHECK_THROWS_AS(stationary_gamma(inst, 0.0), NumericError);
}

TEST_CASE("stationary_rho") {
  auto inst = reference_instance();
  const double gamma = 0.3;
  const double r = stationary_rho(inst, gamma);
  const auto s = cost_partials_scale(inst, {r, gamma});
  CHECK(std::abs(cost_partials(inst, {r, gamma}).d_rho) <= 1e-8 * s.d_rho);

  // Dense 1-D search over the feasible rho interval.
  for (double rho_min : {0.0, 0.2, 0.75}) {
    inst.rho_min = rho_min;
    for (double gam : {0.05, 0.3, 0.9}) {
      const int n = 1000000;
      double best = INFINITY, arg = 0;
      for (int i = 0; i <= n; ++i) {
        const double rho = rho_min + (1 - rho_min) * i / n;
        const double f = long_term_cost(inst, {rho, gam});
        if (f < best) best = f, arg = rho;
      }
      const double closed = clamp_rho(stationary_rho(inst, gam), rho_min);
      CHECK(std::abs(closed - arg) <= (1 - rho_min) / n + 1e-12);
      CHECK(long_term_cost(inst, {closed, gam}) <= best + 1e-9 * std::abs(best));
    }
  }

  // The clamped minimizer never does worse than sitting at rho_min.
  for (double ci : {4.5, 45.0}) {
    auto i2 = reference_instance();
    i2.rho_min = 0.2;
    i2.params.cost_infer = ci;
    const double rr = clamp_rho(stationary_rho(i2, 0.3), i2.rho_min);
    CHECK(long_term_cost(i2, {rr, 0.3}) <= long_term_cost(i2, {i2.rho_min, 0.3}));
  }

  inst.model.b = 1.5;
  CHECK_THROWS_AS(stationary_rho(inst, 0.3), NumericError);
}

TEST_CASE("clamps") {
  CHECK(clamp_gamma(0.3) == 0.3);
  CHECK(clamp_gamma(1.7) == 1.0);
  CHECK(clamp_gamma(1.0) == 1.0);
  CHECK(clamp_rho(0.2, 0.75) == 0.75);
  CHECK(clamp_rho(0.9, 0.75) == 0.9);
  CHECK(clamp_rho(1.4, 0.75) == 1.0);
}

TEST_CASE("acs_solve on the reference instance") {
  auto inst = reference_instance();
  const auto r = acs_solve(inst);
  CHECK(r.branch == Branch::acs);
  const auto o = oracle_solve(inst, 2000);
  CHECK(r.objective <= o.objective + 1e-3 * std::abs(o.objective));

  // Multi-start stability.
  for (int k = 0; k < 10; ++k) {
    AcsOptions opts;
    opts.init_rho = inst.rho_min + (1 - inst.rho_min) * k / 9.0;
    const auto rk = acs_solve(inst, opts);
    CHECK(std::abs(rk.decision.rho - r.decision.rho) <= 10 * inst.params.acs_tol);
    CHECK(std::abs(rk.decision.gamma - r.decision.gamma) <= 10 * inst.params.acs_tol);
  }
}

TEST_CASE("acs_solve descends monotonically") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, 0.05, 0.95);
    inst.params.acs_tol = 1e-9;  // long traces
    const auto r = acs_solve(inst);
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
      CHECK(r.objective_trace[k] <= r.objective_trace[k - 1] + 1e-9 * std::abs(r.objective_trace[k - 1]));
  }
}

TEST_CASE("acs_solve edge cases") {
  auto inst = reference_instance();
  inst.model.b = 1.2;
  CHECK_THROWS_AS(acs_solve(inst), NumericError);

  inst = reference_instance();
  inst.rho_min = 1.0;
  const auto r = acs_solve(inst);
  CHECK(r.decision.rho == 1.0);
  CHECK(r.decision.gamma == doctest::Approx(clamp_gamma(stationary_gamma(inst, 1.0))));
  CHECK(r.iterations == 0);

  inst = reference_instance();
  inst.rho_min = 0.0;
  const auto r0 = acs_solve(inst);
  CHECK(r0.decision.rho >= 0.0);
  CHECK(r0.objective <= oracle_solve(inst, 500).objective + 1e-3 * std::abs(r0.objective));
}

TEST_CASE("solver results are feasible and dominate the oracle") {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 60; ++i) {
    const bool convex = i % 2 == 0;
    auto inst = convex ? random_instance(rng, 0.05, 0.95) : random_instance(rng, 1.0, 2.0);
    const auto r = solve(inst);
    CHECK(r.branch == (convex ? Branch::acs : Branch::vertex));
    CHECK(r.decision.rho >= inst.rho_min);
    CHECK(r.decision.rho <= 1.0);
    CHECK(r.decision.gamma >= 0.0);
    CHECK(r.decision.gamma <= 1.0);
    const auto o = oracle_solve(inst, 400);
    CHECK(r.objective <= o.objective + 1e-3 * std::abs(o.objective));
  }
}

TEST_CASE("acs_solve is coordinate-optimal up to the tolerance") {
  std::mt19937_64 rng(55);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, 0.05, 0.95);
    const auto r = acs_solve(inst);
    const double tol = inst.params.acs_tol;
    const double f = r.objective;
    for (auto [dr, dg] : {std::pair{tol, 0.0}, {-tol, 0.0}, {0.0, tol}, {0.0, -tol}}) {
      const Decision d{r.decision.rho + dr, r.decision.gamma + dg};
      if (d.rho < inst.rho_min || d.rho > 1 || d.gamma < 0 || d.gamma > 1) continue;
      CHECK(long_term_cost(inst, d) >= f - 1e-6 * std::abs(f));
    }
  }
}

TEST_CASE("gamma grows with the expected drift interval") {
  std::mt19937_64 rng(89);
  int compared = 0;
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, 0.05, 0.95);
    double prev = -1.0;
    bool clamp_bound = false;
    std::vector<double> gammas;
    for (double t : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
      inst.t_bar = t;
      const auto r = acs_solve(inst);
      clamp_bound = clamp_bound || r.decision.gamma >= 1.0;
      gammas.push_back(r.decision.gamma);
    }
    if (clamp_bound) continue;
    ++compared;
    for (double g : gammas) {
      CHECK(g >= prev);
      prev = g;
    }
  }
  CHECK(compared > 10);
}

TEST_CASE("vertex_solve") {
  std::mt19937_64 rng(144);
  for (int i = 0; i < 30; ++i) {
    auto inst = random_instance(rng, 1.0, 2.0);
    const auto v = vertex_solve(inst);
    CHECK(v.branch == Branch::vertex);
    const auto o = oracle_solve(inst, 300);
    CHECK(std::abs(v.objective - o.objective) <= 1e-6 * std::abs(o.objective));
    const double step = 1.0 / 299;
    CHECK((std::abs(o.decision.gamma) <= step || std::abs(o.decision.gamma - 1) <= step));
    CHECK((std::abs(o.decision.rho - inst.rho_min) <= step * (1 - inst.rho_min) + 1e-12 ||
           std::abs(o.decision.rho - 1) <= step));

    // Positive rescaling of the cost constants leaves the argmin unchanged.
    auto scaled = inst;
    scaled.params.cost_infer *= 7.5;
    scaled.params.cost_train *= 7.5;
    CHECK(vertex_solve(scaled).decision == v.decision);
  }

  auto inst = reference_instance();
  inst.model.b = 1.5;
  inst.params.cost_train = 1e9;
  auto v = vertex_solve(inst);
  CHECK(v.decision == Decision{inst.rho_min, 0.0});

  inst = reference_instance();
  inst.model.b = 1.5;
  inst.params.cost_train = 1e-6;
  inst.t_bar = 1e6;
  v = vertex_solve(inst);
  CHECK(v.decision.gamma == 1.0);
}

TEST_CASE("oracle refinement never increases the minimum") {
  std::mt19937_64 rng(233);
  for (int i = 0; i < 5; ++i) {
    auto inst = random_instance(rng, 0.05, 2.0);
    // 101 -> 2001 points per axis: the coarse lattice is a subset of the fine one.
    CHECK(oracle_solve(inst, 2001).objective <= oracle_solve(inst, 101).objective);
  }
}

TEST_CASE("convexity_probe") {
  auto inst = reference_instance();
  auto r = convexity_probe(inst, 1000);
  CHECK(r.verdict == "bi-convex");
  CHECK(r.min_d2_rho > 0.0);
  CHECK(r.min_d2_gamma > 0.0);

  inst.model.b = 1.0;
  r = convexity_probe(inst, 1000);
  CHECK(r.verdict == "boundary");

  inst.model.b = 1.5;
  r = convexity_probe(inst, 1000);
  CHECK(r.verdict == "bi-concave");
  CHECK(r.max_d2_rho < 0.0);
  CHECK(r.max_d2_gamma < 0.0);
}
