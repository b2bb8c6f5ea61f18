#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "hypercube/errors.hpp"
#include "hypercube/model.hpp"
#include "hypercube/optimizer.hpp"
#include "hypercube/rng.hpp"

using namespace hypercube;

namespace {

CayleyTable example_loop5() {
  return CayleyTable::validated(5, {0, 1, 2, 3, 4, 1, 2, 0, 4, 3, 2, 3, 4,
                                    0, 1, 3, 4, 1, 2, 0, 4, 0, 3, 1, 2});
}

std::vector<CMatrix>& stack_of(FactorSet& f, char which) {
  return which == 'A' ? f.A : which == 'B' ? f.B : f.C;
}

/// Central finite difference of the penalty loss in one real coordinate.
double fd_partial(FactorSet f, const CayleyTable& t, double mu, char stack,
                  int slice, int i, int j, bool imag_part) {
  const double h = 1e-5;
  Complex& z = stack_of(f, stack)[slice](i, j);
  const Complex orig = z;
  const Complex dz = imag_part ? Complex(0.0, h) : Complex(h, 0.0);
  z = orig + dz;
  const double lp = penalty_loss(f, t, mu);
  z = orig - dz;
  const double lm = penalty_loss(f, t, mu);
  z = orig;
  return (lp - lm) / (2.0 * h);
}

void check_close_rel(double got, double want, double rel) {
  const double scale = std::max({std::abs(got), std::abs(want), 1e-6});
  CHECK(std::abs(got - want) <= rel * scale);
}

OptConfig quick_config() {
  OptConfig cfg;
  cfg.restarts = 2;
  cfg.max_steps = 12'000;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("init_random: determinism, distinctness, norm statistics") {
  const FactorSet a = init_random(4, 9, 0.5);
  const FactorSet b = init_random(4, 9, 0.5);
  for (int i = 0; i < 4; ++i) {
    CHECK(a.A[i] == b.A[i]);
    CHECK(a.C[i] == b.C[i]);
  }
  CHECK(init_random(4, 10, 0.5).A[0] != a.A[0]);

  // E||slice||^2 = n * scale^2; Monte-Carlo over 100 seeds should land
  // well inside +-50% at n = 5.
  const double scale = 0.6;
  double mean = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s)
    mean += norm_sq(init_random(5, s, scale).A[0]);
  mean /= 100.0;
  CHECK(mean > 0.5 * 5.0 * scale * scale);
  CHECK(mean < 1.5 * 5.0 * scale * scale);
}

TEST_CASE("penalty_loss reference values") {
  const CayleyTable z4 = group_table("Zn:4");
  const FactorSet reg = regular_rep_factors(z4);
  for (double mu : {1.0, 10.0, 1e4})
    CHECK(penalty_loss(reg, z4, mu) == 48.0);  // 3 n^2, exact: residual is 0

  const CayleyTable z2 = group_table("Zn:2");
  CHECK(penalty_loss(FactorSet::zeros(2), z2, 1.0) == 4.0);  // |delta| = n^2

  const FactorSet rnd = init_random(3, 5, 0.8);
  const CayleyTable z3 = group_table("Zn:3");
  const double l1 = penalty_loss(rnd, z3, 10.0);
  const double l2 = penalty_loss(rnd, z3, 100.0);
  CHECK(l2 > l1);
  // linear in mu: L(mu) = mu * P + H
  const double p = (l2 - l1) / 90.0;
  CHECK(penalty_loss(rnd, z3, 1000.0) ==
        doctest::Approx(l2 + 900.0 * p).epsilon(1e-9));
}

TEST_CASE("analytic gradient matches central finite differences") {
  const CayleyTable z3 = group_table("Zn:3");
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const FactorSet f = init_random(3, 1000 + seed, 0.9);
    const double mu = seed % 2 == 0 ? 7.0 : 250.0;
    const FactorSet g = analytic_grad(f, z3, mu);
    for (char stack : {'A', 'B', 'C'})
      for (int s = 0; s < 3; ++s)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const CMatrix& gm =
                (stack == 'A' ? g.A : stack == 'B' ? g.B : g.C)[s];
            check_close_rel(gm(i, j).real(),
                            fd_partial(f, z3, mu, stack, s, i, j, false), 1e-4);
            check_close_rel(gm(i, j).imag(),
                            fd_partial(f, z3, mu, stack, s, i, j, true), 1e-4);
          }
  }
}

TEST_CASE("tied gradient matches finite differences through the tying") {
  const CayleyTable z3 = group_table("Zn:3");
  const FactorSet f0 = init_random(3, 77, 0.9);
  std::vector<CMatrix> rho = f0.A;
  const double mu = 13.0;

  auto tied_loss = [&](const std::vector<CMatrix>& r) {
    FactorSet f = FactorSet::zeros(3);
    f.A = r;
    f.B = r;
    for (int g = 0; g < 3; ++g) f.C[g] = dagger(r[g]);
    return penalty_loss(f, z3, mu);
  };

  const std::vector<CMatrix> g = analytic_grad_tied(rho, z3, mu);
  const double h = 1e-5;
  for (int s = 0; s < 3; ++s)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (bool imag_part : {false, true}) {
          const Complex dz = imag_part ? Complex(0.0, h) : Complex(h, 0.0);
          std::vector<CMatrix> r = rho;
          r[s](i, j) += dz;
          const double lp = tied_loss(r);
          r[s](i, j) = rho[s](i, j) - dz;
          const double lm = tied_loss(r);
          const double fd = (lp - lm) / (2.0 * h);
          check_close_rel(imag_part ? g[s](i, j).imag() : g[s](i, j).real(), fd,
                          1e-4);
        }
}

TEST_CASE("gradient separability and exact-certificate behavior") {
  const CayleyTable z3 = group_table("Zn:3");
  FactorSet f = init_random(3, 5, 1.0);

  // mu = 0: the objective part of grad_A[1] only sees the B and C stacks
  const FactorSet g1 = analytic_grad(f, z3, 0.0);
  FactorSet fp = f;
  fp.A[2](0, 0) += Complex(0.5, -0.25);
  const FactorSet g2 = analytic_grad(fp, z3, 0.0);
  CHECK(max_abs(g1.A[1] - g2.A[1]) == 0.0);

  // at an exact certificate the constraint term contributes exactly nothing
  const CayleyTable z4 = group_table("Zn:4");
  const FactorSet reg = regular_rep_factors(z4);
  const FactorSet ga = analytic_grad(reg, z4, 1e6);
  const FactorSet gb = analytic_grad(reg, z4, 0.0);
  for (int i = 0; i < 4; ++i) {
    CHECK(max_abs(ga.A[i] - gb.A[i]) == 0.0);
    CHECK(max_abs(ga.B[i] - gb.B[i]) == 0.0);
    CHECK(max_abs(ga.C[i] - gb.C[i]) == 0.0);
  }
}

TEST_CASE("minimize converges on Z3 and is bit-deterministic") {
  const CayleyTable z3 = group_table("Zn:3");
  const OptConfig cfg = quick_config();
  const MinimizeOutcome a = minimize(z3, cfg);
  CHECK(a.best.converged);
  CHECK(a.best.feas_residual <= cfg.feas_tol);
  CHECK(a.best.H / 9.0 == doctest::Approx(3.0).epsilon(2e-2));
  CHECK(a.best.H == doctest::Approx(objective_H(a.best.theta)).epsilon(1e-9));
  CHECK(std::abs(a.best.H - a.best.B - a.best.R) <=
        1e-9 * std::max(1.0, a.best.H));

  const MinimizeOutcome b = minimize(z3, cfg);
  CHECK(a.best.H == b.best.H);  // to the last bit
  CHECK(a.best.feas_residual == b.best.feas_residual);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i)
    CHECK(a.runs[i].H == b.runs[i].H);

  // runs are ordered by seed and the best is the converged minimum
  double best_h = std::numeric_limits<double>::infinity();
  for (const RunResult& r : a.runs) {
    if (r.converged) best_h = std::min(best_h, r.H);
  }
  CHECK(a.best.H == best_h);
}

TEST_CASE("per-phase monotonicity of the traced loss") {
  const CayleyTable z3 = group_table("Zn:3");
  OptConfig cfg = quick_config();
  cfg.restarts = 1;
  cfg.max_steps = 4000;
  cfg.trace_stride = 1;
  const MinimizeOutcome mo = minimize(z3, cfg);
  REQUIRE_FALSE(mo.best.trace.empty());
  int checked = 0;
  for (std::size_t i = 1; i < mo.best.trace.size(); ++i) {
    const TracePoint& prev = mo.best.trace[i - 1];
    const TracePoint& cur = mo.best.trace[i];
    if (prev.mu != cur.mu) continue;  // phase boundary resets the loss scale
    CHECK(cur.loss <= prev.loss + 1e-12 * std::max(1.0, std::abs(prev.loss)));
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("gauge moves leave a converged solution's scores untouched") {
  const CayleyTable z3 = group_table("Zn:3");
  OptConfig cfg = quick_config();
  cfg.restarts = 1;
  const RunResult best = minimize(z3, cfg).best;
  REQUIRE(best.converged);

  const FactorSet moved =
      apply_gauge(best.theta, random_unitary(3, 8), random_unitary(3, 9),
                  random_unitary(3, 10));
  CHECK(std::abs(objective_H(moved) - best.H) < 1e-8);
  CHECK(std::abs(base_term_B(moved, z3).value - best.B) < 1e-8);
  CHECK(std::abs(misalignment_R(moved, z3).value - best.R) < 1e-8);
  CHECK(std::abs(feas_residual_max(contract(moved), z3) - best.feas_residual) <
        1e-8);
}

TEST_CASE("pushing mu past a converged point barely moves H") {
  const CayleyTable z3 = group_table("Zn:3");
  OptConfig cfg = quick_config();
  cfg.restarts = 1;
  const int per = 2500;
  cfg.schedule = {{10, per}, {100, per}, {1000, per}, {10000, per}};
  cfg.max_steps = 4 * per;
  const RunResult base = minimize(z3, cfg).best;
  REQUIRE(base.converged);

  OptConfig ext = cfg;
  ext.schedule.push_back({100000, per});
  ext.max_steps = 5 * per;
  const RunResult more = minimize(z3, ext).best;
  // same seed and shared prefix: the fifth phase is a tenfold-mu
  // continuation of the converged state
  CHECK(std::abs(more.H - base.H) < cfg.feas_tol * 9.0);
  CHECK(more.feas_residual <= base.feas_residual + 1e-12);
}

TEST_CASE("tied mode recovers the group structure on Z4") {
  const CayleyTable z4 = group_table("Zn:4");
  OptConfig cfg;
  cfg.restarts = 3;
  cfg.max_steps = 20'000;
  cfg.seed = 5;
  const RunResult r = minimize_tied(z4, cfg);
  CHECK(r.converged);
  CHECK(r.feas_residual <= cfg.feas_tol);
  CHECK(r.H / 16.0 == doctest::Approx(3.0).epsilon(2e-2));

  // A = B = C^H by construction
  for (int g = 0; g < 4; ++g) {
    CHECK(max_abs(r.theta.A[g] - r.theta.B[g]) == 0.0);
    CHECK(max_abs(r.theta.C[g] - dagger(r.theta.A[g])) == 0.0);
  }

  // tying pins the identity: the character comes out like the left-regular
  // representation's, without any gauge fixing
  for (int g = 0; g < 4; ++g) {
    Complex tr = 0.0;
    for (int i = 0; i < 4; ++i) tr += r.theta.A[g](i, i);
    CHECK(std::abs(tr - Complex(g == 0 ? 4.0 : 0.0)) < 0.05 * 4);
  }

  // rho(g)^2 for the order-2 element is close to the identity
  const int g2 = z4.at(2, 2) == 0 ? 2 : 1;
  CHECK(max_abs(matmul(r.theta.A[g2], r.theta.A[g2]) - CMatrix::identity(4)) < 0.1);

  // untied reaches the same objective level
  OptConfig untied = cfg;
  const MinimizeOutcome u = minimize(z4, untied);
  CHECK(std::abs(u.best.H - r.H) < 0.05 * 16.0);
}

TEST_CASE("config validation errors") {
  const CayleyTable z3 = group_table("Zn:3");
  OptConfig cfg;
  cfg.restarts = 0;
  CHECK_THROWS_AS(minimize(z3, cfg), Error);
  cfg = OptConfig{};
  cfg.schedule = {{10, 100}, {10, 100}};
  CHECK_THROWS_AS(minimize(z3, cfg), Error);
  cfg = OptConfig{};
  cfg.feas_tol = 0.0;
  CHECK_THROWS_AS(minimize(z3, cfg), Error);
}

TEST_CASE("non-group loops converge to a strictly higher objective") {
  // tiny smoke version of the gap: the example loop lands well above 3
  const CayleyTable loop = example_loop5();
  OptConfig cfg;
  cfg.restarts = 2;
  cfg.max_steps = 30'000;
  cfg.seed = 2;
  const MinimizeOutcome mo = minimize(loop, cfg);
  CHECK(mo.best.converged);
  CHECK(mo.best.H / 25.0 > 3.3);
  CHECK(mo.best.R / 25.0 > 1e-3);
}
