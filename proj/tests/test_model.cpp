#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hypercube/enumeration.hpp"
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

/// Collinear but rank-deficient: diagonal slices carrying the first d
/// frequencies of the cyclic group of order n, zero elsewhere.
FactorSet truncated_fourier_factors(int n, int d) {
  const double tau = 2.0 * M_PI / n;
  FactorSet f = FactorSet::zeros(n);
  for (int g = 0; g < n; ++g) {
    for (int k = 0; k < d; ++k) {
      const Complex w = std::polar(1.0, tau * g * k);
      f.A[g](k, k) = w;
      f.B[g](k, k) = w;
      f.C[g](k, k) = std::conj(w);
    }
  }
  return f;
}

}  // namespace

TEST_CASE("contract on regular representations") {
  // Z2: 1∘1 = 0, so T_110 = 1 and T_111 = 0
  const FactorSet z2 = regular_rep_factors(group_table("Zn:2"));
  const Tensor3 t2 = contract(z2);
  CHECK(t2.at(1, 1, 0) == Complex(1.0));
  CHECK(t2.at(1, 1, 1) == Complex(0.0));

  // zero A slices wipe the tensor
  FactorSet z = init_random(3, 5, 1.0);
  for (auto& m : z.A) m = CMatrix(3);
  const Tensor3 tz = contract(z);
  for (const Complex& v : tz.values()) CHECK(v == Complex(0.0));

  // Z3: the contraction reproduces the structure tensor exactly
  const CayleyTable z3 = group_table("Zn:3");
  const Tensor3 t3 = contract(regular_rep_factors(z3));
  CHECK(feas_residual_max(t3, z3) == 0.0);
}

TEST_CASE("contract is trilinear in each slice") {
  const CayleyTable z3 = group_table("Zn:3");
  FactorSet f = init_random(3, 8, 0.7);
  const Tensor3 base = contract(f);
  FactorSet g = f;
  const Complex s(0.5, -2.0);
  for (int i = 0; i < 3; ++i) g.B[1](i, 0) *= 1.0;  // keep g = f
  g.A[2] = s * f.A[2];
  const Tensor3 scaled = contract(g);
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(scaled.at(2, b, c) - s * base.at(2, b, c)) < 1e-12);
      CHECK(std::abs(scaled.at(0, b, c) - base.at(0, b, c)) < 1e-15);
    }
  (void)z3;
}

TEST_CASE("objective_H values and homogeneity") {
  CHECK(objective_H(regular_rep_factors(group_table("Zn:2"))) ==
        doctest::Approx(12.0).epsilon(1e-12));  // 3 n^2 at n = 2
  CHECK(objective_H(FactorSet::zeros(4)) == 0.0);

  // scaling the A stack by s scales the 2n^2 A-containing terms by |s|^2
  FactorSet f = init_random(3, 21, 0.9);
  const double h = objective_H(f);
  double bc_only = 0.0;
  {
    FactorSet g = f;
    for (auto& m : g.A) m = CMatrix(3);
    bc_only = objective_H(g);
  }
  const double s = 1.7;
  FactorSet g = f;
  for (auto& m : g.A) m *= s;
  CHECK(objective_H(g) ==
        doctest::Approx(bc_only + s * s * (h - bc_only)).epsilon(1e-10));
}

TEST_CASE("supported-sum reformulation agrees on Latin tables") {
  const CayleyTable z5 = group_table("Zn:5");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FactorSet f = init_random(5, seed, 0.8);
    CHECK(objective_H_supported(f, z5) ==
          doctest::Approx(objective_H(f)).epsilon(1e-10));
  }
  const CayleyTable loop = example_loop5();
  const FactorSet f = init_random(5, 17, 1.1);
  CHECK(objective_H_supported(f, loop) ==
        doctest::Approx(objective_H(f)).epsilon(1e-10));

  // unitary slices on any Latin table give 3 n^2
  FactorSet u = FactorSet::zeros(5);
  for (int i = 0; i < 5; ++i) {
    u.A[i] = random_unitary(5, 100 + i);
    u.B[i] = random_unitary(5, 200 + i);
    u.C[i] = random_unitary(5, 300 + i);
  }
  CHECK(objective_H_supported(u, loop) == doctest::Approx(75.0).epsilon(1e-12));

  // n = 1 degenerate order
  const CayleyTable one = CayleyTable::validated(1, {0});
  const FactorSet f1 = init_random(1, 3, 1.0);
  CHECK(objective_H_supported(f1, one) ==
        doctest::Approx(objective_H(f1)).epsilon(1e-12));
}

TEST_CASE("base term: certificate value, bound, and zero case") {
  const CayleyTable z5 = group_table("Zn:5");
  CHECK(base_term_B(regular_rep_factors(z5), z5).value ==
        doctest::Approx(75.0).epsilon(1e-12));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FactorSet f = init_random(5, seed, 1.0);
    CHECK(base_term_B(f, z5).value <= objective_H(f) + 1e-9);
  }

  // strictly-upper-triangular A against diagonal B, C: T vanishes on every
  // triple, so B = 0 while the slices stay non-degenerate
  FactorSet f = FactorSet::zeros(2);
  for (int i = 0; i < 2; ++i) {
    f.A[i](0, 1) = 1.0 + i;
    f.B[i](0, 0) = 1.0;
    f.B[i](1, 1) = 2.0 + i;
    f.C[i](0, 0) = 3.0 - i;
    f.C[i](1, 1) = 1.0;
  }
  const CayleyTable z2 = group_table("Zn:2");
  CHECK(base_term_B(f, z2).value == 0.0);

  FactorSet g = init_random(2, 3, 1.0);
  g.B[1] = CMatrix(2);  // zero slice appears in supported triples
  CHECK_THROWS_AS(base_term_B(g, z2), DegenerateSlice);
}

TEST_CASE("misalignment: exact zero on regular representations") {
  for (const char* spec : {"Zn:2", "Zn:3", "Zn:4", "Zn:2xZn:2", "Zn:5", "Zn:6",
                           "S3", "Zn:7", "Zn:8", "Zn:2xZn:4", "Z2^3", "D4", "Q8"}) {
    const CayleyTable g = group_table(spec);
    const MisalignmentResult r = misalignment_R(regular_rep_factors(g), g);
    CHECK_MESSAGE(r.value < 1e-18, spec);
  }
}

TEST_CASE("decomposition identity H = B + R and per-triple orthogonality") {
  Rng seeds(2024);
  const CayleyTable tables[] = {group_table("Zn:5"), example_loop5(),
                                group_table("Zn:3")};
  for (int trial = 0; trial < 30; ++trial) {
    const CayleyTable& t = tables[trial % 3];
    const FactorSet f = init_random(t.n(), seeds.next_u64(), 0.9);
    const double h = objective_H(f);
    const BaseTermResult b = base_term_B(f, t);
    const MisalignmentResult r = misalignment_R(f, t);
    CHECK(r.value >= 0.0);
    CHECK(std::abs(h - b.value - r.value) <= 1e-9 * std::max(1.0, h));

    for (std::size_t i = 0; i < r.triples.size(); ++i) {
      const auto [a, bb, c] = r.triples[i];
      CHECK(std::abs(frob_inner(f.A[a], r.deltas[i][0])) < 1e-10);
      CHECK(std::abs(frob_inner(f.B[bb], r.deltas[i][1])) < 1e-10);
      CHECK(std::abs(frob_inner(f.C[c], r.deltas[i][2])) < 1e-10);
    }
  }
}

TEST_CASE("kappa: ones on the certificate, rank ratio when truncated") {
  const CayleyTable z5 = group_table("Zn:5");
  const KappaResult k = kappa_values(regular_rep_factors(z5), z5);
  for (double v : k.kappa) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  const CayleyTable z4 = group_table("Zn:4");
  const FactorSet trunc = truncated_fourier_factors(4, 2);
  CHECK(misalignment_R(trunc, z4).value < 1e-20);  // still perfectly collinear
  const KappaResult kt = kappa_values(trunc, z4);
  for (double v : kt.kappa) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
  const GramTriple gt = gram_triple(trunc, z4);
  CHECK(numerical_rank(gt.X, 1e-8) == 2);  // kappa = rank(X) / n

  // rescale invariance: doubling every C slice leaves kappa untouched
  FactorSet f = init_random(4, 9, 1.0);
  const KappaResult before = kappa_values(f, z4);
  for (auto& m : f.C) m *= 2.0;
  const KappaResult after = kappa_values(f, z4);
  for (std::size_t i = 0; i < before.kappa.size(); ++i)
    CHECK(after.kappa[i] == doctest::Approx(before.kappa[i]).epsilon(1e-10));

  // a vanishing T on a supported triple is refused
  FactorSet upper = FactorSet::zeros(2);
  for (int i = 0; i < 2; ++i) {
    upper.A[i](0, 1) = 1.0;
    upper.B[i] = CMatrix::identity(2);
    upper.C[i] = CMatrix::identity(2);
  }
  CHECK_THROWS_AS(kappa_values(upper, group_table("Zn:2")), DegenerateTriple);
}

TEST_CASE("gram triple: identity on the certificate, projection when truncated") {
  const CayleyTable z6 = group_table("Zn:6");
  const GramTriple g = gram_triple(regular_rep_factors(z6), z6);
  CHECK(max_abs(g.X - CMatrix::identity(6)) < 1e-10);
  CHECK(max_abs(g.Y - CMatrix::identity(6)) < 1e-10);
  CHECK(max_abs(g.Z - CMatrix::identity(6)) < 1e-10);
  CHECK(g.spread < 1e-10);

  const FactorSet rnd = init_random(4, 77, 1.0);
  CHECK(gram_triple(rnd, group_table("Zn:4")).spread > 1e-3);

  // kappa X is an orthogonal projection for the truncated construction
  const CayleyTable z4 = group_table("Zn:4");
  const GramTriple gt = gram_triple(truncated_fourier_factors(4, 2), z4);
  const CMatrix p = 0.5 * gt.X;
  CHECK(max_abs(matmul(p, p) - p) < 1e-8);
}

TEST_CASE("regular_rep_factors: slices, values, and refusal") {
  const FactorSet z2 = regular_rep_factors(group_table("Zn:2"));
  CHECK(z2.A[0] == CMatrix::identity(2));
  CMatrix swap(2);
  swap(0, 1) = 1.0;
  swap(1, 0) = 1.0;
  CHECK(z2.A[1] == swap);
  CHECK(objective_H(z2) == doctest::Approx(12.0));

  const CayleyTable s3 = group_table("S3");
  CHECK(feas_residual_max(contract(regular_rep_factors(s3)), s3) == 0.0);

  CHECK_THROWS_AS(regular_rep_factors(example_loop5()), NotAGroup);
}

TEST_CASE("gauge invariance of T and H") {
  const CayleyTable z4 = group_table("Zn:4");
  const FactorSet f = init_random(4, 31, 0.8);
  CHECK(max_abs(apply_gauge(f, CMatrix::identity(4), CMatrix::identity(4),
                            CMatrix::identity(4)).A[2] - f.A[2]) == 0.0);

  const double h = objective_H(f);
  const Tensor3 t0 = contract(f);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const FactorSet g = apply_gauge(f, random_unitary(4, s), random_unitary(4, 50 + s),
                                    random_unitary(4, 90 + s));
    CHECK(std::abs(objective_H(g) - h) < 1e-9);
    const Tensor3 t1 = contract(g);
    double drift = 0.0;
    for (std::size_t i = 0; i < t0.values().size(); ++i)
      drift = std::max(drift, std::abs(t1.values()[i] - t0.values()[i]));
    CHECK(drift < 1e-10);
  }

  CMatrix not_unitary = CMatrix::identity(4);
  not_unitary(0, 0) = 2.0;
  CHECK_THROWS_AS(apply_gauge(f, not_unitary, CMatrix::identity(4),
                              CMatrix::identity(4)),
                  NonUnitaryGauge);
}

TEST_CASE("permutation equivariance of the contraction") {
  const CayleyTable z4 = group_table("Zn:4");
  const FactorSet f = regular_rep_factors(z4);
  Rng rng(5);
  const Perm phi = rng.permutation(4), psi = rng.permutation(4), chi = rng.permutation(4);
  const FactorSet g = permute_factors(f, phi, psi, chi);

  const Tensor3 tf = contract(f), tg = contract(g);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        CHECK(tg.at(a, b, c) == tf.at(phi[a], psi[b], chi[c]));

  // the permuted factors factorize the isotopic table exactly
  const CayleyTable iso = apply_isotopy(z4, inverse_perm(phi), inverse_perm(psi),
                                        inverse_perm(chi));
  CHECK(feas_residual_max(tg, iso) == 0.0);

  // H is a full pairwise sum, so reordering slices cannot change it
  CHECK(objective_H(g) == doctest::Approx(objective_H(f)).epsilon(1e-12));

  const FactorSet idp = permute_factors(f, identity_perm(4), identity_perm(4),
                                        identity_perm(4));
  CHECK(max_abs(idp.B[1] - f.B[1]) == 0.0);
}

TEST_CASE("synchronize: exact on the certificate, tight after gauging") {
  const CayleyTable z5 = group_table("Zn:5");
  const FactorSet reg = regular_rep_factors(z5);
  const RepMap direct = synchronize(reg, z5);
  for (int g = 0; g < 5; ++g) CHECK(direct.rho[g] == reg.A[g]);

  const FactorSet gauged = apply_gauge(reg, random_unitary(5, 1), random_unitary(5, 2),
                                       random_unitary(5, 3));
  const RepMap rm = synchronize(gauged, z5);
  double hom = 0.0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const int c = z5.at(a, b);
      hom = std::max(hom, std::sqrt(norm_sq(matmul(rm.rho[a], rm.rho[b]) - rm.rho[c])));
    }
  CHECK(hom < 1e-8);

  for (int g = 0; g < 5; ++g) {
    Complex tr = 0.0;
    for (int i = 0; i < 5; ++i) tr += rm.rho[g](i, i);
    CHECK(std::abs(tr - Complex(g == 0 ? 5.0 : 0.0)) < 1e-8);
  }

  CHECK_THROWS_AS(synchronize(init_random(5, 4, 1.0), z5), NotSynchronizable);

  const CayleyTable notloop =
      CayleyTable::validated(3, {1, 0, 2, 0, 2, 1, 2, 1, 0});
  CHECK_THROWS_AS(synchronize(regular_rep_factors(group_table("Zn:3")), notloop),
                  NotALoop);
}

TEST_CASE("AM-GM bound with per-triple kappa") {
  const CayleyTable z4 = group_table("Zn:4");
  auto bound_rhs = [&](const FactorSet& f) {
    const KappaResult k = kappa_values(f, z4);
    const Tensor3 T = contract(f);
    double rhs = 0.0;
    for (std::size_t i = 0; i < k.triples.size(); ++i) {
      const auto [a, b, c] = k.triples[i];
      rhs += 3.0 * std::pow(std::norm(T.at(a, b, c)), 2.0 / 3.0) *
             std::pow(k.kappa[i], -1.0 / 3.0);
    }
    return rhs;
  };

  // equal norms: equality within roundoff
  const FactorSet reg = regular_rep_factors(z4);
  CHECK(std::abs(base_term_B(reg, z4).value - bound_rhs(reg)) < 1e-8);

  // perturbed slice norms on a still-collinear set: the gap must open
  FactorSet scaled = reg;
  const double sa[4] = {1.0, 1.4, 0.7, 1.2};
  const double sb[4] = {0.9, 1.1, 1.3, 0.8};
  for (int i = 0; i < 4; ++i) {
    scaled.A[i] *= sa[i];
    scaled.B[i] *= sb[i];
  }
  CHECK(misalignment_R(scaled, z4).value < 1e-18);
  const double gap = base_term_B(scaled, z4).value - bound_rhs(scaled);
  CHECK(gap > 1e-3);

  // the bound stays valid on random parameters
  for (std::uint64_t s = 0; s < 10; ++s) {
    const FactorSet f = init_random(4, 400 + s, 1.0);
    CHECK(base_term_B(f, z4).value >= bound_rhs(f) - 1e-9);
  }
}

TEST_CASE("decompose aggregates consistently") {
  const CayleyTable t = example_loop5();
  const FactorSet f = init_random(5, 55, 1.0);
  const DecompositionReport rep = decompose(f, t);
  CHECK(rep.flags.empty());
  CHECK(std::abs(rep.H - rep.B - rep.R) <= 1e-9 * std::max(1.0, rep.H));
  CHECK(rep.per_triple.size() == 25);
  REQUIRE(rep.gram.has_value());
  for (const TripleReport& tr : rep.per_triple) {
    CHECK(tr.kappa.has_value());
    CHECK(tr.slice_norms[0] > 0.0);
  }

  // degenerate slice: flagged, not thrown
  FactorSet g = f;
  g.A[3] = CMatrix(5);
  const DecompositionReport bad = decompose(g, t);
  CHECK_FALSE(bad.flags.empty());
  CHECK(bad.flags.front() == "degenerate_slice");
}

TEST_CASE("mode-1 unfolding of the structure tensor has full rank") {
  for (int order = 2; order <= 5; ++order) {
    ReducedLatinEnumerator en(order);
    int checked = 0;
    while (auto t = en.next()) {
      CHECK(mode1_unfolding_rank(delta_tensor(*t), 1e-8) == order);
      if (++checked >= 20) break;  // sample; the acceptance suite is exhaustive
    }
  }
}
