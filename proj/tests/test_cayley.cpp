#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <sstream>

#include "hypercube/cayley.hpp"
#include "hypercube/errors.hpp"
#include "hypercube/rng.hpp"

using namespace hypercube;

namespace {

// The one order-5 loop used as a worked example throughout the tests; its
// violation count (46 of 125 triples) was frozen from an exhaustive check.
CayleyTable example_loop5() {
  return CayleyTable::validated(5, {0, 1, 2, 3, 4, 1, 2, 0, 4, 3, 2, 3, 4,
                                    0, 1, 3, 4, 1, 2, 0, 4, 0, 3, 1, 2});
}

// Brute-force associativity count, written independently of assoc_report.
long long count_violations_oracle(const CayleyTable& t) {
  long long v = 0;
  for (int a = 0; a < t.n(); ++a)
    for (int b = 0; b < t.n(); ++b)
      for (int c = 0; c < t.n(); ++c)
        if (t.at(t.at(a, b), c) != t.at(a, t.at(b, c))) ++v;
  return v;
}

}  // namespace

TEST_CASE("validate_latin accepts Z3 and rejects a bad column") {
  CHECK_NOTHROW(group_table("Zn:3"));
  try {
    CayleyTable::validated(2, {0, 1, 0, 1});
    FAIL("expected LatinViolation");
  } catch (const LatinViolation& e) {
    CHECK(e.axis == LatinViolation::Axis::Column);
    CHECK(e.index == 0);
  }
  CHECK_THROWS_AS(CayleyTable::validated(2, {0, 1, 1, 0, 0, 0}), Error);
  CHECK_THROWS_AS(CayleyTable::validated(2, {0, 3, 3, 0}), Error);
}

TEST_CASE("assoc_report on groups and the example loop") {
  const AlgebraReport z5 = assoc_report(group_table("Zn:5"));
  CHECK(z5.n_v == 0);
  CHECK(z5.n_v_norm == 0.0);
  CHECK(z5.identity == 0);
  CHECK(z5.is_group);

  const CayleyTable loop = example_loop5();
  const AlgebraReport rep = assoc_report(loop);
  CHECK(rep.n_v == count_violations_oracle(loop));
  CHECK(rep.n_v == 46);                 // frozen from the exhaustive oracle
  CHECK(rep.n_v_norm == doctest::Approx(1.84));
  CHECK(rep.identity == 0);
  CHECK_FALSE(rep.is_group);

  // n_v counts over n^3 triples but is normalized by n^2, so values above 1
  // are expected for heavily non-associative tables.
  CHECK(rep.n_v_norm > 1.0);
}

TEST_CASE("n_v is invariant under simultaneous relabeling") {
  // exhaustive over the 24 relabelings at order 4
  for (const char* spec : {"Zn:4", "Zn:2xZn:2"}) {
    const CayleyTable t = group_table(spec);
    const long long base = assoc_report(t).n_v;
    Perm s = identity_perm(4);
    do {
      CHECK(assoc_report(apply_isotopy(t, s, s, s)).n_v == base);
    } while (std::next_permutation(s.begin(), s.end()));
  }
  {
    // and on a non-associative square (Z4 with two rows swapped; every
    // order-4 *loop* is a group, so the fixture has no identity)
    const CayleyTable t =
        CayleyTable::validated(4, {1, 2, 3, 0, 0, 1, 2, 3, 2, 3, 0, 1, 3, 0, 1, 2});
    const long long base = assoc_report(t).n_v;
    CHECK(base > 0);
    Perm s = identity_perm(4);
    do {
      CHECK(assoc_report(apply_isotopy(t, s, s, s)).n_v == base);
    } while (std::next_permutation(s.begin(), s.end()));
  }

  // sampled at orders 5 and 6
  const CayleyTable tables[] = {example_loop5(), group_table("S3")};
  for (const CayleyTable& t : tables) {
    const long long base = assoc_report(t).n_v;
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      const Perm s = rng.permutation(t.n());
      const CayleyTable r = apply_isotopy(t, s, s, s);
      CHECK(assoc_report(r).n_v == base);
    }
  }
}

TEST_CASE("apply_isotopy identity, inverses, Latin preservation") {
  const CayleyTable t = example_loop5();
  const Perm id = identity_perm(5);
  CHECK(apply_isotopy(t, id, id, id).same_cells(t));

  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Perm phi = rng.permutation(5), psi = rng.permutation(5),
               chi = rng.permutation(5);
    const CayleyTable u = apply_isotopy(t, phi, psi, chi);
    const CayleyTable back =
        apply_isotopy(u, inverse_perm(phi), inverse_perm(psi), inverse_perm(chi));
    CHECK(back.same_cells(t));
  }

  CHECK_THROWS_AS(apply_isotopy(t, identity_perm(4), id, id), DimensionMismatch);
}

TEST_CASE("isotopies compose left-to-right") {
  const CayleyTable t = example_loop5();
  Rng rng(17);
  const Perm p1 = rng.permutation(5), q1 = rng.permutation(5), r1 = rng.permutation(5);
  const Perm p2 = rng.permutation(5), q2 = rng.permutation(5), r2 = rng.permutation(5);
  const CayleyTable seq = apply_isotopy(apply_isotopy(t, p1, q1, r1), p2, q2, r2);
  const CayleyTable once = apply_isotopy(t, compose_perm(p2, p1),
                                         compose_perm(q2, q1), compose_perm(r2, r1));
  CHECK(seq.same_cells(once));
}

TEST_CASE("to_loop_isotope produces an identity at 0 and round-trips") {
  // already a loop -> identity isotopy
  const CayleyTable z5 = group_table("Zn:5");
  const LoopIsotope li0 = to_loop_isotope(z5);
  CHECK(li0.loop.same_cells(z5));
  CHECK(li0.phi == identity_perm(5));

  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const CayleyTable scrambled = apply_isotopy(
        example_loop5(), rng.permutation(5), rng.permutation(5), rng.permutation(5));
    const LoopIsotope li = to_loop_isotope(scrambled);
    CHECK(li.loop.has_identity_at_zero());
    CHECK(apply_isotopy(scrambled, li.phi, li.psi, li.chi).same_cells(li.loop));
  }
}

TEST_CASE("loop isotopes of scrambled group tables are groups") {
  Rng rng(29);
  for (const char* spec : {"Zn:2", "Zn:3", "Zn:4", "Zn:2xZn:2", "Zn:5", "Zn:6",
                           "S3", "Zn:7", "Zn:8", "Zn:2xZn:4", "Z2^3", "D4", "Q8"}) {
    const CayleyTable g = group_table(spec);
    const CayleyTable scrambled =
        apply_isotopy(g, rng.permutation(g.n()), rng.permutation(g.n()),
                      rng.permutation(g.n()));
    CHECK(assoc_report(to_loop_isotope(scrambled).loop).is_group);
  }
}

TEST_CASE("canonical_loop_form collapses relabelings and separates Z4 from Z2^2") {
  const CanonicalLoop z4 = canonical_loop_form(group_table("Zn:4"));
  const CanonicalLoop k4 = canonical_loop_form(group_table("Zn:2xZn:2"));
  CHECK(z4.hash != k4.hash);
  CHECK_FALSE(z4.table.same_cells(k4.table));

  // all relabelings of Z5 fixing 0 agree
  const CayleyTable z5 = group_table("Zn:5");
  const CanonicalLoop base = canonical_loop_form(z5);
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Perm s = rng.permutation(4);
    Perm full(5);
    full[0] = 0;
    for (int i = 0; i < 4; ++i) full[i + 1] = s[i] + 1;
    const CanonicalLoop c = canonical_loop_form(apply_isotopy(z5, full, full, full));
    CHECK(c.hash == base.hash);
    CHECK(c.table.same_cells(base.table));
  }

  // idempotence
  const CanonicalLoop again = canonical_loop_form(base.table);
  CHECK(again.table.same_cells(base.table));
  CHECK(again.hash == base.hash);

  // non-loops are refused
  const CayleyTable notloop = CayleyTable::validated(3, {1, 0, 2, 0, 2, 1, 2, 1, 0});
  CHECK_THROWS_AS(canonical_loop_form(notloop), NotALoop);
}

TEST_CASE("group_table fixtures") {
  const CayleyTable z2 = group_table("Zn:2");
  CHECK(z2.cells() == std::vector<int>{0, 1, 1, 0});

  const CayleyTable z5 = group_table("Zn:5");
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) CHECK(z5.at(a, b) == (a + b) % 5);

  for (const char* spec : {"S3", "D4", "Q8", "Zn:2xZn:4", "Z2^3", "Zn:8"}) {
    const AlgebraReport rep = assoc_report(group_table(spec));
    CHECK_MESSAGE(rep.is_group, spec);
    CHECK(rep.identity == 0);
  }
  CHECK(group_table("S3").n() == 6);
  CHECK(group_table("D4").n() == 8);
  CHECK(group_table("Q8").n() == 8);
  CHECK(group_table("Zn:2xZn:4").n() == 8);

  // Q8 is non-abelian with a unique element of order 2
  const CayleyTable q8 = group_table("Q8");
  int order2 = 0;
  for (int g = 1; g < 8; ++g)
    if (q8.at(g, g) == 0) ++order2;
  CHECK(order2 == 1);

  CHECK_THROWS_AS(group_table("F4"), Error);
  CHECK_THROWS_AS(group_table(""), Error);
}

TEST_CASE("text format round-trip") {
  const CayleyTable t = example_loop5();
  std::stringstream ss;
  write_table(ss, t);
  const CayleyTable back = read_table(ss);
  CHECK(back.same_cells(t));

  std::stringstream multi;
  write_tables(multi, {t, group_table("Zn:3")});
  const auto list = read_tables(multi);
  REQUIRE(list.size() == 2);
  CHECK(list[0].same_cells(t));
  CHECK(list[1].same_cells(group_table("Zn:3")));

  std::stringstream bad("3\n0 1 2\n1 2");
  CHECK_THROWS_AS(read_table(bad), ParseError);
}
