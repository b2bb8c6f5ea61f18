#include "hypercube/model.hpp"

#include <cmath>

#include "hypercube/errors.hpp"

namespace hypercube {

FactorSet FactorSet::zeros(int n) {
  FactorSet f;
  f.n = n;
  f.A.assign(n, CMatrix(n));
  f.B.assign(n, CMatrix(n));
  f.C.assign(n, CMatrix(n));
  return f;
}

bool FactorSet::is_finite() const {
  for (const auto* stack : {&A, &B, &C})
    for (const CMatrix& m : *stack)
      if (!m.is_finite()) return false;
  return true;
}

void check_factorset(const FactorSet& f) {
  if (f.n < 1) throw DimensionMismatch("factor set: order must be positive");
  if (static_cast<int>(f.A.size()) != f.n ||
      static_cast<int>(f.B.size()) != f.n ||
      static_cast<int>(f.C.size()) != f.n)
    throw DimensionMismatch("factor set: expected n slices per stack");
  for (const auto* stack : {&f.A, &f.B, &f.C})
    for (const CMatrix& m : *stack) {
      if (m.n() != f.n) throw DimensionMismatch("factor set: slice shape");
      if (!m.is_finite()) throw Error("factor set: non-finite entry");
    }
}

namespace {

void require_match(const FactorSet& f, const CayleyTable& t) {
  check_factorset(f);
  if (f.n != t.n())
    throw DimensionMismatch("factor set and table orders differ");
}

Complex trace_dot(const CMatrix& x, const CMatrix& p) {
  // tr(x * p) without forming the product.
  const int n = x.n();
  Complex acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) acc += x(i, j) * p(j, i);
  return acc;
}

}  // namespace

Tensor3 delta_tensor(const CayleyTable& t) {
  Tensor3 d(t.n());
  for (int a = 0; a < t.n(); ++a)
    for (int b = 0; b < t.n(); ++b) d.at(a, b, t.at(a, b)) = 1.0;
  return d;
}

Tensor3 contract(const FactorSet& f) {
  check_factorset(f);
  const int n = f.n;
  Tensor3 T(n);
  CMatrix p(n);
  for (int b = 0; b < n; ++b)
    for (int c = 0; c < n; ++c) {
      matmul_into(p.data(), f.B[b].data(), f.C[c].data(), n);
      for (int a = 0; a < n; ++a)
        T.at(a, b, c) = trace_dot(f.A[a], p) / static_cast<double>(n);
    }
  return T;
}

double feas_residual_max(const Tensor3& T, const CayleyTable& t) {
  if (T.n() != t.n()) throw DimensionMismatch("tensor and table orders differ");
  const int n = t.n();
  double m = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int c_sup = t.at(a, b);
      for (int c = 0; c < n; ++c) {
        const double d = std::abs(T.at(a, b, c) - Complex(c == c_sup ? 1.0 : 0.0));
        m = std::max(m, d);
      }
    }
  return m;
}

double objective_H(const FactorSet& f) {
  check_factorset(f);
  const int n = f.n;
  CMatrix p(n);
  double h = 0.0;
  auto add_pairs = [&](const std::vector<CMatrix>& xs, const std::vector<CMatrix>& ys) {
    for (const CMatrix& x : xs)
      for (const CMatrix& y : ys) {
        matmul_into(p.data(), x.data(), y.data(), n);
        h += norm_sq(p);
      }
  };
  add_pairs(f.B, f.C);
  add_pairs(f.C, f.A);
  add_pairs(f.A, f.B);
  return h;
}

double objective_H_supported(const FactorSet& f, const CayleyTable& t) {
  require_match(f, t);
  const int n = f.n;
  CMatrix p(n);
  double h = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int c = t.at(a, b);
      matmul_into(p.data(), f.B[b].data(), f.C[c].data(), n);
      h += norm_sq(p);
      matmul_into(p.data(), f.C[c].data(), f.A[a].data(), n);
      h += norm_sq(p);
      matmul_into(p.data(), f.A[a].data(), f.B[b].data(), n);
      h += norm_sq(p);
    }
  return h;
}

namespace {

struct SliceNorms {
  std::vector<double> a, b, c;
};

SliceNorms slice_norms(const FactorSet& f) {
  SliceNorms s;
  for (const CMatrix& m : f.A) s.a.push_back(norm_sq(m));
  for (const CMatrix& m : f.B) s.b.push_back(norm_sq(m));
  for (const CMatrix& m : f.C) s.c.push_back(norm_sq(m));
  return s;
}

void require_nondegenerate(const SliceNorms& s) {
  for (std::size_t i = 0; i < s.a.size(); ++i)
    if (s.a[i] <= kDegenerateFloor) throw DegenerateSlice('A', static_cast<int>(i));
  for (std::size_t i = 0; i < s.b.size(); ++i)
    if (s.b[i] <= kDegenerateFloor) throw DegenerateSlice('B', static_cast<int>(i));
  for (std::size_t i = 0; i < s.c.size(); ++i)
    if (s.c[i] <= kDegenerateFloor) throw DegenerateSlice('C', static_cast<int>(i));
}

}  // namespace

BaseTermResult base_term_B(const FactorSet& f, const CayleyTable& t) {
  require_match(f, t);
  const int n = f.n;
  const SliceNorms s = slice_norms(f);
  require_nondegenerate(s);
  const Tensor3 T = contract(f);
  BaseTermResult out;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int c = t.at(a, b);
      const double t2 = std::norm(T.at(a, b, c));
      const double v = t2 * (1.0 / s.a[a] + 1.0 / s.b[b] + 1.0 / s.c[c]);
      out.triples.push_back({a, b, c});
      out.per_triple.push_back(v);
      out.value += v;
    }
  return out;
}

MisalignmentResult misalignment_R(const FactorSet& f, const CayleyTable& t) {
  require_match(f, t);
  const int n = f.n;
  const SliceNorms s = slice_norms(f);
  require_nondegenerate(s);
  const Tensor3 T = contract(f);
  MisalignmentResult out;
  CMatrix prod(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int c = t.at(a, b);
      const Complex tc = std::conj(T.at(a, b, c));
      std::array<CMatrix, 3> d;

      matmul_into(prod.data(), f.B[b].data(), f.C[c].data(), n);
      d[0] = (tc / s.a[a]) * f.A[a] - dagger(prod);
      matmul_into(prod.data(), f.C[c].data(), f.A[a].data(), n);
      d[1] = (tc / s.b[b]) * f.B[b] - dagger(prod);
      matmul_into(prod.data(), f.A[a].data(), f.B[b].data(), n);
      d[2] = (tc / s.c[c]) * f.C[c] - dagger(prod);

      const std::array<double, 3> dn = {norm_sq(d[0]), norm_sq(d[1]), norm_sq(d[2])};
      out.value += dn[0] + dn[1] + dn[2];
      out.triples.push_back({a, b, c});
      out.delta_norms.push_back(dn);
      out.deltas.push_back(std::move(d));
    }
  return out;
}

KappaResult kappa_values(const FactorSet& f, const CayleyTable& t) {
  require_match(f, t);
  const int n = f.n;
  const SliceNorms s = slice_norms(f);
  require_nondegenerate(s);
  const Tensor3 T = contract(f);
  KappaResult out;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int c = t.at(a, b);
      const double t2 = std::norm(T.at(a, b, c));
      if (t2 <= kDegenerateFloor * kDegenerateFloor) throw DegenerateTriple(a, b, c);
      out.triples.push_back({a, b, c});
      out.kappa.push_back(s.a[a] * s.b[b] * s.c[c] / t2);
    }
  return out;
}

GramTriple gram_triple(const FactorSet& f, const CayleyTable& t) {
  require_match(f, t);
  const int n = f.n;
  const SliceNorms s = slice_norms(f);
  require_nondegenerate(s);

  // Per supported triple each Gram has two realizations:
  //   X: A_a A_a^H/||A_a||^2 and C_c^H C_c/||C_c||^2
  //   Y: B_b B_b^H/||B_b||^2 and A_a^H A_a/||A_a||^2
  //   Z: C_c C_c^H/||C_c||^2 and B_b^H B_b/||B_b||^2
  GramTriple g{CMatrix(n), CMatrix(n), CMatrix(n), 0.0};
  std::vector<std::array<CMatrix, 3>> realizations;
  CMatrix p(n);
  auto left_gram = [&](const CMatrix& m, double nsq) {
    matmul_into(p.data(), m.data(), dagger(m).data(), n);
    return (1.0 / nsq) * p;
  };
  auto right_gram = [&](const CMatrix& m, double nsq) {
    matmul_into(p.data(), dagger(m).data(), m.data(), n);
    return (1.0 / nsq) * p;
  };

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int c = t.at(a, b);
      std::array<CMatrix, 3> first = {left_gram(f.A[a], s.a[a]),
                                      left_gram(f.B[b], s.b[b]),
                                      left_gram(f.C[c], s.c[c])};
      std::array<CMatrix, 3> second = {right_gram(f.C[c], s.c[c]),
                                       right_gram(f.A[a], s.a[a]),
                                       right_gram(f.B[b], s.b[b])};
      g.X += first[0];
      g.X += second[0];
      g.Y += first[1];
      g.Y += second[1];
      g.Z += first[2];
      g.Z += second[2];
      realizations.push_back(std::move(first));
      realizations.push_back(std::move(second));
    }

  const double scale = 1.0 / (2.0 * n * n);
  g.X *= scale;
  g.Y *= scale;
  g.Z *= scale;
  for (const auto& r : realizations) {
    g.spread = std::max(g.spread, max_abs(r[0] - g.X));
    g.spread = std::max(g.spread, max_abs(r[1] - g.Y));
    g.spread = std::max(g.spread, max_abs(r[2] - g.Z));
  }
  return g;
}

DecompositionReport decompose(const FactorSet& f, const CayleyTable& t,
                              bool with_gram) {
  require_match(f, t);
  const int n = f.n;
  const SliceNorms s = slice_norms(f);
  const Tensor3 T = contract(f);
  DecompositionReport rep;
  rep.H = objective_H_supported(f, t);

  CMatrix prod(n);
  bool any_degenerate_slice = false;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int c = t.at(a, b);
      TripleReport tr;
      tr.triple = {a, b, c};
      tr.T = T.at(a, b, c);
      tr.slice_norms = {s.a[a], s.b[b], s.c[c]};
      const bool degenerate_slice = s.a[a] <= kDegenerateFloor ||
                                    s.b[b] <= kDegenerateFloor ||
                                    s.c[c] <= kDegenerateFloor;
      if (degenerate_slice) {
        tr.degenerate = true;
        tr.delta_norms = {0.0, 0.0, 0.0};
        any_degenerate_slice = true;
        rep.per_triple.push_back(tr);
        continue;
      }
      const Complex tc = std::conj(tr.T);
      matmul_into(prod.data(), f.B[b].data(), f.C[c].data(), n);
      const double d0 = norm_sq((tc / s.a[a]) * f.A[a] - dagger(prod));
      matmul_into(prod.data(), f.C[c].data(), f.A[a].data(), n);
      const double d1 = norm_sq((tc / s.b[b]) * f.B[b] - dagger(prod));
      matmul_into(prod.data(), f.A[a].data(), f.B[b].data(), n);
      const double d2 = norm_sq((tc / s.c[c]) * f.C[c] - dagger(prod));
      tr.delta_norms = {d0, d1, d2};

      const double t2 = std::norm(tr.T);
      rep.B += t2 * (1.0 / s.a[a] + 1.0 / s.b[b] + 1.0 / s.c[c]);
      rep.R += d0 + d1 + d2;
      if (t2 > kDegenerateFloor * kDegenerateFloor) {
        tr.kappa = s.a[a] * s.b[b] * s.c[c] / t2;
      } else {
        rep.flags.push_back("degenerate_triple:" + std::to_string(a) + "," +
                            std::to_string(b) + "," + std::to_string(c));
      }
      rep.per_triple.push_back(tr);
    }
  if (any_degenerate_slice) rep.flags.insert(rep.flags.begin(), "degenerate_slice");

  if (with_gram && !any_degenerate_slice) rep.gram = gram_triple(f, t);
  return rep;
}

FactorSet regular_rep_factors(const CayleyTable& g) {
  const AlgebraReport rep = assoc_report(g);
  if (!rep.is_group) throw NotAGroup();
  const int n = g.n();
  FactorSet f = FactorSet::zeros(n);
  for (int x = 0; x < n; ++x) {
    CMatrix rho(n);
    for (int h = 0; h < n; ++h) rho(g.at(x, h), h) = 1.0;  // rho(x) e_h = e_{x∘h}
    f.A[x] = rho;
    f.B[x] = rho;
    f.C[x] = dagger(rho);
  }
  return f;
}

FactorSet apply_gauge(const FactorSet& f, const CMatrix& u, const CMatrix& v,
                      const CMatrix& w) {
  check_factorset(f);
  if (u.n() != f.n || v.n() != f.n || w.n() != f.n)
    throw DimensionMismatch("gauge matrices must match the factor order");
  const double tol = 1e-8;
  if (unitarity_defect(u) > tol || unitarity_defect(v) > tol ||
      unitarity_defect(w) > tol)
    throw NonUnitaryGauge();

  const CMatrix ud = dagger(u), vd = dagger(v), wd = dagger(w);
  FactorSet out = FactorSet::zeros(f.n);
  for (int i = 0; i < f.n; ++i) {
    out.A[i] = matmul(u, matmul(f.A[i], vd));
    out.B[i] = matmul(v, matmul(f.B[i], wd));
    out.C[i] = matmul(w, matmul(f.C[i], ud));
  }
  return out;
}

FactorSet permute_factors(const FactorSet& f, const Perm& phi, const Perm& psi,
                          const Perm& chi) {
  check_factorset(f);
  if (static_cast<int>(phi.size()) != f.n ||
      static_cast<int>(psi.size()) != f.n || static_cast<int>(chi.size()) != f.n)
    throw DimensionMismatch("permute_factors: permutation size mismatch");
  if (!is_permutation(phi) || !is_permutation(psi) || !is_permutation(chi))
    throw Error("permute_factors: arguments are not permutations");
  FactorSet out = FactorSet::zeros(f.n);
  for (int i = 0; i < f.n; ++i) {
    out.A[i] = f.A[phi[i]];
    out.B[i] = f.B[psi[i]];
    out.C[i] = f.C[chi[i]];
  }
  return out;
}

RepMap synchronize(const FactorSet& f, const CayleyTable& loop,
                   const SyncOptions& opts) {
  require_match(f, loop);
  if (!loop.has_identity_at_zero()) throw NotALoop();
  const int n = f.n;
  const double tol = opts.tolerance;

  double udist = 0.0;
  for (const auto* stack : {&f.A, &f.B, &f.C})
    for (const CMatrix& m : *stack) udist = std::max(udist, unitarity_defect(m));
  if (udist > tol)
    throw NotSynchronizable("unitarity distance " + std::to_string(udist) +
                            " exceeds tolerance");

  const double r = misalignment_R(f, loop).value / (static_cast<double>(n) * n);
  if (r > tol)
    throw NotSynchronizable("collinearity residual " + std::to_string(r) +
                            " exceeds tolerance");

  const CMatrix u = dagger(f.A[0]);
  const CMatrix v = CMatrix::identity(n);
  const CMatrix w = f.B[0];

  RepMap out;
  out.n = n;
  out.source_gauge = {u, v, w};
  const CMatrix be_d = dagger(f.B[0]);
  const CMatrix ae = f.A[0];
  for (int g = 0; g < n; ++g) {
    CMatrix ag = matmul(u, f.A[g]);                       // A'_g = A_e^H A_g
    const CMatrix bg = matmul(f.B[g], be_d);              // B'_g = B_g B_e^H
    const CMatrix cg = matmul(w, matmul(f.C[g], ae));     // C'_g = B_e C_g A_e
    const double agree = std::max(max_abs(ag - bg), max_abs(ag - dagger(cg)));
    if (agree > tol)
      throw NotSynchronizable("synchronized factors disagree by " +
                              std::to_string(agree));
    out.rho.push_back(std::move(ag));
  }
  return out;
}

int mode1_unfolding_rank(const Tensor3& T, double tol) {
  const int n = T.n();
  // values() is already laid out with a as the slowest index, so the flat
  // buffer *is* the n x n^2 mode-1 unfolding.
  return numerical_rank_rect(n, n * n,
                             std::span<const Complex>(T.values().data(),
                                                      T.values().size()),
                             tol);
}

}  // namespace hypercube
