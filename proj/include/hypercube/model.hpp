#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hypercube/cayley.hpp"
#include "hypercube/cmatrix.hpp"

namespace hypercube {

/// Below this floor a slice norm or |T_abc| counts as degenerate.
inline constexpr double kDegenerateFloor = 1e-12;

/// Factorization parameters: three stacks of n complex n x n slices.
struct FactorSet {
  int n = 0;
  std::vector<CMatrix> A, B, C;

  static FactorSet zeros(int n);
  bool is_finite() const;
};

/// Throws on shape inconsistencies or non-finite entries.
void check_factorset(const FactorSet& f);

/// Order-3 tensor of n^3 complex scalars indexed (a, b, c).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), v_(static_cast<std::size_t>(n) * n * n) {}

  int n() const { return n_; }
  Complex& at(int a, int b, int c) {
    return v_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c];
  }
  const Complex& at(int a, int b, int c) const {
    return v_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c];
  }
  const std::vector<Complex>& values() const { return v_; }
  std::vector<Complex>& values() { return v_; }

 private:
  int n_ = 0;
  std::vector<Complex> v_;
};

/// 0/1 structure tensor of a table: delta[a][b][c] = 1 iff a∘b = c.
Tensor3 delta_tensor(const CayleyTable& t);

/// T_abc = tr(A_a B_b C_c)/n.
Tensor3 contract(const FactorSet& f);

/// max_abc |T_abc - delta_abc| over all n^3 entries.
double feas_residual_max(const Tensor3& T, const CayleyTable& t);

/// Sum over all index pairs of ||B_b C_c||^2 + ||C_c A_a||^2 + ||A_a B_b||^2.
double objective_H(const FactorSet& f);

/// Same objective as a sum over the n^2 supported triples of the table;
/// equal to objective_H for any Latin square.
double objective_H_supported(const FactorSet& f, const CayleyTable& t);

struct TripleRef {
  int a, b, c;
};

struct BaseTermResult {
  double value = 0.0;
  std::vector<TripleRef> triples;
  std::vector<double> per_triple;
};

/// B = sum over supported triples of |T_abc|^2 (1/||A_a||^2 + 1/||B_b||^2 +
/// 1/||C_c||^2).  Throws DegenerateSlice when a supported slice norm
/// underflows.
BaseTermResult base_term_B(const FactorSet& f, const CayleyTable& t);

struct MisalignmentResult {
  double value = 0.0;
  std::vector<TripleRef> triples;
  /// ||Delta^(A)||^2, ||Delta^(B)||^2, ||Delta^(C)||^2 per supported triple.
  std::vector<std::array<double, 3>> delta_norms;
  /// The misalignment matrices themselves, same order as `triples`.
  std::vector<std::array<CMatrix, 3>> deltas;
};

/// Delta^(A)_abc = (conj(T_abc)/||A_a||^2) A_a - (B_b C_c)^H and analogues;
/// R is the sum of the three squared norms over supported triples.
MisalignmentResult misalignment_R(const FactorSet& f, const CayleyTable& t);

struct KappaResult {
  std::vector<TripleRef> triples;
  std::vector<double> kappa;
};

/// kappa_abc = ||A_a||^2 ||B_b||^2 ||C_c||^2 / |T_abc|^2; invariant under
/// independent rescaling of slices. Throws DegenerateTriple when |T_abc|
/// underflows on a supported triple.
KappaResult kappa_values(const FactorSet& f, const CayleyTable& t);

/// Normalized slice Gram matrices averaged over supported triples, with the
/// maximum entrywise deviation of any per-triple realization from its mean.
struct GramTriple {
  CMatrix X, Y, Z;
  double spread = 0.0;
};

GramTriple gram_triple(const FactorSet& f, const CayleyTable& t);

struct TripleReport {
  TripleRef triple;
  Complex T;
  std::array<double, 3> delta_norms;
  std::array<double, 3> slice_norms;
  std::optional<double> kappa;
  bool degenerate = false;
};

/// Aggregate view: H, B, R with per-triple detail. Degenerate triples are
/// flagged and excluded from B and R rather than reported as infinities, so
/// H = B + R is only guaranteed when `flags` is empty.
struct DecompositionReport {
  double H = 0.0, B = 0.0, R = 0.0;
  std::vector<TripleReport> per_triple;
  std::optional<GramTriple> gram;
  std::vector<std::string> flags;
};

DecompositionReport decompose(const FactorSet& f, const CayleyTable& t,
                              bool with_gram = true);

/// Left-multiplication permutation factors A_g = B_g = C_g^H = rho(g); an
/// exact factorization of the group's structure tensor with H = 3n^2 and
/// R = 0.  Throws NotAGroup for non-group tables.
FactorSet regular_rep_factors(const CayleyTable& g);

/// (A,B,C) -> (U A V^H, V B W^H, W C U^H); preserves T and H.
/// U, V, W must be unitary within 1e-8 (NonUnitaryGauge otherwise).
FactorSet apply_gauge(const FactorSet& f, const CMatrix& u, const CMatrix& v,
                      const CMatrix& w);

/// Index substitution A'_a = A_phi(a), B'_b = B_psi(b), C'_c = C_chi(c);
/// contract(result)_abc equals contract(f)_{phi(a) psi(b) chi(c)} exactly.
FactorSet permute_factors(const FactorSet& f, const Perm& phi, const Perm& psi,
                          const Perm& chi);

struct RepMap {
  int n = 0;
  std::vector<CMatrix> rho;
  std::array<CMatrix, 3> source_gauge;  // the (U, V, W) used
};

struct SyncOptions {
  /// Refusal threshold on unitarity, collinearity and the synchronized
  /// agreement residual.
  double tolerance = 1e-4;
};

/// Applies the synchronizing gauge (U,V,W) = (A_e^H, I, B_e) built from the
/// loop identity e = 0 and returns rho(g) = A'_g after verifying the three
/// factors collapse to one map. Throws NotSynchronizable when the inputs
/// fail the tolerance, NotALoop when the table has no identity at 0.
RepMap synchronize(const FactorSet& f, const CayleyTable& loop,
                   const SyncOptions& opts = {});

/// Rank of the n x n^2 mode-1 unfolding (rows a, columns (b,c)).
int mode1_unfolding_rank(const Tensor3& T, double tol);

}  // namespace hypercube
