#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hypercube {

using Perm = std::vector<int>;

bool is_permutation(const Perm& p);
Perm identity_perm(int n);
Perm inverse_perm(const Perm& p);
/// (p after q): result[i] = p[q[i]].
Perm compose_perm(const Perm& p, const Perm& q);

/// Finite binary operation on {0..n-1} whose table is a Latin square
/// (a quasigroup). Immutable once validated.
class CayleyTable {
 public:
  /// Validates the Latin-square property; throws LatinViolation naming the
  /// first offending row or column.
  static CayleyTable validated(int n, std::vector<int> cells,
                               std::string label = {});

  int n() const { return n_; }

  /// a ∘ b
  int at(int a, int b) const { return cells_[static_cast<std::size_t>(a) * n_ + b]; }

  const std::vector<int>& cells() const { return cells_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  /// True when row 0 and column 0 are the natural order (loop with e = 0).
  bool has_identity_at_zero() const;

  bool same_cells(const CayleyTable& o) const {
    return n_ == o.n_ && cells_ == o.cells_;
  }

 private:
  CayleyTable(int n, std::vector<int> cells, std::string label)
      : n_(n), cells_(std::move(cells)), label_(std::move(label)) {}

  int n_;
  std::vector<int> cells_;
  std::string label_;
};

struct AlgebraReport {
  long long n_v = 0;       ///< associativity violations over all n^3 triples
  double n_v_norm = 0.0;   ///< n_v / n^2
  std::optional<int> identity;
  bool is_group = false;
};

AlgebraReport assoc_report(const CayleyTable& t);

/// t'[a][b] = chi(t[phi^-1(a)][psi^-1(b)]).
///
/// With this convention applying tau1 then tau2 equals applying the single
/// triple (tau2 ∘ tau1) componentwise.  Worked 3x3 example: let t be the
/// mod-3 addition table and phi = (0 1 2 -> 1 2 0), psi = chi = id.  Then
/// t'[a][b] = t[phi^-1(a)][b], i.e. rows are moved so that old row 0 shows
/// up as new row phi(0) = 1:  t' rows = [201, 012, 120].
CayleyTable apply_isotopy(const CayleyTable& t, const Perm& phi,
                          const Perm& psi, const Perm& chi);

struct LoopIsotope {
  CayleyTable loop;  ///< has identity at element 0
  Perm phi, psi, chi;
};

/// Principal isotope with a two-sided identity at 0; apply_isotopy(t, phi,
/// psi, chi) reproduces `loop` exactly.
LoopIsotope to_loop_isotope(const CayleyTable& t);

struct CanonicalLoop {
  CayleyTable table;
  std::uint64_t hash;
};

/// Lexicographically minimal relabeling over all permutations fixing 0.
/// Two loops are isomorphic iff their canonical cells coincide.
CanonicalLoop canonical_loop_form(const CayleyTable& t);

/// Standard group tables: "Zn:k" (cyclic of order k), "Z2^k", "S3", "D4",
/// "Q8", and direct products joined with 'x' (e.g. "Zn:2xZn:4").
CayleyTable group_table(std::string_view spec);

// --- Latin-square text format -------------------------------------------
// line 1: n; then n lines of n space-separated integers in [0, n).
void write_table(std::ostream& os, const CayleyTable& t);
CayleyTable read_table(std::istream& is);
/// Blank-line separated blocks.
void write_tables(std::ostream& os, const std::vector<CayleyTable>& ts);
std::vector<CayleyTable> read_tables(std::istream& is);

std::uint64_t table_hash(int n, const std::vector<int>& cells);

}  // namespace hypercube
