#include "hypercube/cayley.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "hypercube/errors.hpp"
#include "hypercube/rng.hpp"

namespace hypercube {

bool is_permutation(const Perm& p) {
  std::vector<char> seen(p.size(), 0);
  for (int v : p) {
    if (v < 0 || v >= static_cast<int>(p.size()) || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

Perm identity_perm(int n) {
  Perm p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return p;
}

Perm inverse_perm(const Perm& p) {
  Perm inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<int>(i);
  return inv;
}

Perm compose_perm(const Perm& p, const Perm& q) {
  if (p.size() != q.size()) throw DimensionMismatch("compose_perm: size mismatch");
  Perm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = p[q[i]];
  return r;
}

CayleyTable CayleyTable::validated(int n, std::vector<int> cells,
                                   std::string label) {
  if (n < 1) throw Error("table order must be positive");
  if (cells.size() != static_cast<std::size_t>(n) * n)
    throw Error("cell count does not match order");
  for (int v : cells) {
    if (v < 0 || v >= n) throw Error("cell value out of range");
  }
  std::vector<char> seen(n);
  for (int i = 0; i < n; ++i) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int j = 0; j < n; ++j) {
      const int v = cells[static_cast<std::size_t>(i) * n + j];
      if (seen[v]) throw LatinViolation(LatinViolation::Axis::Row, i);
      seen[v] = 1;
    }
  }
  for (int j = 0; j < n; ++j) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int i = 0; i < n; ++i) {
      const int v = cells[static_cast<std::size_t>(i) * n + j];
      if (seen[v]) throw LatinViolation(LatinViolation::Axis::Column, j);
      seen[v] = 1;
    }
  }
  return CayleyTable(n, std::move(cells), std::move(label));
}

bool CayleyTable::has_identity_at_zero() const {
  for (int i = 0; i < n_; ++i) {
    if (at(0, i) != i || at(i, 0) != i) return false;
  }
  return true;
}

AlgebraReport assoc_report(const CayleyTable& t) {
  const int n = t.n();
  AlgebraReport rep;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int ab = t.at(a, b);
      for (int c = 0; c < n; ++c) {
        if (t.at(ab, c) != t.at(a, t.at(b, c))) ++rep.n_v;
      }
    }
  rep.n_v_norm = static_cast<double>(rep.n_v) / (static_cast<double>(n) * n);
  for (int e = 0; e < n; ++e) {
    bool ok = true;
    for (int x = 0; x < n && ok; ++x) ok = t.at(e, x) == x && t.at(x, e) == x;
    if (ok) {
      rep.identity = e;
      break;
    }
  }
  rep.is_group = rep.identity.has_value() && rep.n_v == 0;
  return rep;
}

CayleyTable apply_isotopy(const CayleyTable& t, const Perm& phi,
                          const Perm& psi, const Perm& chi) {
  const int n = t.n();
  if (static_cast<int>(phi.size()) != n || static_cast<int>(psi.size()) != n ||
      static_cast<int>(chi.size()) != n)
    throw DimensionMismatch("apply_isotopy: permutation size mismatch");
  if (!is_permutation(phi) || !is_permutation(psi) || !is_permutation(chi))
    throw Error("apply_isotopy: arguments are not permutations");
  const Perm phi_inv = inverse_perm(phi);
  const Perm psi_inv = inverse_perm(psi);
  std::vector<int> cells(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      cells[static_cast<std::size_t>(a) * n + b] = chi[t.at(phi_inv[a], psi_inv[b])];
  return CayleyTable::validated(n, std::move(cells), t.label());
}

LoopIsotope to_loop_isotope(const CayleyTable& t) {
  const int n = t.n();
  // psi maps column j to the symbol in row 0; phi maps row i to the symbol
  // in the column where row 0 holds 0.  chi stays the identity.
  Perm psi(n), phi(n);
  for (int j = 0; j < n; ++j) psi[j] = t.at(0, j);
  const int j0 = inverse_perm(psi)[0];
  for (int i = 0; i < n; ++i) phi[i] = t.at(i, j0);
  const Perm chi = identity_perm(n);
  CayleyTable loop = apply_isotopy(t, phi, psi, chi);
  return LoopIsotope{std::move(loop), std::move(phi), std::move(psi), chi};
}

std::uint64_t table_hash(int n, const std::vector<int>& cells) {
  std::uint64_t h = fnv1a(&n, sizeof(n));
  for (int v : cells) h = fnv1a(&v, sizeof(v), h);
  return h;
}

CanonicalLoop canonical_loop_form(const CayleyTable& t) {
  if (!t.has_identity_at_zero()) throw NotALoop();
  const int n = t.n();
  std::vector<int> tail(n > 1 ? n - 1 : 0);
  for (int i = 1; i < n; ++i) tail[i - 1] = i;

  std::vector<int> best;
  Perm sigma(n), sigma_inv(n);
  std::vector<int> relab(static_cast<std::size_t>(n) * n);
  do {
    sigma[0] = 0;
    for (int i = 1; i < n; ++i) sigma[i] = tail[i - 1];
    for (int i = 0; i < n; ++i) sigma_inv[sigma[i]] = i;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        relab[static_cast<std::size_t>(a) * n + b] =
            sigma[t.at(sigma_inv[a], sigma_inv[b])];
    if (best.empty() || relab < best) best = relab;
  } while (std::next_permutation(tail.begin(), tail.end()));

  const std::uint64_t h = table_hash(n, best);
  return CanonicalLoop{CayleyTable::validated(n, std::move(best), t.label()), h};
}

namespace {

std::vector<int> cyclic_cells(int k) {
  std::vector<int> cells(static_cast<std::size_t>(k) * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) cells[static_cast<std::size_t>(a) * k + b] = (a + b) % k;
  return cells;
}

std::vector<int> xor_cells(int bits) {
  const int k = 1 << bits;
  std::vector<int> cells(static_cast<std::size_t>(k) * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) cells[static_cast<std::size_t>(a) * k + b] = a ^ b;
  return cells;
}

std::vector<int> s3_cells() {
  // Permutations of {0,1,2} in lexicographic one-line order; composition
  // (p*q)(i) = p(q(i)). The identity sits at index 0.
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                           {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  auto index_of = [&](const int* p) {
    for (int i = 0; i < 6; ++i)
      if (perms[i][0] == p[0] && perms[i][1] == p[1] && perms[i][2] == p[2])
        return i;
    return -1;
  };
  std::vector<int> cells(36);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      int comp[3];
      for (int i = 0; i < 3; ++i) comp[i] = perms[a][perms[b][i]];
      cells[static_cast<std::size_t>(a) * 6 + b] = index_of(comp);
    }
  return cells;
}

std::vector<int> d4_cells() {
  // r^i s^j with index i + 4j;  (r^i s^j)(r^k s^l) = r^(i + (-1)^j k) s^(j+l).
  std::vector<int> cells(64);
  for (int g = 0; g < 8; ++g)
    for (int h = 0; h < 8; ++h) {
      const int i = g % 4, j = g / 4, k = h % 4, l = h / 4;
      const int rot = ((i + (j ? -k : k)) % 4 + 4) % 4;
      cells[static_cast<std::size_t>(g) * 8 + h] = rot + 4 * ((j + l) % 2);
    }
  return cells;
}

std::vector<int> q8_cells() {
  // Elements ordered {1, i, j, k, -1, -i, -j, -k}: index = basis + 4*sign.
  // basis_mul[x][y] = {sign, basis} of x*y for basis units.
  static const int mul_sign[4][4] = {
      {0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
  static const int mul_basis[4][4] = {
      {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  std::vector<int> cells(64);
  for (int g = 0; g < 8; ++g)
    for (int h = 0; h < 8; ++h) {
      const int bg = g % 4, sg = g / 4, bh = h % 4, sh = h / 4;
      const int s = (sg + sh + mul_sign[bg][bh]) % 2;
      cells[static_cast<std::size_t>(g) * 8 + h] = mul_basis[bg][bh] + 4 * s;
    }
  return cells;
}

CayleyTable atom_table(std::string_view spec) {
  if (spec == "S3") return CayleyTable::validated(6, s3_cells(), "S3");
  if (spec == "D4") return CayleyTable::validated(8, d4_cells(), "D4");
  if (spec == "Q8") return CayleyTable::validated(8, q8_cells(), "Q8");
  if (spec.rfind("Zn:", 0) == 0) {
    const int k = std::stoi(std::string(spec.substr(3)));
    if (k < 1 || k > 256) throw Error("group_table: cyclic order out of range");
    return CayleyTable::validated(k, cyclic_cells(k), std::string(spec));
  }
  if (spec.rfind("Z2^", 0) == 0) {
    const int bits = std::stoi(std::string(spec.substr(3)));
    if (bits < 1 || bits > 8) throw Error("group_table: exponent out of range");
    return CayleyTable::validated(1 << bits, xor_cells(bits), std::string(spec));
  }
  throw Error("group_table: unknown spec '" + std::string(spec) + "'");
}

CayleyTable direct_product(const CayleyTable& s, const CayleyTable& t) {
  const int n1 = s.n(), n2 = t.n(), n = n1 * n2;
  std::vector<int> cells(static_cast<std::size_t>(n) * n);
  for (int a1 = 0; a1 < n1; ++a1)
    for (int a2 = 0; a2 < n2; ++a2)
      for (int b1 = 0; b1 < n1; ++b1)
        for (int b2 = 0; b2 < n2; ++b2) {
          const int a = a1 * n2 + a2, b = b1 * n2 + b2;
          cells[static_cast<std::size_t>(a) * n + b] =
              s.at(a1, b1) * n2 + t.at(a2, b2);
        }
  return CayleyTable::validated(n, std::move(cells),
                                s.label() + "x" + t.label());
}

}  // namespace

CayleyTable group_table(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = spec.find('x', start);
    if (pos == std::string_view::npos) {
      parts.push_back(spec.substr(start));
      break;
    }
    parts.push_back(spec.substr(start, pos - start));
    start = pos + 1;
  }
  if (parts.empty() || parts.front().empty())
    throw Error("group_table: empty spec");

  CayleyTable result = atom_table(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].empty()) throw Error("group_table: empty product factor");
    if (result.n() * atom_table(parts[i]).n() > 4096)
      throw Error("group_table: product order too large");
    result = direct_product(result, atom_table(parts[i]));
  }
  return result;
}

void write_table(std::ostream& os, const CayleyTable& t) {
  os << t.n() << '\n';
  for (int a = 0; a < t.n(); ++a) {
    for (int b = 0; b < t.n(); ++b) {
      if (b) os << ' ';
      os << t.at(a, b);
    }
    os << '\n';
  }
}

CayleyTable read_table(std::istream& is) {
  int n = 0;
  if (!(is >> n)) throw ParseError("expected table order", 1);
  if (n < 1 || n > 4096) throw ParseError("table order out of range", 1);
  std::vector<int> cells(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!(is >> cells[i]))
      throw ParseError("truncated table", 2 + static_cast<int>(i) / n);
  }
  return CayleyTable::validated(n, std::move(cells));
}

void write_tables(std::ostream& os, const std::vector<CayleyTable>& ts) {
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) os << '\n';
    write_table(os, ts[i]);
  }
}

std::vector<CayleyTable> read_tables(std::istream& is) {
  std::vector<CayleyTable> out;
  while (true) {
    is >> std::ws;
    if (!is || is.peek() == std::char_traits<char>::eof()) break;
    out.push_back(read_table(is));
  }
  return out;
}

}  // namespace hypercube
