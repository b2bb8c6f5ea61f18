#include "hypercube/cmatrix.hpp"

#include <algorithm>
#include <cmath>

#include "hypercube/errors.hpp"
#include "hypercube/rng.hpp"

namespace hypercube {

namespace {

void require_same_n(const CMatrix& x, const CMatrix& y, const char* op) {
  if (x.n() != y.n()) {
    throw DimensionMismatch(std::string(op) + ": dimension mismatch " +
                            std::to_string(x.n()) + " vs " +
                            std::to_string(y.n()));
  }
}

}  // namespace

bool CMatrix::is_finite() const {
  for (const Complex& z : a_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  require_same_n(*this, o, "add");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  require_same_n(*this, o, "sub");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
  for (Complex& z : a_) z *= s;
  return *this;
}

Complex frob_inner(const CMatrix& x, const CMatrix& y) {
  require_same_n(x, y, "frob_inner");
  Complex acc = 0.0;
  const Complex* px = x.data();
  const Complex* py = y.data();
  const std::size_t m = x.size();
  for (std::size_t i = 0; i < m; ++i) acc += std::conj(px[i]) * py[i];
  return acc / static_cast<double>(x.n() == 0 ? 1 : x.n());
}

double norm_sq(const CMatrix& x) {
  double acc = 0.0;
  const Complex* p = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::norm(p[i]);
  return acc / static_cast<double>(x.n() == 0 ? 1 : x.n());
}

void matmul_into(Complex* dst, const Complex* x, const Complex* y, int n) {
  std::fill(dst, dst + static_cast<std::size_t>(n) * n, Complex{});
  for (int i = 0; i < n; ++i) {
    Complex* drow = dst + static_cast<std::size_t>(i) * n;
    for (int k = 0; k < n; ++k) {
      const Complex xv = x[static_cast<std::size_t>(i) * n + k];
      const Complex* yrow = y + static_cast<std::size_t>(k) * n;
      for (int j = 0; j < n; ++j) drow[j] += xv * yrow[j];
    }
  }
}

CMatrix matmul(const CMatrix& x, const CMatrix& y) {
  require_same_n(x, y, "matmul");
  CMatrix out(x.n());
  matmul_into(out.data(), x.data(), y.data(), x.n());
  return out;
}

CMatrix dagger(const CMatrix& x) {
  CMatrix out(x.n());
  for (int i = 0; i < x.n(); ++i)
    for (int j = 0; j < x.n(); ++j) out(j, i) = std::conj(x(i, j));
  return out;
}

CMatrix random_unitary(int n, std::uint64_t seed) {
  if (n < 1) throw DimensionMismatch("random_unitary: n must be positive");
  Rng rng(splitmix64(seed) ^ 0x756e697461727955ULL);
  CMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.cgaussian(1.0);

  // Modified Gram-Schmidt on columns, one re-orthogonalization pass.
  // Normalizing by the (real, positive) residual norm fixes the R diagonal,
  // which is what makes the distribution Haar.
  CMatrix q(n);
  for (int j = 0; j < n; ++j) {
    std::vector<Complex> v(n);
    for (int i = 0; i < n; ++i) v[i] = g(i, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < j; ++k) {
        Complex proj = 0.0;
        for (int i = 0; i < n; ++i) proj += std::conj(q(i, k)) * v[i];
        for (int i = 0; i < n; ++i) v[i] -= proj * q(i, k);
      }
    }
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += std::norm(v[i]);
    nrm = std::sqrt(nrm);
    for (int i = 0; i < n; ++i) q(i, j) = v[i] / nrm;
  }
  return q;
}

double max_abs(const CMatrix& x) {
  double m = 0.0;
  const Complex* p = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

double unitarity_defect(const CMatrix& u) {
  CMatrix g = matmul(dagger(u), u);
  for (int i = 0; i < u.n(); ++i) g(i, i) -= 1.0;
  return max_abs(g);
}

std::vector<double> singular_values_rect(int rows, int cols,
                                         std::span<const Complex> a) {
  if (rows < 0 || cols < 0 ||
      a.size() != static_cast<std::size_t>(rows) * cols) {
    throw DimensionMismatch("singular_values_rect: bad shape");
  }
  for (const Complex& z : a) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error("singular_values_rect: non-finite entry");
  }
  if (rows == 0 || cols == 0) return {};

  // Work on columns of an m x k copy with m >= k (transpose if needed);
  // singular values are unchanged.
  const int m = std::max(rows, cols);
  const int k = std::min(rows, cols);
  std::vector<std::vector<Complex>> col(k, std::vector<Complex>(m));
  if (rows >= cols) {
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < m; ++i) col[j][i] = a[static_cast<std::size_t>(i) * cols + j];
  } else {
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < m; ++i) col[j][i] = a[static_cast<std::size_t>(j) * cols + i];
  }

  // One-sided Jacobi (Hestenes): rotate column pairs until mutually
  // orthogonal; the final column norms are the singular values.
  const double off_tol = 1e-28;  // on |<u,v>|^2 / (|u|^2 |v|^2)
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < k - 1; ++p) {
      for (int q = p + 1; q < k; ++q) {
        double alpha = 0.0, beta = 0.0;
        Complex gamma = 0.0;
        for (int i = 0; i < m; ++i) {
          alpha += std::norm(col[p][i]);
          beta += std::norm(col[q][i]);
          gamma += std::conj(col[p][i]) * col[q][i];
        }
        const double g2 = std::norm(gamma);
        if (g2 <= off_tol * alpha * beta || g2 == 0.0) continue;
        rotated = true;
        const double ag = std::abs(gamma);
        const Complex phase = gamma / ag;
        const double zeta = (beta - alpha) / (2.0 * ag);
        const double t =
            (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (int i = 0; i < m; ++i) {
          const Complex u = col[p][i];
          const Complex v = std::conj(phase) * col[q][i];
          col[p][i] = cs * u - sn * v;
          col[q][i] = sn * u + cs * v;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv(k);
  for (int j = 0; j < k; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += std::norm(col[j][i]);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

int numerical_rank_rect(int rows, int cols, std::span<const Complex> a,
                        double tol) {
  if (tol <= 0.0) throw Error("numerical_rank: tol must be positive");
  const std::vector<double> sv = singular_values_rect(rows, cols, a);
  if (sv.empty() || sv.front() == 0.0) return 0;
  const double cut = tol * sv.front();
  int r = 0;
  for (double s : sv)
    if (s > cut) ++r;
  return r;
}

int numerical_rank(const CMatrix& x, double tol) {
  return numerical_rank_rect(x.n(), x.n(),
                             std::span<const Complex>(x.data(), x.size()), tol);
}

}  // namespace hypercube
