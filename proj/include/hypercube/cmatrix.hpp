#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace hypercube {

using Complex = std::complex<double>;

/// Dense complex square matrix, row-major storage.
///
/// Norms and inner products follow the trace-normalized convention
/// <X,Y> = tr(X^H Y)/n, so every unitary has squared norm 1.
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n) {}

  static CMatrix identity(int n) {
    CMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int n() const { return n_; }
  std::size_t size() const { return a_.size(); }

  Complex& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * n_ + c]; }
  const Complex& operator()(int r, int c) const {
    return a_[static_cast<std::size_t>(r) * n_ + c];
  }

  Complex* data() { return a_.data(); }
  const Complex* data() const { return a_.data(); }

  bool is_finite() const;

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(Complex s);
  friend CMatrix operator+(CMatrix x, const CMatrix& y) { return x += y; }
  friend CMatrix operator-(CMatrix x, const CMatrix& y) { return x -= y; }
  friend CMatrix operator*(Complex s, CMatrix x) { return x *= s; }
  bool operator==(const CMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<Complex> a_;
};

/// <X,Y> = tr(X^H Y)/n.  Conjugate-linear in X, linear in Y.
Complex frob_inner(const CMatrix& x, const CMatrix& y);

/// ||X||^2 = <X,X>; real and non-negative, 1 for unitaries.
double norm_sq(const CMatrix& x);

CMatrix matmul(const CMatrix& x, const CMatrix& y);
CMatrix dagger(const CMatrix& x);

/// Haar-like random unitary: QR of a complex Ginibre matrix with the R
/// diagonal phase-fixed. Deterministic per seed.
CMatrix random_unitary(int n, std::uint64_t seed);

/// Number of singular values above tol * sigma_max (one-sided Jacobi).
int numerical_rank(const CMatrix& x, double tol);

double max_abs(const CMatrix& x);

/// max_ij |(U^H U - I)_ij|; zero exactly when U is unitary.
double unitarity_defect(const CMatrix& u);

/// Singular values of a general rows x cols matrix (row-major), descending.
std::vector<double> singular_values_rect(int rows, int cols,
                                         std::span<const Complex> a);
int numerical_rank_rect(int rows, int cols, std::span<const Complex> a,
                        double tol);

/// dst = x * y, all n x n row-major; dst must not alias x or y.
void matmul_into(Complex* dst, const Complex* x, const Complex* y, int n);

}  // namespace hypercube
