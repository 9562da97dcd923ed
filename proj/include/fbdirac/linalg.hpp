#pragma once

#include "fbdirac/precision.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace fbdirac::linalg {

using Vector = std::vector<BigReal>;

//! Dense row-major matrix of BigReals.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, BigReal(0)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  BigReal &operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  const BigReal &operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<BigReal> data_;
};

inline Vector mul(const Matrix &m, const Vector &v) {
  Vector out(m.rows(), BigReal(0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    BigReal acc = 0;
    for (std::size_t j = 0; j < m.cols(); ++j)
      acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

inline Matrix mul(const Matrix &a, const Matrix &b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const BigReal &aik = a(i, k);
      if (aik == 0)
        continue;
      for (std::size_t j = 0; j < b.cols(); ++j)
        out(i, j) += aik * b(k, j);
    }
  return out;
}

inline BigReal dot(const Vector &a, const Vector &b) {
  BigReal acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += a[i] * b[i];
  return acc;
}

inline BigReal norm2(const Vector &v) {
  return sqrt(dot(v, v));
}

inline BigReal frobenius(const Matrix &m) {
  BigReal acc = 0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      acc += m(i, j) * m(i, j);
  return sqrt(acc);
}

//! Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
inline Matrix cholesky(const PrecisionCtx &ctx, const Matrix &b) {
  ScopedPrecision guard(ctx);
  const std::size_t n = b.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    BigReal diag = b(j, j);
    for (std::size_t k = 0; k < j; ++k)
      diag -= l(j, k) * l(j, k);
    if (diag <= 0)
      throw NotPositiveDefinite(
          "cholesky: nonpositive pivot at column " + std::to_string(j) +
          " (metric matrix too ill-conditioned for the digit count)");
    const BigReal ljj = sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      BigReal acc = b(i, j);
      for (std::size_t k = 0; k < j; ++k)
        acc -= l(i, k) * l(j, k);
      l(i, j) = acc / ljj;
    }
  }
  return l;
}

//! Solve L x = y for lower-triangular L.
inline Vector forward_subst(const Matrix &l, const Vector &y) {
  const std::size_t n = l.rows();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    BigReal acc = y[i];
    for (std::size_t k = 0; k < i; ++k)
      acc -= l(i, k) * x[k];
    x[i] = acc / l(i, i);
  }
  return x;
}

//! Solve L^T x = y for lower-triangular L.
inline Vector back_subst_t(const Matrix &l, const Vector &y) {
  const std::size_t n = l.rows();
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    BigReal acc = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k)
      acc -= l(k, ii) * x[k];
    x[ii] = acc / l(ii, ii);
  }
  return x;
}

struct EigenSolution {
  std::vector<BigReal> values; // ascending
  Matrix vectors;              // column i pairs with values[i]
};

//! 2-norm condition estimate of an SPD matrix by power iteration on B and,
//! through its Cholesky factor, on B^-1.
inline BigReal estimate_condition(const PrecisionCtx &ctx, const Matrix &b,
                                  unsigned iterations = 30) {
  ScopedPrecision guard(ctx);
  const std::size_t n = b.rows();
  const Matrix l = cholesky(ctx, b);
  Vector x(n, BigReal(1)), y(n, BigReal(1));
  BigReal lam_max = 0, lam_min_inv = 0;
  for (unsigned it = 0; it < iterations; ++it) {
    x = mul(b, x);
    lam_max = norm2(x);
    if (lam_max == 0)
      return BigReal(1);
    for (auto &v : x)
      v /= lam_max;
    y = back_subst_t(l, forward_subst(l, y));
    lam_min_inv = norm2(y);
    for (auto &v : y)
      v /= lam_min_inv;
  }
  return lam_max * lam_min_inv;
}

//! Cyclic Jacobi rotations on a symmetric matrix; unconditionally convergent
//! and carried out entirely at the working precision.
inline EigenSolution eigen_jacobi(const PrecisionCtx &ctx, Matrix s) {
  ScopedPrecision guard(ctx);
  const std::size_t n = s.rows();
  Matrix v = Matrix::identity(n);
  if (n == 0)
    return {{}, v};

  const BigReal norm = frobenius(s);
  const BigReal stop = norm * pow10(-static_cast<int>(ctx.digits) - 4);

  auto off_norm = [&]() {
    BigReal acc = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        acc += s(i, j) * s(i, j);
    return sqrt(2 * acc);
  };

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= stop)
      break;
    if (sweep == max_sweeps - 1)
      throw ConvergenceError("eigen_jacobi: sweep cap exceeded");
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const BigReal apq = s(p, q);
        if (apq == 0)
          continue;
        const BigReal theta = (s(q, q) - s(p, p)) / (2 * apq);
        BigReal t = 1 / (abs(theta) + sqrt(theta * theta + 1));
        if (theta < 0)
          t = -t;
        const BigReal c = 1 / sqrt(t * t + 1);
        const BigReal sn = t * c;
        const BigReal tau = sn / (1 + c);

        const BigReal app = s(p, p), aqq = s(q, q);
        s(p, p) = app - t * apq;
        s(q, q) = aqq + t * apq;
        s(p, q) = 0;
        s(q, p) = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q)
            continue;
          const BigReal aip = s(i, p), aiq = s(i, q);
          s(i, p) = aip - sn * (aiq + tau * aip);
          s(p, i) = s(i, p);
          s(i, q) = aiq + sn * (aip - tau * aiq);
          s(q, i) = s(i, q);
        }
        for (std::size_t i = 0; i < n; ++i) {
          const BigReal vip = v(i, p), viq = v(i, q);
          v(i, p) = vip - sn * (viq + tau * vip);
          v(i, q) = viq + sn * (vip - tau * viq);
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s(a, a) < s(b, b);
  });

  EigenSolution sol;
  sol.values.reserve(n);
  sol.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    sol.values.push_back(s(order[c], order[c]));
    for (std::size_t i = 0; i < n; ++i)
      sol.vectors(i, c) = v(i, order[c]);
  }
  return sol;
}

//! Generalized symmetric-definite eigenproblem A v = e B v: Cholesky
//! reduction to standard form, Jacobi, back-transformation. Returned
//! eigenvectors are B-orthonormal.
inline EigenSolution solve_generalized(const PrecisionCtx &ctx,
                                       const Matrix &a, const Matrix &b) {
  ScopedPrecision guard(ctx);
  const std::size_t n = a.rows();
  const Matrix l = cholesky(ctx, b);

  // C = L^-1 A L^-T, built column-by-column through triangular solves.
  Matrix w(n, n); // W = L^-1 A
  for (std::size_t col = 0; col < n; ++col) {
    Vector acol(n);
    for (std::size_t i = 0; i < n; ++i)
      acol[i] = a(i, col);
    Vector y = forward_subst(l, acol);
    for (std::size_t i = 0; i < n; ++i)
      w(i, col) = y[i];
  }
  Matrix cmat(n, n); // C^T column j solves L C^T e_j = (W^T) e_j
  for (std::size_t row = 0; row < n; ++row) {
    Vector wrow(n);
    for (std::size_t j = 0; j < n; ++j)
      wrow[j] = w(row, j);
    Vector y = forward_subst(l, wrow);
    for (std::size_t j = 0; j < n; ++j)
      cmat(row, j) = y[j];
  }
  // enforce exact symmetry before rotating
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const BigReal m = (cmat(i, j) + cmat(j, i)) / 2;
      cmat(i, j) = m;
      cmat(j, i) = m;
    }

  EigenSolution std_sol = eigen_jacobi(ctx, cmat);

  EigenSolution out;
  out.values = std::move(std_sol.values);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = std_sol.vectors(i, c);
    Vector vfull = back_subst_t(l, y);
    for (std::size_t i = 0; i < n; ++i)
      out.vectors(i, c) = vfull[i];
  }
  return out;
}

} // namespace fbdirac::linalg
