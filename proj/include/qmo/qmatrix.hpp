#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "qmo/errors.hpp"
#include "qmo/quaternion.hpp"
#include "qmo/real_matrix.hpp"

namespace qmo {

/// An m x n quaternion matrix A = A0 + A1 i + A2 j + A3 k, stored as four
/// real component planes. All operations are pure; a QMatrix never mutates
/// behind the caller's back.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows),
        cols_(cols),
        comp_{RealMatrix(rows, cols), RealMatrix(rows, cols),
              RealMatrix(rows, cols), RealMatrix(rows, cols)} {}

  QMatrix(RealMatrix a0, RealMatrix a1, RealMatrix a2, RealMatrix a3)
      : rows_(a0.rows()),
        cols_(a0.cols()),
        comp_{std::move(a0), std::move(a1), std::move(a2), std::move(a3)} {
    for (int c = 1; c < 4; ++c) {
      if (comp_[c].rows() != rows_ || comp_[c].cols() != cols_) {
        throw ShapeMismatch("quaternion matrix components must share shape");
      }
    }
  }

  /// Embeds a real matrix (A1 = A2 = A3 = 0).
  static QMatrix from_real(const RealMatrix& a0) {
    QMatrix q(a0.rows(), a0.cols());
    q.comp_[0] = a0;
    return q;
  }

  static QMatrix identity(std::size_t n) {
    return from_real(RealMatrix::identity(n));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool same_shape(const QMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  const RealMatrix& component(int c) const { return comp_[c]; }
  RealMatrix& component(int c) { return comp_[c]; }

  Quaternion operator()(std::size_t i, std::size_t j) const {
    return {comp_[0](i, j), comp_[1](i, j), comp_[2](i, j), comp_[3](i, j)};
  }
  void set(std::size_t i, std::size_t j, const Quaternion& q) {
    comp_[0](i, j) = q.w;
    comp_[1](i, j) = q.x;
    comp_[2](i, j) = q.y;
    comp_[3](i, j) = q.z;
  }

  QMatrix& operator+=(const QMatrix& o) {
    require_same_shape(o);
    for (int c = 0; c < 4; ++c) comp_[c] += o.comp_[c];
    return *this;
  }
  QMatrix& operator-=(const QMatrix& o) {
    require_same_shape(o);
    for (int c = 0; c < 4; ++c) comp_[c] -= o.comp_[c];
    return *this;
  }
  QMatrix& operator*=(double s) {
    for (int c = 0; c < 4; ++c) comp_[c] *= s;
    return *this;
  }

  friend QMatrix operator+(QMatrix a, const QMatrix& b) { return a += b; }
  friend QMatrix operator-(QMatrix a, const QMatrix& b) { return a -= b; }
  friend QMatrix operator*(QMatrix a, double s) { return a *= s; }
  friend QMatrix operator*(double s, QMatrix a) { return a *= s; }
  QMatrix operator-() const { return *this * -1.0; }

  bool is_finite() const {
    for (int c = 0; c < 4; ++c)
      for (double v : comp_[c].data())
        if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  void require_same_shape(const QMatrix& o) const {
    if (!same_shape(o)) throw ShapeMismatch("quaternion matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::array<RealMatrix, 4> comp_;
};

/// Quaternion matrix product, expanded over the component planes with the
/// i,j,k multiplication table (16 real matrix products).
inline QMatrix matmul(const QMatrix& a, const QMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("quaternion matmul: inner dimensions differ");
  }
  const RealMatrix& a0 = a.component(0);
  const RealMatrix& a1 = a.component(1);
  const RealMatrix& a2 = a.component(2);
  const RealMatrix& a3 = a.component(3);
  const RealMatrix& b0 = b.component(0);
  const RealMatrix& b1 = b.component(1);
  const RealMatrix& b2 = b.component(2);
  const RealMatrix& b3 = b.component(3);
  return QMatrix(a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
                 a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
                 a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
                 a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0);
}

inline QMatrix conj_transpose(const QMatrix& a) {
  return QMatrix(a.component(0).transpose(), a.component(1).transpose() * -1.0,
                 a.component(2).transpose() * -1.0,
                 a.component(3).transpose() * -1.0);
}

/// <A, B> = Tr(A^* B).
inline Quaternion inner(const QMatrix& a, const QMatrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("inner: shapes differ");
  Quaternion acc;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      acc += conj(a(i, j)) * b(i, j);
  return acc;
}

inline double fro_norm_sq(const QMatrix& a) {
  double s = 0.0;
  for (int c = 0; c < 4; ++c) {
    for (double v : a.component(c).data()) s += v * v;
  }
  return s;
}

inline double fro_norm(const QMatrix& a) { return std::sqrt(fro_norm_sq(a)); }

inline double entry_modulus(const QMatrix& a, std::size_t i, std::size_t j) {
  return modulus(a(i, j));
}

/// Sum of entry moduli.
inline double norm_l1(const QMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += entry_modulus(a, i, j);
  return s;
}

/// Largest entry modulus.
inline double norm_linf(const QMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, entry_modulus(a, i, j));
  return m;
}

/// Number of nonzero entries. An entry counts as zero when its modulus is
/// <= 1e-12 * ||A||_inf (exact-zero rule for the zero matrix).
inline std::size_t norm_l0(const QMatrix& a) {
  const double scale = norm_linf(a);
  const double tol = scale * 1e-12;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (entry_modulus(a, i, j) > tol) ++count;
  return count;
}

/// The 4m x 4n real representation with block rows
/// (A0,-A1,-A2,-A3), (A1,A0,-A3,A2), (A2,A3,A0,-A1), (A3,-A2,A1,A0).
inline RealMatrix real_representation(const QMatrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  // sign[r][c] * comp[idx[r][c]] for block (r, c)
  static constexpr int idx[4][4] = {
      {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  static constexpr double sgn[4][4] = {
      {1, -1, -1, -1}, {1, 1, -1, 1}, {1, 1, 1, -1}, {1, -1, 1, 1}};
  RealMatrix r(4 * m, 4 * n);
  for (int br = 0; br < 4; ++br) {
    for (int bc = 0; bc < 4; ++bc) {
      const RealMatrix& src = a.component(idx[br][bc]);
      const double s = sgn[br][bc];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
          r(br * m + i, bc * n + j) = s * src(i, j);
    }
  }
  return r;
}

}  // namespace qmo
