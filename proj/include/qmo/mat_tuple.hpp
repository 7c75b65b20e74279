#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "qmo/errors.hpp"
#include "qmo/qmatrix.hpp"

namespace qmo {

/// Shape signature of a tuple space, e.g. {(m,n), (m,r), (r,n)}.
struct TupleShape {
  std::vector<std::pair<std::size_t, std::size_t>> dims;

  bool operator==(const TupleShape&) const = default;
  std::size_t real_dimension() const {
    std::size_t d = 0;
    for (const auto& [m, n] : dims) d += 4 * m * n;
    return d;
  }
};

/// A matrix component vector: an ordered tuple of 1-3 quaternion matrices,
/// the variable of the objective functions. Supports the real-linear
/// algebra the tuple space carries.
class MatTuple {
 public:
  MatTuple() = default;
  explicit MatTuple(std::vector<QMatrix> comps) : comps_(std::move(comps)) {
    if (comps_.empty() || comps_.size() > 3) {
      throw ShapeMismatch("a matrix component vector has 1 to 3 components");
    }
  }
  MatTuple(std::initializer_list<QMatrix> comps)
      : MatTuple(std::vector<QMatrix>(comps)) {}

  static MatTuple zeros(const TupleShape& shape) {
    std::vector<QMatrix> cs;
    cs.reserve(shape.dims.size());
    for (const auto& [m, n] : shape.dims) cs.emplace_back(m, n);
    return MatTuple(std::move(cs));
  }

  std::size_t size() const { return comps_.size(); }
  const QMatrix& operator[](std::size_t c) const { return comps_[c]; }
  QMatrix& operator[](std::size_t c) { return comps_[c]; }

  TupleShape shape() const {
    TupleShape s;
    for (const QMatrix& q : comps_) s.dims.emplace_back(q.rows(), q.cols());
    return s;
  }
  bool same_shape(const MatTuple& o) const {
    if (comps_.size() != o.comps_.size()) return false;
    for (std::size_t c = 0; c < comps_.size(); ++c)
      if (!comps_[c].same_shape(o.comps_[c])) return false;
    return true;
  }

  MatTuple& operator+=(const MatTuple& o) {
    require_same_shape(o);
    for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] += o.comps_[c];
    return *this;
  }
  MatTuple& operator-=(const MatTuple& o) {
    require_same_shape(o);
    for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] -= o.comps_[c];
    return *this;
  }
  MatTuple& operator*=(double s) {
    for (QMatrix& q : comps_) q *= s;
    return *this;
  }

  friend MatTuple operator+(MatTuple a, const MatTuple& b) { return a += b; }
  friend MatTuple operator-(MatTuple a, const MatTuple& b) { return a -= b; }
  friend MatTuple operator*(MatTuple a, double s) { return a *= s; }
  friend MatTuple operator*(double s, MatTuple a) { return a *= s; }
  MatTuple operator-() const { return *this * -1.0; }

  bool is_finite() const {
    for (const QMatrix& q : comps_)
      if (!q.is_finite()) return false;
    return true;
  }

  /// Flattens R(X) into a real vector (component planes in order).
  std::vector<double> to_real_vector() const {
    std::vector<double> out;
    out.reserve(shape().real_dimension());
    for (const QMatrix& q : comps_)
      for (int c = 0; c < 4; ++c)
        out.insert(out.end(), q.component(c).data().begin(),
                   q.component(c).data().end());
    return out;
  }

  static MatTuple from_real_vector(const TupleShape& shape,
                                   const std::vector<double>& v) {
    MatTuple out = zeros(shape);
    std::size_t t = 0;
    for (QMatrix& q : out.comps_)
      for (int c = 0; c < 4; ++c)
        for (double& x : q.component(c).data()) x = v[t++];
    return out;
  }

 private:
  void require_same_shape(const MatTuple& o) const {
    if (!same_shape(o)) throw ShapeMismatch("tuple shape signatures differ");
  }

  std::vector<QMatrix> comps_;
};

inline double fro_norm_sq(const MatTuple& x) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) s += fro_norm_sq(x[c]);
  return s;
}

inline double fro_norm(const MatTuple& x) { return std::sqrt(fro_norm_sq(x)); }

/// R-product: the sum over components and planes of entrywise real dot
/// products. Equals the real part of the summed quaternion inner products.
inline double r_product(const MatTuple& a, const MatTuple& h) {
  if (!a.same_shape(h)) throw ShapeMismatch("r_product: signatures differ");
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    for (int p = 0; p < 4; ++p) {
      const auto& ap = a[c].component(p).data();
      const auto& hp = h[c].component(p).data();
      for (std::size_t t = 0; t < ap.size(); ++t) s += ap[t] * hp[t];
    }
  }
  return s;
}

/// R-product of two single matrices viewed as one-component tuples.
inline double r_product(const QMatrix& a, const QMatrix& h) {
  if (!a.same_shape(h)) throw ShapeMismatch("r_product: shapes differ");
  double s = 0.0;
  for (int p = 0; p < 4; ++p) {
    const auto& ap = a.component(p).data();
    const auto& hp = h.component(p).data();
    for (std::size_t t = 0; t < ap.size(); ++t) s += ap[t] * hp[t];
  }
  return s;
}

}  // namespace qmo
