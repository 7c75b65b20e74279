#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "qmo/qmo.hpp"

namespace test_support {

/// Quaternion product recomputed from the 4x4 unit table, entirely
/// independent of qmo::Quaternion::operator*.
inline qmo::Quaternion table_mul(const qmo::Quaternion& a,
                                 const qmo::Quaternion& b) {
  // unit_table[p][q] = (sign, index) for e_p * e_q with e = (1, i, j, k)
  static constexpr int sign[4][4] = {
      {1, 1, 1, 1}, {1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, -1, -1}};
  static constexpr int index[4][4] = {
      {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  double out[4] = {0, 0, 0, 0};
  const double av[4] = {a.w, a.x, a.y, a.z};
  const double bv[4] = {b.w, b.x, b.y, b.z};
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      out[index[p][q]] += sign[p][q] * av[p] * bv[q];
  return {out[0], out[1], out[2], out[3]};
}

/// 4x4 real matrix of left multiplication by q.
inline Eigen::Matrix4d left_mul_matrix(const qmo::Quaternion& q) {
  Eigen::Matrix4d m;
  m << q.w, -q.x, -q.y, -q.z,  //
      q.x, q.w, -q.z, q.y,     //
      q.y, q.z, q.w, -q.x,     //
      q.z, -q.y, q.x, q.w;
  return m;
}

inline Eigen::MatrixXd to_eigen(const qmo::RealMatrix& a) {
  Eigen::MatrixXd e(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
  return e;
}

/// Singular values of the real representation, the oracle every QSVD result
/// is graded against.
inline Eigen::VectorXd real_repr_singular_values(const qmo::QMatrix& a) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(
             to_eigen(qmo::real_representation(a)))
      .singularValues();
}

inline qmo::Quaternion random_quaternion(std::mt19937_64& rng,
                                         double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  return {dist(rng), dist(rng), dist(rng), dist(rng)};
}

inline qmo::MatTuple random_tuple(const qmo::TupleShape& shape,
                                  std::mt19937_64& rng, double stddev = 1.0) {
  qmo::MatTuple x = qmo::MatTuple::zeros(shape);
  std::normal_distribution<double> dist(0.0, stddev);
  for (std::size_t c = 0; c < x.size(); ++c)
    for (int p = 0; p < 4; ++p)
      for (double& v : x[c].component(p).data()) v = dist(rng);
  return x;
}

/// Slope of log r against log t by least squares.
inline double loglog_slope(const std::vector<double>& t,
                           const std::vector<double>& r) {
  const auto n = static_cast<double>(t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = std::log(t[i]);
    const double y = std::log(std::max(r[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// 1x1 single-component tuple, handy for the scalar-level examples.
inline qmo::MatTuple scalar_tuple(const qmo::Quaternion& q) {
  qmo::QMatrix m(1, 1);
  m.set(0, 0, q);
  return qmo::MatTuple{m};
}

}  // namespace test_support
