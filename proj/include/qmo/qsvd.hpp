#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "qmo/errors.hpp"
#include "qmo/qmatrix.hpp"

namespace qmo {

/// QSVD factors A = U diag(sigma) V^* with quaternion-unitary U (m x m),
/// V (n x n) and sigma real, nonnegative, nonincreasing, length min(m, n).
struct QsvdFactors {
  QMatrix U;
  std::vector<double> sigma;
  QMatrix V;
};

struct QsvdOptions {
  /// Cap on implicit-shift sweeps per singular value before giving up.
  int max_sweeps_per_value = 100;
};

namespace detail {

inline void combine_columns(QMatrix& m, std::size_t p, std::size_t q,
                            double c, double s) {
  for (std::size_t l = 0; l < m.rows(); ++l) {
    const Quaternion vp = m(l, p);
    const Quaternion vq = m(l, q);
    m.set(l, p, vp * c + vq * s);
    m.set(l, q, vq * c - vp * s);
  }
}

inline void scale_column(QMatrix& m, std::size_t col, const Quaternion& w) {
  for (std::size_t l = 0; l < m.rows(); ++l) m.set(l, col, m(l, col) * w);
}

/// (c, s) with c*a + s*b = hypot(a, b) and -s*a + c*b = 0.
inline std::pair<double, double> givens(double a, double b) {
  if (b == 0.0) return {1.0, 0.0};
  const double r = std::hypot(a, b);
  return {a / r, b / r};
}

/// Householder step on the column segment B(i0.., j). Zeroes entries below
/// (i0, j) and leaves B(i0, j) as a general quaternion; the caller fixes the
/// phase afterwards. U absorbs the reflector (right-multiplication).
inline void column_reflector(QMatrix& b, QMatrix& u, std::size_t i0,
                             std::size_t j) {
  const std::size_t m = b.rows(), n = b.cols();
  const std::size_t len = m - i0;
  if (len < 1) return;
  std::vector<Quaternion> v(len);
  double sigma_sq = 0.0;
  for (std::size_t l = 0; l < len; ++l) {
    v[l] = b(i0 + l, j);
    sigma_sq += norm_sq(v[l]);
  }
  const double sigma = std::sqrt(sigma_sq);
  if (sigma == 0.0) return;
  const double x0_mod = modulus(v[0]);
  const Quaternion phase =
      x0_mod > 0.0 ? v[0] / x0_mod : Quaternion::one();
  v[0] += phase * sigma;
  const double beta = 1.0 / (sigma_sq + sigma * x0_mod);  // = 2 / |v|^2
  // B <- (I - beta v v^*) B on columns j..n-1
  for (std::size_t jj = j; jj < n; ++jj) {
    Quaternion s;
    for (std::size_t l = 0; l < len; ++l) s += conj(v[l]) * b(i0 + l, jj);
    s = s * beta;
    for (std::size_t l = 0; l < len; ++l)
      b.set(i0 + l, jj, b(i0 + l, jj) - v[l] * s);
  }
  // U <- U (I - beta v v^*)
  for (std::size_t r = 0; r < u.rows(); ++r) {
    Quaternion t;
    for (std::size_t l = 0; l < len; ++l) t += u(r, i0 + l) * v[l];
    t = t * beta;
    for (std::size_t l = 0; l < len; ++l)
      u.set(r, i0 + l, u(r, i0 + l) - t * conj(v[l]));
  }
}

/// Householder step on the row segment B(i, j0..). Zeroes entries right of
/// (i, j0); V absorbs the reflector.
inline void row_reflector(QMatrix& b, QMatrix& v_acc, std::size_t i,
                          std::size_t j0) {
  const std::size_t m = b.rows(), n = b.cols();
  const std::size_t len = n - j0;
  if (len < 1) return;
  std::vector<Quaternion> v(len);
  double sigma_sq = 0.0;
  for (std::size_t l = 0; l < len; ++l) {
    v[l] = conj(b(i, j0 + l));  // reflect the conjugated row as a column
    sigma_sq += norm_sq(v[l]);
  }
  const double sigma = std::sqrt(sigma_sq);
  if (sigma == 0.0) return;
  const double x0_mod = modulus(v[0]);
  const Quaternion phase =
      x0_mod > 0.0 ? v[0] / x0_mod : Quaternion::one();
  v[0] += phase * sigma;
  const double beta = 1.0 / (sigma_sq + sigma * x0_mod);
  // B <- B (I - beta v v^*) on rows i..m-1 (earlier rows are zero here)
  for (std::size_t r = i; r < m; ++r) {
    Quaternion t;
    for (std::size_t l = 0; l < len; ++l) t += b(r, j0 + l) * v[l];
    t = t * beta;
    for (std::size_t l = 0; l < len; ++l)
      b.set(r, j0 + l, b(r, j0 + l) - t * conj(v[l]));
  }
  for (std::size_t r = 0; r < v_acc.rows(); ++r) {
    Quaternion t;
    for (std::size_t l = 0; l < len; ++l) t += v_acc(r, j0 + l) * v[l];
    t = t * beta;
    for (std::size_t l = 0; l < len; ++l)
      v_acc.set(r, j0 + l, v_acc(r, j0 + l) - t * conj(v[l]));
  }
}

/// Unit-quaternion scaling that turns B(i, j) into its (real, nonnegative)
/// modulus. `left` scales row i of B from the left and column i of U;
/// otherwise column j of B from the right and column j of V.
inline void fix_phase(QMatrix& b, QMatrix& acc, std::size_t i, std::size_t j,
                      bool left) {
  const Quaternion q = b(i, j);
  const double mod = modulus(q);
  if (mod == 0.0) return;
  const Quaternion w = q / mod;
  if (left) {
    const Quaternion wc = conj(w);
    for (std::size_t jj = j; jj < b.cols(); ++jj)
      b.set(i, jj, wc * b(i, jj));
    scale_column(acc, i, w);
  } else {
    const Quaternion wc = conj(w);
    for (std::size_t r = 0; r < b.rows(); ++r) b.set(r, j, b(r, j) * wc);
    scale_column(acc, j, wc);
  }
}

/// Implicit-shift Golub-Kahan SVD of the real upper bidiagonal with diagonal
/// d and superdiagonal e. Left rotations accumulate into columns of U, right
/// rotations into columns of V.
inline void bidiagonal_svd(std::vector<double>& d, std::vector<double>& e,
                           QMatrix& u, QMatrix& v, int max_sweeps_per_value) {
  const std::size_t k = d.size();
  if (k == 0) return;

  // Work on a normalized copy to keep the shift arithmetic well scaled.
  double scale = 0.0;
  for (double x : d) scale = std::max(scale, std::abs(x));
  for (double x : e) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return;
  for (double& x : d) x /= scale;
  for (double& x : e) x /= scale;

  const double eps = std::numeric_limits<double>::epsilon();
  const long max_total = static_cast<long>(max_sweeps_per_value) *
                         static_cast<long>(k) * 2 + 16;
  long iters = 0;

  std::size_t hi = k - 1;
  while (true) {
    // Deflate negligible superdiagonals.
    for (std::size_t t = 0; t + 1 < k; ++t) {
      if (std::abs(e[t]) <= eps * (std::abs(d[t]) + std::abs(d[t + 1])) ||
          std::abs(e[t]) < 1e-290) {
        e[t] = 0.0;
      }
    }
    // Find the trailing unreduced block [lo, hi].
    while (hi > 0 && e[hi - 1] == 0.0) --hi;
    if (hi == 0) break;
    std::size_t lo = hi - 1;
    while (lo > 0 && e[lo - 1] != 0.0) --lo;

    if (++iters > max_total) {
      throw ConvergenceFailure("bidiagonal SVD exceeded its sweep cap");
    }

    // A zero diagonal inside the block: rotate the offending superdiagonal
    // entry rightwards until it vanishes.
    bool cancelled = false;
    for (std::size_t t = lo; t < hi; ++t) {
      if (std::abs(d[t]) <= eps) {  // on the normalized scale
        d[t] = 0.0;
        double f = e[t];
        e[t] = 0.0;
        for (std::size_t jj = t + 1; jj <= hi && f != 0.0; ++jj) {
          const auto [c, s] = givens(d[jj], f);
          d[jj] = c * d[jj] + s * f;
          if (jj < hi) {
            f = -s * e[jj];
            e[jj] = c * e[jj];
          } else {
            f = 0.0;
          }
          combine_columns(u, jj, t, c, s);
        }
        cancelled = true;
        break;
      }
    }
    if (cancelled) continue;

    // Wilkinson shift from the trailing 2x2 of B^T B.
    const double dl = d[hi - 1], dh = d[hi], el = e[hi - 1];
    const double elp = hi >= 2 ? e[hi - 2] : 0.0;
    const double t11 = dl * dl + elp * elp;
    const double t12 = dl * el;
    const double t22 = dh * dh + el * el;
    double mu;
    if (t12 == 0.0) {
      mu = t22;
    } else {
      const double delta = 0.5 * (t11 - t22);
      const double root = std::hypot(delta, t12);
      const double denom = delta >= 0.0 ? delta + root : delta - root;
      mu = t22 - t12 * t12 / denom;
    }

    double y = d[lo] * d[lo] - mu;
    double z = d[lo] * e[lo];
    if (y == 0.0 && z == 0.0) y = d[lo] * d[lo];  // zero-shift fallback

    for (std::size_t t = lo; t < hi; ++t) {
      auto [c, s] = givens(y, z);
      if (t > lo) e[t - 1] = c * y + s * z;
      // Right rotation on columns (t, t+1).
      const double d_t = d[t], e_t = e[t], d_t1 = d[t + 1];
      d[t] = c * d_t + s * e_t;
      e[t] = c * e_t - s * d_t;
      double bulge = s * d_t1;
      d[t + 1] = c * d_t1;
      combine_columns(v, t, t + 1, c, s);
      // Left rotation on rows (t, t+1) to chase the bulge.
      std::tie(c, s) = givens(d[t], bulge);
      d[t] = c * d[t] + s * bulge;
      const double e_t2 = e[t], d_t12 = d[t + 1];
      e[t] = c * e_t2 + s * d_t12;
      d[t + 1] = c * d_t12 - s * e_t2;
      if (t + 1 < hi) {
        const double e_t1 = e[t + 1];
        bulge = s * e_t1;
        e[t + 1] = c * e_t1;
        y = e[t];
        z = bulge;
      }
      combine_columns(u, t, t + 1, c, s);
    }
  }

  for (double& x : d) x *= scale;
}

}  // namespace detail

/// QSVD via quaternion Householder reduction to a real bidiagonal followed
/// by an implicit-shift real bidiagonal SVD. Throws ConvergenceFailure if
/// the iteration cap is hit.
inline QsvdFactors qsvd(const QMatrix& a, const QsvdOptions& opts = {}) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m < n) {
    QsvdFactors f = qsvd(conj_transpose(a), opts);
    return {std::move(f.V), std::move(f.sigma), std::move(f.U)};
  }

  QMatrix b = a;
  QMatrix u = QMatrix::identity(m);
  QMatrix v = QMatrix::identity(n);

  for (std::size_t i = 0; i < n; ++i) {
    detail::column_reflector(b, u, i, i);
    detail::fix_phase(b, u, i, i, /*left=*/true);
    if (i + 1 < n) {
      detail::row_reflector(b, v, i, i + 1);
      detail::fix_phase(b, v, i, i + 1, /*left=*/false);
    }
  }

  std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) d[i] = b(i, i).w;
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = b(i, i + 1).w;

  detail::bidiagonal_svd(d, e, u, v, opts.max_sweeps_per_value);

  // Flip signs into U, then order nonincreasingly.
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] < 0.0) {
      d[i] = -d[i];
      detail::scale_column(u, i, Quaternion(-1.0));
    }
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t p, std::size_t q) { return d[p] > d[q]; });

  QsvdFactors f{QMatrix(m, m), std::vector<double>(n), QMatrix(n, n)};
  f.U = u;
  f.V = v;
  for (std::size_t t = 0; t < n; ++t) {
    f.sigma[t] = d[perm[t]];
    for (std::size_t r = 0; r < m; ++r) f.U.set(r, t, u(r, perm[t]));
    for (std::size_t r = 0; r < n; ++r) f.V.set(r, t, v(r, perm[t]));
  }
  return f;
}

/// U diag(sigma) V^* put back together.
inline QMatrix qsvd_reconstruct(const QsvdFactors& f) {
  const std::size_t m = f.U.rows(), n = f.V.rows();
  QMatrix us(m, f.sigma.size());
  for (std::size_t t = 0; t < f.sigma.size(); ++t)
    for (std::size_t r = 0; r < m; ++r) us.set(r, t, f.U(r, t) * f.sigma[t]);
  QMatrix vh(f.sigma.size(), n);
  for (std::size_t t = 0; t < f.sigma.size(); ++t)
    for (std::size_t c = 0; c < n; ++c) vh.set(t, c, conj(f.V(c, t)));
  return matmul(us, vh);
}

/// Largest singular value.
inline double norm_spectral(const QMatrix& a) {
  const QsvdFactors f = qsvd(a);
  return f.sigma.empty() ? 0.0 : f.sigma[0];
}

/// Sum of singular values.
inline double norm_nuclear(const QMatrix& a) {
  const QsvdFactors f = qsvd(a);
  double s = 0.0;
  for (double v : f.sigma) s += v;
  return s;
}

/// Number of singular values above tol * sigma_1 (0 for the zero matrix).
inline std::size_t rank(const QMatrix& a, double tol = 1e-10) {
  const QsvdFactors f = qsvd(a);
  if (f.sigma.empty() || f.sigma[0] <= 0.0) return 0;
  const double cutoff = tol * f.sigma[0];
  std::size_t r = 0;
  while (r < f.sigma.size() && f.sigma[r] > cutoff) ++r;
  return r;
}

/// Best (Eckart-Young) rank-r approximation from the truncated QSVD. Ties at
/// sigma_r = sigma_{r+1} keep the first r triplets of the computed ordering.
inline QMatrix truncate_rank(const QMatrix& a, std::size_t r) {
  const std::size_t k = std::min(a.rows(), a.cols());
  if (r > k) throw InvalidRank("truncate_rank: r exceeds min(m, n)");
  if (r == k) return a;
  const QsvdFactors f = qsvd(a);
  QMatrix out(a.rows(), a.cols());
  for (std::size_t t = 0; t < r; ++t) {
    const double s = f.sigma[t];
    if (s == 0.0) break;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const Quaternion ui = f.U(i, t) * s;
      for (std::size_t j = 0; j < a.cols(); ++j) {
        out.set(i, j, out(i, j) + ui * conj(f.V(j, t)));
      }
    }
  }
  return out;
}

/// Moore-Penrose pseudoinverse through the QSVD with a relative cutoff.
inline QMatrix pseudo_inverse(const QMatrix& a, double tol = 1e-12) {
  const QsvdFactors f = qsvd(a);
  const std::size_t m = a.rows(), n = a.cols();
  QMatrix out(n, m);
  if (f.sigma.empty() || f.sigma[0] <= 0.0) return out;
  const double cutoff = tol * f.sigma[0];
  for (std::size_t t = 0; t < f.sigma.size(); ++t) {
    if (f.sigma[t] <= cutoff) break;
    const double inv = 1.0 / f.sigma[t];
    for (std::size_t i = 0; i < n; ++i) {
      const Quaternion vi = f.V(i, t) * inv;
      for (std::size_t j = 0; j < m; ++j) {
        out.set(i, j, out(i, j) + vi * conj(f.U(j, t)));
      }
    }
  }
  return out;
}

}  // namespace qmo
