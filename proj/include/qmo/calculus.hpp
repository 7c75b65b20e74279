#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "qmo/errors.hpp"
#include "qmo/mat_tuple.hpp"
#include "qmo/qmatrix.hpp"
#include "qmo/qsvd.hpp"

namespace qmo {

/// Regularity of a real function of quaternion matrix variables, stated for
/// its real representation: locally Lipschitz (normal), C^1 (middle) or
/// C^2 (strong).
enum class Smoothness { normal, middle, strong };

/// A real-valued function on a tuple space, with optional analytic first
/// and second derivative callbacks. The gradient lives in the same tuple
/// space as the argument; hess_apply is the linear map D -> grad^2 f(X)[D].
/// Callbacks must be reentrant: finite-difference probes may run anywhere.
struct RealFn {
  TupleShape signature;
  std::function<double(const MatTuple&)> value;
  std::function<MatTuple(const MatTuple&)> grad;
  std::function<MatTuple(const MatTuple&, const MatTuple&)> hess_apply;
  Smoothness smoothness = Smoothness::middle;
};

namespace detail {

inline double linf_real(const MatTuple& x) {
  double m = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c)
    for (int p = 0; p < 4; ++p)
      m = std::max(m, x[c].component(p).max_abs());
  return m;
}

}  // namespace detail

/// True when no nonzero real combination of the tuples vanishes: the
/// normalized Gram matrix of the real representations must have smallest
/// singular value above tol.
inline bool r_linearly_independent(const std::vector<MatTuple>& vs,
                                   double tol = 1e-10) {
  if (vs.empty()) return true;
  const std::size_t p = vs.size();
  std::vector<double> norms(p);
  for (std::size_t i = 0; i < p; ++i) {
    if (!vs[i].same_shape(vs[0])) {
      throw ShapeMismatch("r_linearly_independent: signatures differ");
    }
    norms[i] = fro_norm(vs[i]);
    if (norms[i] == 0.0) return false;
  }
  RealMatrix gram(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      const double g = r_product(vs[i], vs[j]) / (norms[i] * norms[j]);
      gram(i, j) = g;
      gram(j, i) = g;
    }
  }
  const QsvdFactors f = qsvd(QMatrix::from_real(gram));
  return f.sigma.back() > tol;
}

/// Central differences over every real coordinate of R(X), repacked into the
/// tuple space. The independent oracle for every analytic gradient here.
inline MatTuple fd_gradient(const RealFn& f, const MatTuple& x, double h) {
  const TupleShape shape = x.shape();
  std::vector<double> coords = x.to_real_vector();
  std::vector<double> grad(coords.size());
  for (std::size_t t = 0; t < coords.size(); ++t) {
    const double saved = coords[t];
    coords[t] = saved + h;
    const double fp = f.value(MatTuple::from_real_vector(shape, coords));
    coords[t] = saved - h;
    const double fm = f.value(MatTuple::from_real_vector(shape, coords));
    coords[t] = saved;
    grad[t] = (fp - fm) / (2.0 * h);
  }
  return MatTuple::from_real_vector(shape, grad);
}

/// Gradient of f at X: the analytic callback when present, otherwise
/// Richardson-extrapolated central differences with a consistency check
/// across step sizes. Throws NotDifferentiable when the finite-difference
/// estimates refuse to settle (kink or worse at X).
inline MatTuple gradient(const RealFn& f, const MatTuple& x) {
  if (f.grad) return f.grad(x);
  const double h = 1e-5 * (1.0 + detail::linf_real(x));
  const MatTuple d1 = fd_gradient(f, x, h);
  const MatTuple d2 = fd_gradient(f, x, h / 2.0);
  const MatTuple d3 = fd_gradient(f, x, h / 4.0);
  const MatTuple r1 = (d2 * 4.0 - d1) * (1.0 / 3.0);
  const MatTuple r2 = (d3 * 4.0 - d2) * (1.0 / 3.0);
  const double drift = fro_norm(r2 - r1);
  if (drift > 1e-3 * std::max(fro_norm(r2), 1e-12) && drift > 1e-10) {
    throw NotDifferentiable(
        "finite-difference gradients disagree across step sizes");
  }
  return r2;
}

/// f'(X; D) = grad f(X) . D.
inline double directional_derivative(const RealFn& f, const MatTuple& x,
                                     const MatTuple& d) {
  return r_product(gradient(f, x), d);
}

// ---------------------------------------------------------------------------
// The low-rank decomposition objective f(W, Y, Z) = 1/2 ||YZ - W||_F^2 and
// its closed-form first and second derivatives.
// ---------------------------------------------------------------------------

/// (W - YZ, (YZ - W) Z^*, Y^* (YZ - W)).
inline MatTuple prototype_gradient(const MatTuple& x) {
  const QMatrix& w = x[0];
  const QMatrix& y = x[1];
  const QMatrix& z = x[2];
  const QMatrix resid = matmul(y, z) - w;  // YZ - W
  return MatTuple{-resid, matmul(resid, conj_transpose(z)),
                  matmul(conj_transpose(y), resid)};
}

/// The nine second-order blocks assembled into one linear map:
///   W-block: DW - DY Z - Y DZ
///   Y-block: -DW Z^* + DY ZZ^* + (YZ - W)(DZ)^* + Y (DZ) Z^*
///   Z-block: -Y^* DW + (DY)^*(YZ - W) + Y^*(DY) Z + Y^*Y DZ
inline MatTuple prototype_hessian_apply(const MatTuple& x, const MatTuple& d) {
  if (x.size() != 3 || !x.same_shape(d)) {
    throw ShapeMismatch("prototype hessian: need matching (W, Y, Z) tuples");
  }
  const QMatrix& w = x[0];
  const QMatrix& y = x[1];
  const QMatrix& z = x[2];
  const QMatrix& dw = d[0];
  const QMatrix& dy = d[1];
  const QMatrix& dz = d[2];
  const QMatrix resid = matmul(y, z) - w;
  const QMatrix zh = conj_transpose(z);
  const QMatrix yh = conj_transpose(y);
  const QMatrix bw = dw - matmul(dy, z) - matmul(y, dz);
  const QMatrix by = matmul(dy, matmul(z, zh)) - matmul(dw, zh) +
                     matmul(resid, conj_transpose(dz)) +
                     matmul(y, matmul(dz, zh));
  const QMatrix bz = matmul(yh, matmul(y, dz)) - matmul(yh, dw) +
                     matmul(conj_transpose(dy), resid) +
                     matmul(yh, matmul(dy, z));
  return MatTuple{bw, by, bz};
}

/// RealFn wrapper for the prototype objective on Q^{m x n} x Q^{m x r} x
/// Q^{r x n}, with analytic gradient and hessian-apply attached.
inline RealFn make_prototype_objective(std::size_t m, std::size_t n,
                                       std::size_t r) {
  RealFn f;
  f.signature = TupleShape{{{m, n}, {m, r}, {r, n}}};
  f.smoothness = Smoothness::strong;
  f.value = [](const MatTuple& x) {
    return 0.5 * fro_norm_sq(matmul(x[1], x[2]) - x[0]);
  };
  f.grad = prototype_gradient;
  f.hess_apply = prototype_hessian_apply;
  return f;
}

/// The half quadratic form (1/2) grad^2 f(X) D . D, from the analytic
/// hessian-apply when present and otherwise from Richardson-extrapolated
/// second-order central differences along D.
inline double hessian_quadratic_form(const RealFn& f, const MatTuple& x,
                                     const MatTuple& d) {
  if (f.hess_apply) return 0.5 * r_product(f.hess_apply(x, d), d);
  const double dnorm = fro_norm(d);
  if (dnorm == 0.0) return 0.0;
  const MatTuple dir = d * (1.0 / dnorm);
  const double f0 = f.value(x);
  const double t = 1e-3 * (1.0 + detail::linf_real(x));
  const auto second_diff = [&](double step) {
    const double fp = f.value(x + dir * step);
    const double fm = f.value(x - dir * step);
    return (fp - 2.0 * f0 + fm) / (step * step);
  };
  const double q1 = second_diff(t);
  const double q2 = second_diff(t / 2.0);
  const double extrapolated = (4.0 * q2 - q1) / 3.0;
  return 0.5 * extrapolated * dnorm * dnorm;
}

/// Frobenius gap between the finite-difference gradient of f*g and
/// f(X) grad g + g(X) grad f.
inline double check_product_rule(const RealFn& f, const RealFn& g,
                                 const MatTuple& x) {
  RealFn product;
  product.signature = f.signature;
  product.smoothness = Smoothness::middle;
  product.value = [&](const MatTuple& p) { return f.value(p) * g.value(p); };
  const MatTuple lhs = gradient(product, x);
  const MatTuple rhs = gradient(g, x) * f.value(x) + gradient(f, x) * g.value(x);
  return fro_norm(lhs - rhs);
}

/// Frobenius gap between the finite-difference gradient of phi(f(X)) and
/// phi'(f(X)) grad f(X).
inline double check_chain_rule(const RealFn& f,
                               const std::function<double(double)>& phi,
                               const std::function<double(double)>& phi_prime,
                               const MatTuple& x) {
  RealFn composite;
  composite.signature = f.signature;
  composite.smoothness = Smoothness::middle;
  composite.value = [&](const MatTuple& p) { return phi(f.value(p)); };
  const MatTuple lhs = gradient(composite, x);
  const MatTuple rhs = gradient(f, x) * phi_prime(f.value(x));
  return fro_norm(lhs - rhs);
}

struct SubgradientCheck {
  bool holds = true;
  double worst_violation = 0.0;  // positive means the inequality failed
  std::optional<MatTuple> witness;
};

namespace detail {

inline MatTuple random_gaussian_tuple(const TupleShape& shape,
                                      std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  MatTuple out = MatTuple::zeros(shape);
  for (std::size_t c = 0; c < out.size(); ++c)
    for (int p = 0; p < 4; ++p)
      for (double& v : out[c].component(p).data()) v = dist(rng);
  return out;
}

/// Gaussian tuple with an independent scale per component drawn from
/// {0, 0.1, 1, 10}. Mixed scales probe boundary structure (tiny blocks
/// against large ones) that uniform sampling all but never reaches.
inline MatTuple random_scaled_tuple(const TupleShape& shape,
                                    std::mt19937_64& rng) {
  static constexpr double kScales[] = {0.0, 0.1, 1.0, 10.0};
  std::uniform_int_distribution<int> pick(0, 3);
  MatTuple out = MatTuple::zeros(shape);
  for (std::size_t c = 0; c < out.size(); ++c) {
    std::normal_distribution<double> dist(0.0, 1.0);
    const double scale = kScales[pick(rng)];
    for (int p = 0; p < 4; ++p)
      for (double& v : out[c].component(p).data()) v = dist(rng) * scale;
  }
  return out;
}

}  // namespace detail

/// Sampling certificate for G being a subgradient of a convex f at Xbar:
/// f(X) >= f(Xbar) + G . (X - Xbar) at random probes across several radii
/// and at coordinate probes around Xbar. A returned false is a certified
/// falsification (witness attached); true means unfalsified.
inline SubgradientCheck check_subgradient(const RealFn& f,
                                          const MatTuple& xbar,
                                          const MatTuple& g,
                                          std::size_t samples = 200,
                                          std::uint64_t seed = 0) {
  if (!xbar.same_shape(g)) {
    throw ShapeMismatch("check_subgradient: signatures differ");
  }
  const double fbar = f.value(xbar);
  SubgradientCheck result;
  const double tol = 1e-9 * (1.0 + std::abs(fbar));
  const auto probe = [&](const MatTuple& x) {
    const double violation = fbar + r_product(g, x - xbar) - f.value(x);
    if (violation > result.worst_violation) {
      result.worst_violation = violation;
      if (violation > tol) {
        result.holds = false;
        result.witness = x;
      }
    }
  };

  std::mt19937_64 rng(seed);
  const double radii[] = {0.1, 1.0, 10.0};
  for (std::size_t s = 0; s < samples; ++s) {
    const double radius = radii[s % 3];
    probe(xbar + detail::random_gaussian_tuple(xbar.shape(), rng, radius));
  }
  // Coordinate probes, two scales each.
  const TupleShape shape = xbar.shape();
  std::vector<double> coords = xbar.to_real_vector();
  for (std::size_t t = 0; t < coords.size(); ++t) {
    for (double delta : {1e-3, 1.0}) {
      for (double sign : {1.0, -1.0}) {
        const double saved = coords[t];
        coords[t] = saved + sign * delta;
        probe(MatTuple::from_real_vector(shape, coords));
        coords[t] = saved;
      }
    }
  }
  return result;
}

struct ConvexityCheck {
  bool convex = true;  // unfalsified
  double min_form = 0.0;
  std::optional<MatTuple> witness_point;
  std::optional<MatTuple> witness_direction;
};

/// Sampling test of grad^2 f >= 0 over random points and directions; a
/// negative curvature sample certifies nonconvexity.
inline ConvexityCheck check_convexity_psd(const RealFn& f,
                                          std::size_t trials = 200,
                                          std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  ConvexityCheck result;
  bool first = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const MatTuple x = detail::random_scaled_tuple(f.signature, rng);
    const MatTuple d = detail::random_scaled_tuple(f.signature, rng);
    const double q =
        hessian_quadratic_form(f, x, d) / std::max(1.0, fro_norm_sq(d));
    if (first || q < result.min_form) {
      result.min_form = q;
      first = false;
    }
    if (q < -1e-9) {
      result.convex = false;
      result.witness_point = x;
      result.witness_direction = d;
      return result;
    }
  }
  return result;
}

}  // namespace qmo
