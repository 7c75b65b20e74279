#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "qmo/calculus.hpp"
#include "qmo/entry_mask.hpp"
#include "qmo/errors.hpp"
#include "qmo/mat_tuple.hpp"
#include "qmo/qmatrix.hpp"
#include "qmo/qsvd.hpp"

namespace qmo {

// ---------------------------------------------------------------------------
// First-order KKT machinery for min f s.t. h_j = 0, g_k <= 0.
// ---------------------------------------------------------------------------

struct ConstrainedProblem {
  RealFn objective;
  std::vector<RealFn> equalities;
  std::vector<RealFn> inequalities;
};

struct KktReport {
  double stationarity = 0.0;  // || grad f + sum lambda grad h + sum mu grad g ||_F
  std::vector<double> eq_violation;
  std::vector<double> ineq_violation;  // max(g_k, 0)
  std::vector<double> lambda;
  std::vector<double> mu;  // all k, inactive ones zero
  double complementarity = 0.0;
  bool licq_ok = true;
};

namespace detail {

/// Least squares through the QSVD pseudoinverse of the real column stack.
inline std::vector<double> real_lstsq(
    const std::vector<std::vector<double>>& cols,
    const std::vector<double>& b) {
  const std::size_t n = cols.size();
  if (n == 0) return {};
  const std::size_t m = b.size();
  RealMatrix a(m, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) a(i, j) = cols[j][i];
  const QMatrix pinv = pseudo_inverse(QMatrix::from_real(a));
  std::vector<double> x(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i)
      x[j] += pinv.component(0)(j, i) * b[i];
  return x;
}

/// Lawson-Hanson style active-set least squares with the first n_free
/// variables unconstrained and the rest kept nonnegative.
inline std::vector<double> sign_constrained_lstsq(
    const std::vector<std::vector<double>>& cols, const std::vector<double>& b,
    std::size_t n_free) {
  const std::size_t n = cols.size();
  const std::size_t m = b.size();
  std::vector<double> x(n, 0.0);
  if (n == 0) return x;

  std::vector<bool> passive(n, false);
  for (std::size_t j = 0; j < n_free; ++j) passive[j] = true;

  const auto solve_passive = [&]() {
    std::vector<std::vector<double>> sub;
    std::vector<std::size_t> map;
    for (std::size_t j = 0; j < n; ++j) {
      if (passive[j]) {
        sub.push_back(cols[j]);
        map.push_back(j);
      }
    }
    std::vector<double> z(n, 0.0);
    const std::vector<double> zs = real_lstsq(sub, b);
    for (std::size_t t = 0; t < map.size(); ++t) z[map[t]] = zs[t];
    return z;
  };

  double scale = 0.0;
  for (const auto& col : cols)
    for (double v : col) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * (1.0 + scale);

  x = solve_passive();
  for (std::size_t guard = 0; guard < 3 * n + 10; ++guard) {
    // Residual correlations of the currently clamped variables.
    std::vector<double> resid = b;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i) resid[i] -= cols[j][i] * x[j];
    double best = tol;
    std::size_t pick = n;
    for (std::size_t j = n_free; j < n; ++j) {
      if (passive[j]) continue;
      double w = 0.0;
      for (std::size_t i = 0; i < m; ++i) w += cols[j][i] * resid[i];
      if (w > best) {
        best = w;
        pick = j;
      }
    }
    if (pick == n) break;
    passive[pick] = true;

    for (std::size_t inner = 0; inner < 3 * n + 10; ++inner) {
      const std::vector<double> z = solve_passive();
      bool feasible = true;
      double alpha = 1.0;
      for (std::size_t j = n_free; j < n; ++j) {
        if (passive[j] && z[j] <= 0.0) {
          feasible = false;
          if (x[j] - z[j] > 0.0) {
            alpha = std::min(alpha, x[j] / (x[j] - z[j]));
          } else {
            alpha = 0.0;
          }
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      for (std::size_t j = 0; j < n; ++j) x[j] += alpha * (z[j] - x[j]);
      for (std::size_t j = n_free; j < n; ++j) {
        if (passive[j] && x[j] <= tol) {
          passive[j] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  return x;
}

}  // namespace detail

/// Evaluates the first-order conditions at X: recovers multipliers by a
/// sign-constrained least-squares fit over the real representations of the
/// constraint gradients, then reports the stationarity and feasibility
/// residuals together with an R-linear-independence flag for the active set.
inline KktReport kkt_residual(const ConstrainedProblem& p, const MatTuple& x) {
  KktReport report;
  const MatTuple gf = gradient(p.objective, x);

  std::vector<MatTuple> eq_grads;
  eq_grads.reserve(p.equalities.size());
  for (const RealFn& h : p.equalities) {
    report.eq_violation.push_back(std::abs(h.value(x)));
    eq_grads.push_back(gradient(h, x));
  }

  std::vector<double> g_values;
  std::vector<MatTuple> active_grads;
  std::vector<std::size_t> active_index;
  for (std::size_t k = 0; k < p.inequalities.size(); ++k) {
    const double gv = p.inequalities[k].value(x);
    g_values.push_back(gv);
    report.ineq_violation.push_back(std::max(gv, 0.0));
    if (gv >= -1e-8 * (1.0 + std::abs(gv))) {
      active_grads.push_back(gradient(p.inequalities[k], x));
      active_index.push_back(k);
    }
  }

  std::vector<std::vector<double>> cols;
  for (const MatTuple& g : eq_grads) cols.push_back(g.to_real_vector());
  for (const MatTuple& g : active_grads) cols.push_back(g.to_real_vector());
  std::vector<double> b = gf.to_real_vector();
  for (double& v : b) v = -v;

  const std::vector<double> mult =
      detail::sign_constrained_lstsq(cols, b, eq_grads.size());
  report.lambda.assign(mult.begin(), mult.begin() + eq_grads.size());
  report.mu.assign(p.inequalities.size(), 0.0);
  for (std::size_t t = 0; t < active_index.size(); ++t) {
    report.mu[active_index[t]] = mult[eq_grads.size() + t];
  }

  MatTuple residual = gf;
  for (std::size_t j = 0; j < eq_grads.size(); ++j)
    residual += eq_grads[j] * report.lambda[j];
  for (std::size_t t = 0; t < active_grads.size(); ++t)
    residual += active_grads[t] * report.mu[active_index[t]];
  report.stationarity = fro_norm(residual);

  for (std::size_t k = 0; k < g_values.size(); ++k) {
    report.complementarity =
        std::max(report.complementarity, std::abs(report.mu[k] * g_values[k]));
  }

  std::vector<MatTuple> active_set = eq_grads;
  active_set.insert(active_set.end(), active_grads.begin(),
                    active_grads.end());
  report.licq_ok = r_linearly_independent(active_set, 1e-10);
  return report;
}

// ---------------------------------------------------------------------------
// Stationarity of the low-rank decomposition problem
// min ||YZ - W||_F^2  s.t.  W_Omega = D_Omega.
// ---------------------------------------------------------------------------

struct PrototypeResiduals {
  double free_entries;  // || (W - YZ)_{Omega^c} ||_F
  double left;          // || (YZ - W) Z^* ||_F
  double right;         // || Y^* (YZ - W) ||_F
  double data;          // || (W - D)_Omega ||_F

  double max() const {
    return std::max(std::max(free_entries, left), std::max(right, data));
  }
};

inline PrototypeResiduals prototype_stationarity(const QMatrix& w,
                                                 const QMatrix& y,
                                                 const QMatrix& z,
                                                 const QMatrix& d,
                                                 const EntryMask& omega) {
  if (y.cols() != z.rows() || y.rows() != w.rows() || z.cols() != w.cols() ||
      !w.same_shape(d)) {
    throw ShapeMismatch("prototype_stationarity: inconsistent shapes");
  }
  const QMatrix resid = matmul(y, z) - w;
  PrototypeResiduals out{};
  out.free_entries = fro_norm(omega.project_complement(resid));
  out.left = fro_norm(matmul(resid, conj_transpose(z)));
  out.right = fro_norm(matmul(conj_transpose(y), resid));
  out.data = fro_norm(omega.project(w - d));
  return out;
}

// ---------------------------------------------------------------------------
// Proximal/projection operators and generalized-subdifferential membership.
// ---------------------------------------------------------------------------

/// Entrywise hard threshold: the proximal mapping of tau * ||.||_0. Keeps an
/// entry when its modulus exceeds sqrt(2 tau); the tie picks 0.
inline QMatrix prox_l0(const QMatrix& z, double tau) {
  const double threshold = std::sqrt(2.0 * tau);
  QMatrix out = z;
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = 0; j < z.cols(); ++j)
      if (modulus(z(i, j)) <= threshold) out.set(i, j, Quaternion::zero());
  return out;
}

/// Membership in the generalized subdifferential of ||.||_0 at A: G must
/// vanish (entry modulus <= tol) on the support of A.
inline bool l0_subdiff_member(const QMatrix& g, const QMatrix& a,
                              double tol = 1e-10) {
  if (!g.same_shape(a)) throw ShapeMismatch("l0_subdiff_member: shapes differ");
  const double support_cut = 1e-12 * norm_linf(a);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (modulus(a(i, j)) > support_cut && modulus(g(i, j)) > tol)
        return false;
  return true;
}

/// Membership of G in the normal cone of {rank <= r} at Y. With s = rank(Y),
/// requires U_1^* G and G V_1 to vanish (relative to ||G||_F) for the leading
/// s singular factors of Y; at rank-deficient points (s < r) additionally
/// rank(G) <= min(m, n) - r. Throws InvalidRank when rank(Y) > r.
inline bool normal_cone_rank_member(const QMatrix& g, const QMatrix& y,
                                    std::size_t r, double tol = 1e-8) {
  if (!g.same_shape(y)) {
    throw ShapeMismatch("normal_cone_rank_member: shapes differ");
  }
  const QsvdFactors f = qsvd(y);
  std::size_t s = 0;
  if (!f.sigma.empty() && f.sigma[0] > 0.0) {
    const double cutoff = 1e-10 * f.sigma[0];
    while (s < f.sigma.size() && f.sigma[s] > cutoff) ++s;
  }
  if (s > r) throw InvalidRank("normal_cone_rank_member: rank(Y) exceeds r");

  const double gnorm = fro_norm(g);
  if (gnorm == 0.0) return true;

  if (s > 0) {
    // || U_1^* G ||_F and || G V_1 ||_F against tol * ||G||_F.
    double left = 0.0, right = 0.0;
    for (std::size_t t = 0; t < s; ++t) {
      for (std::size_t j = 0; j < g.cols(); ++j) {
        Quaternion acc;
        for (std::size_t i = 0; i < g.rows(); ++i)
          acc += conj(f.U(i, t)) * g(i, j);
        left += norm_sq(acc);
      }
      for (std::size_t i = 0; i < g.rows(); ++i) {
        Quaternion acc;
        for (std::size_t j = 0; j < g.cols(); ++j)
          acc += g(i, j) * f.V(j, t);
        right += norm_sq(acc);
      }
    }
    if (std::sqrt(left) > tol * gnorm || std::sqrt(right) > tol * gnorm)
      return false;
  }
  if (s < r) {
    const std::size_t budget = std::min(g.rows(), g.cols()) - r;
    if (rank(g, tol) > budget) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// The sparse low-rank color image denoising model
// min 1/2 ||L(Y + Z) - D||_F^2 + lambda ||Z||_0  s.t.  rank(Y) <= r.
// ---------------------------------------------------------------------------

/// A real-linear operator on Q^{m x n} given as an (apply, adjoint) pair.
struct LinearOp {
  std::function<QMatrix(const QMatrix&)> apply;
  std::function<QMatrix(const QMatrix&)> adjoint;

  static LinearOp identity() {
    auto id = [](const QMatrix& a) { return a; };
    return {id, id};
  }

  static LinearOp scaling(double c) {
    auto f = [c](const QMatrix& a) { return a * c; };
    return {f, f};
  }

  /// Projection onto the observed entries (self-adjoint, idempotent).
  static LinearOp entry_mask(EntryMask mask) {
    auto f = [mask](const QMatrix& a) { return mask.project(a); };
    return {f, f};
  }

  /// Checks <L(Y), W> = <Y, L*(W)> in the R-product sense on seeded random
  /// probes; throws on a mismatch.
  void self_test(std::size_t rows, std::size_t cols,
                 std::uint64_t seed = 0x51cd) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
      QMatrix y(rows, cols), w(rows, cols);
      for (int c = 0; c < 4; ++c) {
        for (double& v : y.component(c).data()) v = dist(rng);
        for (double& v : w.component(c).data()) v = dist(rng);
      }
      const double lhs = r_product(apply(y), w);
      const double rhs = r_product(y, adjoint(w));
      const double scale = 1.0 + std::abs(lhs) + std::abs(rhs);
      if (std::abs(lhs - rhs) > 1e-8 * scale) {
        throw Error("linear operator fails its adjoint identity");
      }
    }
  }
};

struct ScidProblem {
  QMatrix d;
  LinearOp op;
  double lambda = 0.0;
  std::size_t max_rank = 0;

  ScidProblem(QMatrix data, LinearOp l, double lambda_, std::size_t r)
      : d(std::move(data)), op(std::move(l)), lambda(lambda_), max_rank(r) {
    if (max_rank < 1 || max_rank > std::min(d.rows(), d.cols())) {
      throw InvalidRank("scid: rank bound outside [1, min(m, n)]");
    }
    if (lambda <= 0.0) throw Error("scid: lambda must be positive");
    op.self_test(d.rows(), d.cols());
  }

  double objective(const QMatrix& y, const QMatrix& z) const {
    return 0.5 * fro_norm_sq(op.apply(y + z) - d) +
           lambda * static_cast<double>(norm_l0(z));
  }
};

/// Gradient of the smooth part h = 1/2 ||L(Y+Z) - D||^2: both blocks equal
/// L^*(L(Y+Z) - D).
inline std::pair<QMatrix, QMatrix> scid_grad_h(const ScidProblem& p,
                                               const QMatrix& y,
                                               const QMatrix& z) {
  const QMatrix g = p.op.adjoint(p.op.apply(y + z) - p.d);
  return {g, g};
}

/// Fixed-point residuals of the projected/proximal gradient map with step
/// beta: res_y is the gap to the rank projection, res_z the distance from Z
/// to the set-valued prox output (ties admit either element).
inline std::pair<double, double> beta_stationarity_residual(
    const ScidProblem& p, const QMatrix& y, const QMatrix& z, double beta) {
  if (beta <= 0.0) throw Error("beta_stationarity_residual: beta must be > 0");
  const auto [gy, gz] = scid_grad_h(p, y, z);
  const double res_y =
      fro_norm(y - truncate_rank(y - beta * gy, p.max_rank));

  const QMatrix v = z - beta * gz;
  const double threshold = std::sqrt(2.0 * beta * p.lambda);
  const double tie_tol = 1e-9 * (1.0 + threshold);
  double gap_sq = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (std::size_t j = 0; j < z.cols(); ++j) {
      const Quaternion vij = v(i, j);
      const Quaternion zij = z(i, j);
      const double vmod = modulus(vij);
      double gap;
      if (std::abs(vmod - threshold) <= tie_tol) {
        gap = std::min(modulus(zij), modulus(zij - vij));
      } else if (vmod > threshold) {
        gap = modulus(zij - vij);
      } else {
        gap = modulus(zij);
      }
      gap_sq += gap * gap;
    }
  }
  return {res_y, std::sqrt(gap_sq)};
}

struct ScidStationarity {
  bool stationary = false;
  bool rank_cone_ok = false;
  bool support_ok = false;
  double grad_norm = 0.0;
};

/// Stationarity in the generalized-subdifferential sense: grad_Y h in the
/// normal cone of the rank ball at Y, grad_Z h vanishing on the support of Z.
/// Gradients below tol at the problem's data scale count as vanished; a
/// purely relative cone test on a noise-level gradient would reject points
/// that are stationary to within working precision.
inline ScidStationarity scid_stationarity(const ScidProblem& p,
                                          const QMatrix& y, const QMatrix& z,
                                          double tol = 1e-7) {
  const auto [gy, gz] = scid_grad_h(p, y, z);
  ScidStationarity out;
  out.grad_norm = std::sqrt(fro_norm_sq(gy) + fro_norm_sq(gz));
  const double data_scale = 1.0 + fro_norm(p.op.adjoint(p.d));
  out.rank_cone_ok = fro_norm(gy) <= tol * data_scale ||
                     normal_cone_rank_member(gy, y, p.max_rank, tol);
  out.support_ok = l0_subdiff_member(gz, z, tol * data_scale);
  out.stationary = out.rank_cone_ok && out.support_ok;
  return out;
}

/// The data-fit constraints W_Omega = D_Omega recast as real equalities, one
/// per observed entry and component plane, each with its analytic coordinate
/// gradient. Together with the prototype objective this is the general
/// constrained form of the low-rank decomposition problem.
inline ConstrainedProblem make_lrqd_equality_problem(const QMatrix& d,
                                                     const EntryMask& omega,
                                                     std::size_t r) {
  ConstrainedProblem p;
  p.objective = make_prototype_objective(d.rows(), d.cols(), r);
  for (const auto& [i, j] : omega.pairs()) {
    for (int c = 0; c < 4; ++c) {
      RealFn h;
      h.signature = p.objective.signature;
      h.smoothness = Smoothness::strong;
      const double target = d.component(c)(i, j);
      const std::size_t ii = i, jj = j;
      h.value = [ii, jj, c, target](const MatTuple& x) {
        return x[0].component(c)(ii, jj) - target;
      };
      h.grad = [ii, jj, c](const MatTuple& x) {
        MatTuple g = MatTuple::zeros(x.shape());
        g[0].component(c)(ii, jj) = 1.0;
        return g;
      };
      p.equalities.push_back(std::move(h));
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Sampled second-order scans at a candidate stationary point.
// ---------------------------------------------------------------------------

struct SecondOrderScan {
  double min_form_all = 0.0;       // over random directions in the full space
  double min_form_critical = 0.0;  // directions projected onto the critical
                                   // cone's subspace (gradient-orthogonal)
};

/// Samples the half quadratic form of the objective over random directions,
/// both unrestricted and projected orthogonal to the active constraint (and
/// objective) gradients. Forms are normalized by ||D||_F^2.
inline SecondOrderScan second_order_scan(const ConstrainedProblem& p,
                                         const MatTuple& x,
                                         std::size_t trials = 100,
                                         std::uint64_t seed = 0) {
  std::vector<MatTuple> span;
  span.push_back(gradient(p.objective, x));
  for (const RealFn& h : p.equalities) span.push_back(gradient(h, x));
  for (const RealFn& g : p.inequalities) {
    if (g.value(x) >= -1e-8 * (1.0 + std::abs(g.value(x)))) {
      span.push_back(gradient(g, x));
    }
  }
  // Orthonormal basis of the span in the R-product geometry.
  std::vector<MatTuple> basis;
  for (MatTuple v : span) {
    for (const MatTuple& b : basis) v -= b * r_product(b, v);
    const double n = fro_norm(v);
    if (n > 1e-12) basis.push_back(v * (1.0 / n));
  }

  std::mt19937_64 rng(seed);
  SecondOrderScan scan;
  bool first_all = true, first_crit = true;
  for (std::size_t t = 0; t < trials; ++t) {
    const MatTuple d =
        detail::random_gaussian_tuple(p.objective.signature, rng, 1.0);
    const double q_all =
        hessian_quadratic_form(p.objective, x, d) / fro_norm_sq(d);
    if (first_all || q_all < scan.min_form_all) {
      scan.min_form_all = q_all;
      first_all = false;
    }
    MatTuple dc = d;
    for (const MatTuple& b : basis) dc -= b * r_product(b, dc);
    const double nc = fro_norm_sq(dc);
    if (nc > 1e-16) {
      const double q_crit = hessian_quadratic_form(p.objective, x, dc) / nc;
      if (first_crit || q_crit < scan.min_form_critical) {
        scan.min_form_critical = q_crit;
        first_crit = false;
      }
    }
  }
  return scan;
}

}  // namespace qmo
