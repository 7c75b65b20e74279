#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "qmo/entry_mask.hpp"
#include "qmo/errors.hpp"
#include "qmo/optimality.hpp"
#include "qmo/qmatrix.hpp"
#include "qmo/qsvd.hpp"

namespace qmo {

struct SolverConfig {
  int max_iters = 5000;
  double tol = 1e-9;
  /// Fixed step size; when absent the step is 0.4 / L with L = 2 ||L*L||
  /// estimated by power iteration.
  std::optional<double> beta;
  std::uint64_t seed = 0;  // synthetic-data consumers only; iterations are
                           // deterministic regardless
  int trace_cadence = 1;
};

struct TraceRecord {
  int iter = 0;
  double obj = 0.0;
  double res_y = 0.0;
  double res_z = 0.0;
  int rank_y = 0;
  int l0_z = 0;
  double secs = 0.0;
};

using Trace = std::vector<TraceRecord>;

enum class SolveStatus { converged, stalled };

/// Spectral norm of L^* L as a real-linear operator on Q^{m x n}, by power
/// iteration in the R-product geometry.
inline double estimate_operator_norm(const LinearOp& op, std::size_t rows,
                                     std::size_t cols, int max_iters = 50,
                                     double tol = 1e-10) {
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);  // fixed probe; keeps runs
                                               // deterministic
  std::normal_distribution<double> dist(0.0, 1.0);
  QMatrix v(rows, cols);
  for (int c = 0; c < 4; ++c)
    for (double& x : v.component(c).data()) x = dist(rng);
  double vnorm = fro_norm(v);
  if (vnorm == 0.0) return 0.0;
  v *= 1.0 / vnorm;

  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const QMatrix w = op.adjoint(op.apply(v));
    const double next = r_product(v, w);  // Rayleigh quotient, M is PSD
    const double wnorm = fro_norm(w);
    if (wnorm == 0.0) return 0.0;
    v = w * (1.0 / wnorm);
    if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

namespace solver_detail {

inline double elapsed_secs(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace solver_detail

struct LrqdResult {
  QMatrix w, y, z;
  Trace trace;
  SolveStatus status = SolveStatus::converged;
};

/// Alternating exact block minimization for
///   min ||YZ - W||_F^2  s.t.  W_Omega = D_Omega,
/// sweeping W -> Y -> Z. W is the data on Omega and YZ elsewhere; Y and Z
/// are least-squares updates through QSVD pseudoinverses. Stops when the
/// stationarity residuals drop below cfg.tol.
inline LrqdResult lrqd_solve(const QMatrix& d, const EntryMask& omega,
                             std::size_t r, const SolverConfig& cfg = {}) {
  const std::size_t m = d.rows(), n = d.cols();
  if (r < 1 || r > std::min(m, n)) {
    throw InvalidRank("lrqd: rank bound outside [1, min(m, n)]");
  }
  const auto start = std::chrono::steady_clock::now();

  // Warm start from the observed data, rescaled by the sampling fraction so
  // the leading singular triplets approximate those of the full matrix.
  QMatrix w = omega.project(d);
  const std::size_t observed = omega.count();
  QMatrix w_init = w;
  if (observed > 0 && observed < m * n) {
    w_init *= static_cast<double>(m * n) / static_cast<double>(observed);
  }
  const QsvdFactors f0 = qsvd(w_init);
  QMatrix y(m, r), z(r, n);
  for (std::size_t t = 0; t < r; ++t) {
    const double s = std::sqrt(std::max(f0.sigma[t], 0.0));
    for (std::size_t i = 0; i < m; ++i) y.set(i, t, f0.U(i, t) * s);
    for (std::size_t j = 0; j < n; ++j) z.set(t, j, conj(f0.V(j, t)) * s);
  }

  LrqdResult out;
  out.status = SolveStatus::stalled;
  const double scale = 1.0 + fro_norm(d);
  const int cadence = std::max(cfg.trace_cadence, 1);

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    w = omega.overwrite_observed(matmul(y, z), d);
    y = matmul(w, pseudo_inverse(z));
    z = matmul(pseudo_inverse(y), w);

    const double obj = 0.5 * fro_norm_sq(matmul(y, z) - w);
    if (!std::isfinite(obj)) {
      throw NonFinite("lrqd: objective diverged");
    }
    const PrototypeResiduals res = prototype_stationarity(w, y, z, d, omega);
    const bool done = res.max() <= cfg.tol * scale;
    if (iter % cadence == 0 || done || iter == cfg.max_iters) {
      out.trace.push_back({iter, obj, res.left, res.right,
                           static_cast<int>(rank(y)),
                           static_cast<int>(norm_l0(z)),
                           solver_detail::elapsed_secs(start)});
    }
    if (done) {
      out.status = SolveStatus::converged;
      break;
    }
  }
  out.w = std::move(w);
  out.y = std::move(y);
  out.z = std::move(z);
  return out;
}

struct ScidResult {
  QMatrix y, z;
  Trace trace;
  SolveStatus status = SolveStatus::converged;
  double beta = 0.0;
  double op_norm = 0.0;  // estimated ||L*L||
};

/// Proximal alternating descent on h(Y, Z) + lambda ||Z||_0 + delta_{rank<=r}:
///   Y <- Pi_rank(Y - beta grad_Y h),  Z <- prox_{beta lambda l0}(Z - beta grad_Z h),
/// with the gradient refreshed between the two half steps. The default step
/// is 0.4 / (2 ||L*L||), inside the descent regime for either reading of the
/// Lipschitz constant. Stops when the beta-stationarity residuals drop below
/// cfg.tol; a residual plateau at max_iters returns the best iterate with a
/// stalled status instead of throwing.
inline ScidResult scid_solve(const ScidProblem& p,
                             const SolverConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  ScidResult out;
  out.op_norm = estimate_operator_norm(p.op, p.d.rows(), p.d.cols());
  const double lipschitz = 2.0 * out.op_norm;
  if (cfg.beta) {
    out.beta = *cfg.beta;
    if (out.beta <= 0.0 || (lipschitz > 0.0 && out.beta >= 1.0 / lipschitz)) {
      throw Error("scid: fixed step must lie in (0, 1/L)");
    }
  } else {
    out.beta = lipschitz > 0.0 ? 0.4 / lipschitz : 0.4;
  }
  const double beta = out.beta;

  QMatrix y = truncate_rank(p.op.adjoint(p.d), p.max_rank);
  QMatrix z(p.d.rows(), p.d.cols());
  const double scale = 1.0 + fro_norm(p.d);
  const int cadence = std::max(cfg.trace_cadence, 1);

  out.status = SolveStatus::stalled;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    QMatrix gy = p.op.adjoint(p.op.apply(y + z) - p.d);
    y = truncate_rank(y - beta * gy, p.max_rank);
    const QMatrix gz = p.op.adjoint(p.op.apply(y + z) - p.d);
    z = prox_l0(z - beta * gz, beta * p.lambda);

    const double obj = p.objective(y, z);
    if (!std::isfinite(obj)) throw NonFinite("scid: objective diverged");

    const auto [res_y, res_z] = beta_stationarity_residual(p, y, z, beta);
    const bool done = res_y <= cfg.tol * scale && res_z <= cfg.tol * scale;
    if (iter % cadence == 0 || done || iter == cfg.max_iters) {
      out.trace.push_back({iter, obj, res_y, res_z,
                           static_cast<int>(rank(y)),
                           static_cast<int>(norm_l0(z)),
                           solver_detail::elapsed_secs(start)});
    }
    if (done) {
      out.status = SolveStatus::converged;
      break;
    }
  }
  out.y = std::move(y);
  out.z = std::move(z);
  return out;
}

}  // namespace qmo
