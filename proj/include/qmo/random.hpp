#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qmo/entry_mask.hpp"
#include "qmo/qmatrix.hpp"

namespace qmo {

inline QMatrix random_gaussian(std::size_t rows, std::size_t cols,
                               std::mt19937_64& rng, double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  QMatrix out(rows, cols);
  for (int c = 0; c < 4; ++c)
    for (double& v : out.component(c).data()) v = dist(rng);
  return out;
}

inline QMatrix random_gaussian(std::size_t rows, std::size_t cols,
                               std::uint64_t seed, double stddev = 1.0) {
  std::mt19937_64 rng(seed);
  return random_gaussian(rows, cols, rng, stddev);
}

/// Product of Gaussian factors: a generic rank-r quaternion matrix.
inline QMatrix random_low_rank(std::size_t rows, std::size_t cols,
                               std::size_t r, std::mt19937_64& rng,
                               double stddev = 1.0) {
  return matmul(random_gaussian(rows, r, rng, stddev),
                random_gaussian(r, cols, rng, stddev));
}

/// Mask observing roughly `fraction` of the entries (each drawn i.i.d.).
inline EntryMask random_mask(std::size_t rows, std::size_t cols,
                             double fraction, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  EntryMask m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (coin(rng) < fraction) m.set(i, j, true);
  return m;
}

/// A sparse matrix with `count` support entries of modulus ~ magnitude
/// (uniform random unit direction per entry).
inline QMatrix random_sparse(std::size_t rows, std::size_t cols,
                             std::size_t count, double magnitude,
                             std::mt19937_64& rng) {
  QMatrix out(rows, cols);
  std::uniform_int_distribution<std::size_t> ri(0, rows - 1);
  std::uniform_int_distribution<std::size_t> rj(0, cols - 1);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::size_t placed = 0;
  while (placed < count) {
    const std::size_t i = ri(rng), j = rj(rng);
    if (modulus(out(i, j)) > 0.0) continue;
    Quaternion q{dist(rng), dist(rng), dist(rng), dist(rng)};
    const double mod = modulus(q);
    if (mod == 0.0) continue;
    out.set(i, j, q * (magnitude / mod));
    ++placed;
  }
  return out;
}

struct PlantedScid {
  QMatrix y_true, z_true, d;
};

/// Image-shaped planted instance: a pure quaternion Y_true of quaternion
/// rank exactly r, channels in [0, 1], built from shared nonnegative factors
/// U diag(w_c) V^T with per-channel weights, plus a sparse pure quaternion
/// Z_true with entry modulus noise_mag.
inline PlantedScid make_planted_image(std::size_t rows, std::size_t cols,
                                      std::size_t r, double sparsity,
                                      double noise_mag, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.2, 1.0);

  RealMatrix u(rows, r), v(cols, r);
  for (double& x : u.data()) x = unit(rng);
  for (double& x : v.data()) x = unit(rng);
  RealMatrix w(3, r);
  for (double& x : w.data()) x = weight(rng);

  PlantedScid out{QMatrix(rows, cols), QMatrix(rows, cols),
                  QMatrix(rows, cols)};
  double max_channel = 0.0;
  for (int c = 0; c < 3; ++c) {
    RealMatrix& plane = out.y_true.component(c + 1);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < r; ++t) s += u(i, t) * w(c, t) * v(j, t);
        plane(i, j) = s;
        max_channel = std::max(max_channel, s);
      }
  }
  if (max_channel > 0.0) out.y_true *= 0.85 / max_channel;

  const auto count = static_cast<std::size_t>(
      sparsity * static_cast<double>(rows * cols) + 0.5);
  if (count > 0) {
    std::uniform_int_distribution<std::size_t> ri(0, rows - 1);
    std::uniform_int_distribution<std::size_t> rj(0, cols - 1);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::size_t placed = 0;
    while (placed < count) {
      const std::size_t i = ri(rng), j = rj(rng);
      if (modulus(out.z_true(i, j)) > 0.0) continue;
      Quaternion q{0.0, dist(rng), dist(rng), dist(rng)};
      const double mod = modulus(q);
      if (mod == 0.0) continue;
      out.z_true.set(i, j, q * (noise_mag / mod));
      ++placed;
    }
  }
  out.d = out.y_true + out.z_true;
  return out;
}

/// Low-rank plus sparse planted instance: D = Y_true + Z_true with Y_true a
/// rank-r Gaussian factor product and Z_true sparse with entries of modulus
/// noise_mag.
inline PlantedScid make_planted_scid(std::size_t rows, std::size_t cols,
                                     std::size_t r, double sparsity,
                                     double noise_mag, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PlantedScid out{random_low_rank(rows, cols, r, rng), QMatrix(rows, cols),
                  QMatrix(rows, cols)};
  const auto count = static_cast<std::size_t>(
      sparsity * static_cast<double>(rows * cols) + 0.5);
  if (count > 0) {
    out.z_true = random_sparse(rows, cols, count, noise_mag, rng);
  }
  out.d = out.y_true + out.z_true;
  return out;
}

}  // namespace qmo
