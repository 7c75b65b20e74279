#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "qmo/errors.hpp"
#include "qmo/qmatrix.hpp"

namespace qmo {

/// The observed index set of an m x n matrix (the Omega of the data-fit
/// constraints): a dense boolean grid plus a few projection helpers.
class EntryMask {
 public:
  EntryMask() = default;
  EntryMask(std::size_t rows, std::size_t cols, bool observed = false)
      : rows_(rows), cols_(cols), obs_(rows * cols, observed ? 1 : 0) {}

  static EntryMask full(std::size_t rows, std::size_t cols) {
    return EntryMask(rows, cols, true);
  }
  static EntryMask none(std::size_t rows, std::size_t cols) {
    return EntryMask(rows, cols, false);
  }
  static EntryMask from_pairs(
      std::size_t rows, std::size_t cols,
      const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    EntryMask m(rows, cols);
    for (const auto& [i, j] : pairs) {
      if (i >= rows || j >= cols) {
        throw ShapeMismatch("mask entry outside the matrix");
      }
      m.obs_[i * cols + j] = 1;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool observed(std::size_t i, std::size_t j) const {
    return obs_[i * cols_ + j] != 0;
  }
  void set(std::size_t i, std::size_t j, bool v) {
    obs_[i * cols_ + j] = v ? 1 : 0;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto v : obs_) c += v;
    return c;
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (observed(i, j)) out.emplace_back(i, j);
    return out;
  }

  /// A with unobserved entries zeroed.
  QMatrix project(const QMatrix& a) const {
    require_shape(a);
    QMatrix out = a;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (!observed(i, j)) out.set(i, j, Quaternion::zero());
    return out;
  }

  /// A with observed entries zeroed.
  QMatrix project_complement(const QMatrix& a) const {
    require_shape(a);
    QMatrix out = a;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (observed(i, j)) out.set(i, j, Quaternion::zero());
    return out;
  }

  /// base with observed entries replaced by those of data.
  QMatrix overwrite_observed(const QMatrix& base, const QMatrix& data) const {
    require_shape(base);
    require_shape(data);
    QMatrix out = base;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (observed(i, j)) out.set(i, j, data(i, j));
    return out;
  }

 private:
  void require_shape(const QMatrix& a) const {
    if (a.rows() != rows_ || a.cols() != cols_) {
      throw ShapeMismatch("mask shape differs from matrix shape");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> obs_;
};

}  // namespace qmo
