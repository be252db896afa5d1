#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "brdm/error.hpp"
#include "brdm/scalar.hpp"

namespace brdm {

/// Dense row-major matrix; only what the witness code needs.
template <class T>
class basic_matrix {
 public:
  basic_matrix() = default;
  basic_matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static basic_matrix identity(std::size_t n) {
    basic_matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  bool operator==(const basic_matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Row vector times matrix: (xA)_j = sum_i x_i A_ij.
template <class T>
std::vector<T> left_multiply(std::span<const T> x, const basic_matrix<T>& a) {
  if (x.size() != a.rows()) fail(errc::length_mismatch, "row vector and matrix disagree in size");
  std::vector<T> out(a.cols(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (x[i] == T(0)) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += x[i] * a(i, j);
  }
  return out;
}

template <class T>
std::vector<T> row_sums(const basic_matrix<T>& a) {
  std::vector<T> out(a.rows(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j);
  return out;
}

template <class T>
std::vector<T> column_sums(const basic_matrix<T>& a) {
  std::vector<T> out(a.cols(), T(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j);
  return out;
}

template <class T>
bool all_nonnegative(const basic_matrix<T>& a, const T& tol) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) < T(-tol)) return false;
  return true;
}

/// Non-negative, square, all row and column sums 1.
template <class T>
bool is_doubly_stochastic(const basic_matrix<T>& a, const T& tol = scalar_traits<T>::default_tolerance()) {
  if (a.rows() != a.cols() || !all_nonnegative(a, tol)) return false;
  for (const auto& s : row_sums(a))
    if (!near(s, T(1), tol)) return false;
  for (const auto& s : column_sums(a))
    if (!near(s, T(1), tol)) return false;
  return true;
}

}  // namespace brdm
