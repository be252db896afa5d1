#pragma once

// Probability vectors on a finite option set and the bookkeeping shared by
// every other module: decreasing rearrangements, expectations and
// coarse-graining along a partition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brdm/error.hpp"
#include "brdm/scalar.hpp"

namespace brdm {

/// A validated probability vector. Float instances are normalized to within
/// the validation tolerance and then rescaled; exact instances sum to 1.
template <class T>
class basic_dist {
 public:
  using value_type = T;

  /// Checks non-negativity and normalization. Float weights within tol of a
  /// unit sum are rescaled so the stored vector sums to 1 up to rounding.
  static basic_dist validate(std::vector<T> weights, const T& tol = scalar_traits<T>::default_tolerance()) {
    if (weights.empty()) fail(errc::empty_input, "a distribution needs at least one weight");
    T sum(0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if constexpr (!scalar_traits<T>::exact) {
        if (!std::isfinite(weights[i])) fail(errc::invalid_argument, "weight " + std::to_string(i) + " is not finite");
      }
      if (weights[i] < T(0)) fail(errc::negative_weight, "weight " + std::to_string(i) + " is negative");
      sum += weights[i];
    }
    if (!near(sum, T(1), tol)) fail(errc::not_normalized, "weights sum to " + std::to_string(to_double(sum)));
    if constexpr (!scalar_traits<T>::exact) {
      if (sum != T(1))
        for (auto& w : weights) w /= sum;
    }
    return basic_dist(std::move(weights));
  }

  /// Divides by the total; for internally produced weight vectors.
  static basic_dist normalize(std::vector<T> weights) {
    if (weights.empty()) fail(errc::empty_input, "a distribution needs at least one weight");
    T sum(0);
    for (const auto& w : weights) {
      if (w < T(0)) fail(errc::negative_weight, "cannot normalize negative weights");
      sum += w;
    }
    if (!(sum > T(0))) fail(errc::not_normalized, "cannot normalize an all-zero vector");
    for (auto& w : weights) w /= sum;
    return basic_dist(std::move(weights));
  }

  static basic_dist uniform(std::size_t n) {
    if (n == 0) fail(errc::empty_input, "uniform distribution over zero options");
    return basic_dist(std::vector<T>(n, T(1) / T(static_cast<long>(n))));
  }

  static basic_dist dirac(std::size_t n, std::size_t k) {
    if (k >= n) fail(errc::invalid_argument, "Dirac index out of range");
    std::vector<T> w(n, T(0));
    w[k] = T(1);
    return basic_dist(std::move(w));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  const T& operator[](std::size_t i) const { return weights_[i]; }
  std::span<const T> weights() const noexcept { return weights_; }
  const std::vector<T>& vector() const noexcept { return weights_; }

  auto begin() const noexcept { return weights_.begin(); }
  auto end() const noexcept { return weights_.end(); }

  /// Weights reordered so that element k is the old element order[k].
  basic_dist permuted(std::span<const std::size_t> order) const {
    if (order.size() != size()) fail(errc::length_mismatch, "permutation has the wrong length");
    std::vector<T> w;
    w.reserve(size());
    for (auto i : order) w.push_back(weights_.at(i));
    return basic_dist(std::move(w));
  }

  bool operator==(const basic_dist&) const = default;

 private:
  explicit basic_dist(std::vector<T> weights) : weights_(std::move(weights)) {}

  std::vector<T> weights_;
};

using dist = basic_dist<double>;
using exact_dist = basic_dist<rational>;

inline exact_dist to_exact(const dist& p, std::int64_t max_denominator = 10000) {
  std::vector<rational> w;
  w.reserve(p.size());
  rational total = 0;
  for (double x : p) {
    w.push_back(rationalize(x, max_denominator));
    total += w.back();
  }
  if (total != 1)
    for (auto& r : w) r /= total;
  return exact_dist::validate(std::move(w));
}

inline dist to_float(const exact_dist& p) {
  std::vector<double> w;
  w.reserve(p.size());
  for (const auto& x : p) w.push_back(to_double(x));
  return dist::validate(std::move(w));
}

template <class T>
struct rearrangement {
  basic_dist<T> sorted;
  /// perm[k] is the original index of the k-th largest weight.
  std::vector<std::size_t> perm;
};

/// Sort order of indices by decreasing value; ties keep ascending index.
template <class T>
std::vector<std::size_t> decreasing_order(std::span<const T> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return idx;
}

template <class T>
rearrangement<T> decreasing_rearrangement(const basic_dist<T>& p) {
  auto perm = decreasing_order(p.weights());
  auto sorted = p.permuted(perm);
  return {std::move(sorted), std::move(perm)};
}

template <class T>
T expectation(const basic_dist<T>& p, std::span<const T> u) {
  if (p.size() != u.size()) fail(errc::length_mismatch, "distribution and utility differ in length");
  T acc(0);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != T(0)) acc += p[i] * u[i];
  return acc;
}

/// Disjoint non-empty blocks covering {0..n-1}.
class partition {
 public:
  static partition make(std::vector<std::vector<std::size_t>> blocks, std::size_t n) {
    std::vector<bool> seen(n, false);
    for (const auto& block : blocks) {
      if (block.empty()) fail(errc::invalid_partition, "empty block");
      for (auto i : block) {
        if (i >= n) fail(errc::invalid_partition, "block index out of range");
        if (seen[i]) fail(errc::invalid_partition, "blocks overlap at index " + std::to_string(i));
        seen[i] = true;
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      fail(errc::invalid_partition, "blocks do not cover every option");
    return partition(std::move(blocks), n);
  }

  static partition single_block(std::size_t n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return make({std::move(all)}, n);
  }

  std::size_t universe() const noexcept { return n_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const std::vector<std::size_t>& block(std::size_t k) const { return blocks_[k]; }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }

 private:
  partition(std::vector<std::vector<std::size_t>> blocks, std::size_t n) : blocks_(std::move(blocks)), n_(n) {}

  std::vector<std::vector<std::size_t>> blocks_;
  std::size_t n_;
};

template <class T>
struct coarse_grained {
  basic_dist<T> marginal;
  /// Empty optional marks a block of zero marginal mass: its conditional is
  /// undefined.
  std::vector<std::optional<basic_dist<T>>> conditionals;
};

template <class T>
coarse_grained<T> coarse_grain(const basic_dist<T>& p, const partition& part) {
  if (p.size() != part.universe()) fail(errc::length_mismatch, "partition and distribution differ in size");
  std::vector<T> marginal;
  std::vector<std::optional<basic_dist<T>>> conditionals;
  for (const auto& block : part.blocks()) {
    T mass(0);
    for (auto i : block) mass += p[i];
    marginal.push_back(mass);
    if (mass > T(0)) {
      std::vector<T> cond;
      for (auto i : block) cond.push_back(p[i] / mass);
      conditionals.emplace_back(basic_dist<T>::normalize(std::move(cond)));
    } else {
      conditionals.emplace_back(std::nullopt);
    }
  }
  return {basic_dist<T>::normalize(std::move(marginal)), std::move(conditionals)};
}

}  // namespace brdm
