#pragma once

// Majorization: the partial-sum decision procedure, Pigou-Dalton transfers,
// T-transform chains as constructive witnesses and their doubly stochastic
// products.

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "brdm/error.hpp"
#include "brdm/matrix.hpp"
#include "brdm/scalar.hpp"
#include "brdm/simplex.hpp"

namespace brdm {

/// Outcome of comparing p against p'. `less` reads "p' is strictly more
/// uncertain than p" (p' ≺ p and not p ≺ p').
enum class relation { less, greater, equivalent, incomparable };

inline const char* to_string(relation r) {
  switch (r) {
    case relation::less: return "Less";
    case relation::greater: return "Greater";
    case relation::equivalent: return "Equivalent";
    case relation::incomparable: return "Incomparable";
  }
  return "Unknown";
}

inline relation combine_directions(bool second_below_first, bool first_below_second) {
  if (second_below_first && first_below_second) return relation::equivalent;
  if (second_below_first) return relation::less;
  if (first_below_second) return relation::greater;
  return relation::incomparable;
}

namespace detail {

template <class T>
std::vector<T> sorted_partial_sums(std::span<const T> w) {
  auto order = decreasing_order(w);
  std::vector<T> sums;
  sums.reserve(w.size());
  T acc(0);
  for (auto i : order) {
    acc += w[i];
    sums.push_back(acc);
  }
  return sums;
}

template <class T>
bool partial_sums_below(const std::vector<T>& lower, const std::vector<T>& upper, const T& tol) {
  for (std::size_t k = 0; k < lower.size(); ++k)
    if (!leq(lower[k], upper[k], tol)) return false;
  return true;
}

}  // namespace detail

/// True iff a ≺ b: every partial sum of the decreasing rearrangement of a is
/// at most the corresponding partial sum for b.
template <class T>
bool is_majorized_by(std::span<const T> a, std::span<const T> b, const T& tol = scalar_traits<T>::default_tolerance()) {
  if (a.size() != b.size()) fail(errc::length_mismatch, "majorization needs vectors of equal length");
  return detail::partial_sums_below(detail::sorted_partial_sums(a), detail::sorted_partial_sums(b), tol);
}

template <class T>
relation majorizes(const basic_dist<T>& p, const basic_dist<T>& p_prime,
                   const T& tol = scalar_traits<T>::default_tolerance()) {
  if (p.size() != p_prime.size()) fail(errc::length_mismatch, "majorization needs distributions of equal length");
  const auto sp = detail::sorted_partial_sums(p.weights());
  const auto sq = detail::sorted_partial_sums(p_prime.weights());
  return combine_directions(detail::partial_sums_below(sq, sp, tol), detail::partial_sums_below(sp, sq, tol));
}

/// Moves `amount` from the larger entry n to the smaller entry m.
template <class T>
struct pigou_dalton_transfer {
  std::size_t m;
  std::size_t n;
  T amount;
};

template <class T>
basic_dist<T> apply_pigou_dalton(const basic_dist<T>& p, const pigou_dalton_transfer<T>& t) {
  if (t.m >= p.size() || t.n >= p.size() || t.m == t.n) fail(errc::invalid_transfer, "transfer indices must be distinct and in range");
  if (p[t.m] > p[t.n]) fail(errc::invalid_transfer, "transfers must go from the larger entry to the smaller one");
  if (!(t.amount > T(0))) fail(errc::invalid_transfer, "transfer amount must be positive");
  if (T(2) * t.amount > p[t.n] - p[t.m]) fail(errc::invalid_transfer, "transfer amount exceeds half the gap");
  std::vector<T> w = p.vector();
  w[t.m] += t.amount;
  w[t.n] -= t.amount;
  return basic_dist<T>::validate(std::move(w));
}

/// (Tp)_m = (1-λ) p_m + λ p_n, (Tp)_n = λ p_m + (1-λ) p_n. With λ = 1 the
/// transform swaps m and n; such steps are flagged as permutations.
template <class T>
struct t_transform {
  std::size_t m;
  std::size_t n;
  T lambda;
  bool permutation = false;

  bool operator==(const t_transform&) const = default;
};

template <class T>
using transform_chain = std::vector<t_transform<T>>;

template <class T>
void apply_in_place(std::vector<T>& w, const t_transform<T>& t) {
  const T a = w.at(t.m), b = w.at(t.n);
  w[t.m] = (T(1) - t.lambda) * a + t.lambda * b;
  w[t.n] = t.lambda * a + (T(1) - t.lambda) * b;
}

template <class T>
std::vector<T> apply_chain(std::span<const T> p, const transform_chain<T>& chain) {
  std::vector<T> w(p.begin(), p.end());
  for (const auto& t : chain) apply_in_place(w, t);
  return w;
}

/// Builds T-transforms taking p to p' (requires p' ≺ p). Works on the sorted
/// vectors: repeatedly take the last index j where p still exceeds p' and the
/// first later index k where it falls short, and move min(x_j - y_j, y_k - x_k)
/// from j to k. Each step fixes at least one coordinate, so at most N-1
/// transfers are emitted, followed by swaps that undo the sort.
template <class T>
transform_chain<T> synthesize_transform_chain(const basic_dist<T>& p, const basic_dist<T>& p_prime,
                                              const T& tol = scalar_traits<T>::default_tolerance()) {
  const auto rel = majorizes(p, p_prime, tol);
  if (rel != relation::less && rel != relation::equivalent)
    fail(errc::not_majorized, std::string("p' is not majorized by p (relation ") + to_string(rel) + ")");

  const std::size_t n = p.size();
  const auto src = decreasing_rearrangement(p);
  const auto dst = decreasing_rearrangement(p_prime);
  std::vector<T> x = src.sorted.vector();
  const std::vector<T>& y = dst.sorted.vector();
  transform_chain<T> chain;

  for (std::size_t guard = 0; guard < n; ++guard) {
    std::size_t j = n;
    for (std::size_t i = n; i-- > 0;) {
      if (x[i] - y[i] > tol) {
        j = i;
        break;
      }
    }
    if (j == n) break;
    std::size_t k = n;
    for (std::size_t i = j + 1; i < n; ++i) {
      if (y[i] - x[i] > tol) {
        k = i;
        break;
      }
    }
    if (k == n) break;  // float round-off: remaining mismatch is below tolerance
    const T excess = x[j] - y[j];
    const T deficit = y[k] - x[k];
    const T delta = excess < deficit ? excess : deficit;
    const T lambda = delta / (x[j] - x[k]);
    chain.push_back({src.perm[j], src.perm[k], lambda, false});
    x[j] -= delta;
    x[k] += delta;
  }

  // Position src.perm[i] now carries y_i; p' wants y_i at dst.perm[i].
  std::vector<std::size_t> at(n), want(n);
  for (std::size_t i = 0; i < n; ++i) {
    at[src.perm[i]] = i;
    want[dst.perm[i]] = i;
  }
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (at[pos] == want[pos]) continue;
    std::size_t other = pos + 1;
    while (at[other] != want[pos]) ++other;
    if (!near(y[at[pos]], y[at[other]], tol)) chain.push_back({pos, other, T(1), true});
    std::swap(at[pos], at[other]);
  }
  return chain;
}

/// Product of the chain's matrices, so that p A equals the chain applied to p.
template <class T>
basic_matrix<T> witness_doubly_stochastic(const transform_chain<T>& chain, std::size_t n) {
  auto a = basic_matrix<T>::identity(n);
  for (const auto& t : chain) {
    if (t.m >= n || t.n >= n) fail(errc::invalid_argument, "transform index out of range");
    for (std::size_t r = 0; r < n; ++r) {
      const T cm = a(r, t.m), cn = a(r, t.n);
      a(r, t.m) = (T(1) - t.lambda) * cm + t.lambda * cn;
      a(r, t.n) = t.lambda * cm + (T(1) - t.lambda) * cn;
    }
  }
  return a;
}

template <class T>
bool uniform_is_minimal_check(const basic_dist<T>& p, const T& tol = scalar_traits<T>::default_tolerance()) {
  const auto rel = majorizes(p, basic_dist<T>::uniform(p.size()), tol);
  return rel == relation::less || rel == relation::equivalent;
}

/// p' = sum_k theta_k (p permuted by perms[k]), where permuted means
/// (p Π)_j = p[perm[j]].
template <class T>
struct permutation_mixture {
  std::vector<T> coefficients;
  std::vector<std::vector<std::size_t>> permutations;
};

/// The N cyclic shifts with weight 1/N each send any p to the uniform vector.
template <class T>
permutation_mixture<T> cyclic_uniform_witness(std::size_t n) {
  permutation_mixture<T> out;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> perm(n);
    for (std::size_t j = 0; j < n; ++j) perm[j] = (j + s) % n;
    out.permutations.push_back(std::move(perm));
    out.coefficients.push_back(T(1) / T(static_cast<long>(n)));
  }
  return out;
}

template <class T>
bool verify_permutation_mixture(const basic_dist<T>& p, const basic_dist<T>& p_prime, const permutation_mixture<T>& w,
                                const T& tol = scalar_traits<T>::default_tolerance()) {
  if (w.coefficients.size() != w.permutations.size()) return false;
  const std::size_t n = p.size();
  std::vector<T> acc(n, T(0));
  T total(0);
  for (std::size_t k = 0; k < w.coefficients.size(); ++k) {
    const T theta = w.coefficients[k];
    if (theta < T(0)) return false;
    total += theta;
    const auto& perm = w.permutations[k];
    if (perm.size() != n) return false;
    std::vector<bool> seen(n, false);
    for (std::size_t j = 0; j < n; ++j) {
      if (perm[j] >= n || seen[perm[j]]) return false;
      seen[perm[j]] = true;
      acc[j] += theta * p[perm[j]];
    }
  }
  if (!near(total, T(1), tol)) return false;
  for (std::size_t j = 0; j < n; ++j)
    if (!near(acc[j], p_prime[j], tol)) return false;
  return true;
}

}  // namespace brdm
