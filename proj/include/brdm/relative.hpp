#pragma once

// Majorization relative to a prior q. The lift sends q to the uniform
// distribution on an elementary space of alpha points (block i holds alpha*q_i
// points), so relative comparisons become plain majorization there.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "brdm/error.hpp"
#include "brdm/majorization.hpp"
#include "brdm/matrix.hpp"
#include "brdm/scalar.hpp"
#include "brdm/simplex.hpp"

namespace brdm {

struct lift_options {
  /// Denominator bound used when a float prior is rationalized.
  std::int64_t max_denominator = 10000;
  /// Lifts with more elementary points than this are refused.
  std::uint64_t max_alpha = 1000000;
};

/// Block structure of the lift for a fixed prior. Options with zero prior
/// mass are excluded from the elementary space.
struct lift_layout {
  std::uint64_t alpha = 0;
  std::size_t original_size = 0;
  /// Original option index of each retained block.
  std::vector<std::size_t> support;
  /// |A_i| = alpha * q_i for each retained block.
  std::vector<std::uint64_t> block_sizes;
};

template <class T>
struct lifted_dist {
  lift_layout layout;
  /// One value per elementary point, blocks laid out contiguously in support
  /// order.
  std::vector<T> values;
};

namespace detail {

inline big_int lcm_big(const big_int& a, const big_int& b) { return a / boost::multiprecision::gcd(a, b) * b; }

template <class T>
rational exact_prior_entry(const T& q, const lift_options& opts) {
  if constexpr (scalar_traits<T>::exact) {
    (void)opts;
    return q;
  } else {
    return rationalize(q, opts.max_denominator);
  }
}

}  // namespace detail

/// alpha = lcm of the denominators of the (rationalized) prior.
template <class T>
lift_layout make_lift_layout(const basic_dist<T>& q, const lift_options& opts = {}) {
  lift_layout layout;
  layout.original_size = q.size();
  std::vector<rational> exact;
  big_int alpha = 1;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == T(0)) continue;
    rational r = detail::exact_prior_entry(q[i], opts);
    if (r == 0) fail(errc::invalid_argument, "prior entry " + std::to_string(i) + " rationalizes to zero");
    alpha = detail::lcm_big(alpha, denominator(r));
    if (alpha > big_int(opts.max_alpha))
      fail(errc::alpha_too_large, "lift needs more than " + std::to_string(opts.max_alpha) + " elementary points");
    layout.support.push_back(i);
    exact.push_back(std::move(r));
  }
  rational total = 0;
  for (const auto& r : exact) total += r;
  if (total != 1) {
    // Rationalized entries no longer sum to one; rescale onto a common grid.
    for (auto& r : exact) r /= total;
    alpha = 1;
    for (const auto& r : exact) alpha = detail::lcm_big(alpha, denominator(r));
    if (alpha > big_int(opts.max_alpha))
      fail(errc::alpha_too_large, "lift needs more than " + std::to_string(opts.max_alpha) + " elementary points");
  }
  layout.alpha = alpha.convert_to<std::uint64_t>();
  for (const auto& r : exact) layout.block_sizes.push_back(big_int(r * rational(alpha)).convert_to<std::uint64_t>());
  return layout;
}

template <class T>
void require_absolutely_continuous(const basic_dist<T>& p, const basic_dist<T>& q) {
  if (p.size() != q.size()) fail(errc::length_mismatch, "distribution and prior differ in length");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (q[i] == T(0) && p[i] != T(0))
      fail(errc::not_absolutely_continuous, "option " + std::to_string(i) + " has mass but zero prior");
}

template <class T>
lifted_dist<T> lift(const basic_dist<T>& p, const lift_layout& layout) {
  if (p.size() != layout.original_size) fail(errc::length_mismatch, "distribution does not match the lift layout");
  std::vector<bool> kept(p.size(), false);
  for (auto i : layout.support) kept[i] = true;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!kept[i] && p[i] != T(0))
      fail(errc::not_absolutely_continuous, "option " + std::to_string(i) + " has mass but zero prior");
  lifted_dist<T> out{layout, {}};
  out.values.reserve(layout.alpha);
  for (std::size_t b = 0; b < layout.support.size(); ++b) {
    // P(ω) = p_i / |A_i| = (1/alpha) p_i / q_i.
    const T value = p[layout.support[b]] / T(static_cast<long>(layout.block_sizes[b]));
    out.values.insert(out.values.end(), layout.block_sizes[b], value);
  }
  return out;
}

template <class T>
lifted_dist<T> lift(const basic_dist<T>& p, const basic_dist<T>& q, const lift_options& opts = {}) {
  require_absolutely_continuous(p, q);
  return lift(p, make_lift_layout(q, opts));
}

/// Left inverse of the lift: block masses, zeros at excluded options.
template <class T>
basic_dist<T> unlift(const lifted_dist<T>& lifted, const T& tol = scalar_traits<T>::default_tolerance()) {
  const auto& layout = lifted.layout;
  if (lifted.values.size() != layout.alpha) fail(errc::length_mismatch, "lifted vector does not have alpha entries");
  std::vector<T> w(layout.original_size, T(0));
  std::size_t offset = 0;
  for (std::size_t b = 0; b < layout.support.size(); ++b) {
    const std::size_t size = layout.block_sizes[b];
    const T& first = lifted.values[offset];
    T mass(0);
    for (std::size_t k = 0; k < size; ++k) {
      if (!near(lifted.values[offset + k], first, tol))
        fail(errc::not_block_constant, "lifted values vary inside block " + std::to_string(b));
      mass += lifted.values[offset + k];
    }
    w[layout.support[b]] = mass;
    offset += size;
  }
  return basic_dist<T>::validate(std::move(w));
}

namespace detail {

/// Options of the support ordered by decreasing p_i/q_i; ties by decreasing
/// q_i, then increasing index.
template <class T>
std::vector<std::size_t> ratio_order(const basic_dist<T>& p, const basic_dist<T>& q) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > T(0)) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    // p_a/q_a > p_b/q_b without dividing.
    const T lhs = p[a] * q[b], rhs = p[b] * q[a];
    if (lhs != rhs) return lhs > rhs;
    return q[a] > q[b];
  });
  return idx;
}

/// The relative Lorenz curve of p: partial sums of the sorted lift, as a
/// piecewise linear function of the fraction t = k/alpha of elementary points.
template <class T>
struct relative_lorenz {
  std::vector<T> q_cum;  // breakpoints, q_cum[0] = 0
  std::vector<T> p_cum;
  std::vector<T> q_sorted;
  std::vector<T> p_sorted;

  relative_lorenz(const basic_dist<T>& p, const basic_dist<T>& q) {
    q_cum.push_back(T(0));
    p_cum.push_back(T(0));
    for (auto i : ratio_order(p, q)) {
      q_sorted.push_back(q[i]);
      p_sorted.push_back(p[i]);
      q_cum.push_back(q_cum.back() + q[i]);
      p_cum.push_back(p_cum.back() + p[i]);
    }
  }

  /// sum_{i<l} p_i + a_q(t, l) p_l with a_q = (t - sum_{i<l} q_i) / q_l, where
  /// l is the block containing t.
  T operator()(const T& t) const {
    const std::size_t blocks = q_sorted.size();
    std::size_t l = static_cast<std::size_t>(std::upper_bound(q_cum.begin(), q_cum.end(), t) - q_cum.begin());
    if (l == 0) return T(0);
    if (l > blocks) return p_cum.back();
    --l;
    return p_cum[l] + (t - q_cum[l]) / q_sorted[l] * p_sorted[l];
  }
};

template <class T>
bool lorenz_below(const relative_lorenz<T>& lower, const relative_lorenz<T>& upper, const T& tol) {
  // Both curves are linear between consecutive breakpoints of either one.
  std::vector<T> ts = lower.q_cum;
  ts.insert(ts.end(), upper.q_cum.begin(), upper.q_cum.end());
  std::sort(ts.begin(), ts.end());
  for (const auto& t : ts)
    if (!leq(lower(t), upper(t), tol)) return false;
  return true;
}

}  // namespace detail

/// Relative comparison of p against p' with respect to q, decided by the
/// partial-sum test on ratio-sorted vectors. Exact in rational mode; float
/// priors are used as given (no rationalization is needed for the test).
template <class T>
relation rel_majorizes(const basic_dist<T>& p, const basic_dist<T>& p_prime, const basic_dist<T>& q,
                       const T& tol = scalar_traits<T>::default_tolerance()) {
  require_absolutely_continuous(p, q);
  require_absolutely_continuous(p_prime, q);
  const detail::relative_lorenz<T> lp(p, q), lpp(p_prime, q);
  return combine_directions(detail::lorenz_below(lpp, lp, tol), detail::lorenz_below(lp, lpp, tol));
}

/// Definitional route: plain majorization of the two lifts.
template <class T>
relation rel_majorizes_lifted(const basic_dist<T>& p, const basic_dist<T>& p_prime, const basic_dist<T>& q,
                              const lift_options& opts = {}, const T& tol = scalar_traits<T>::default_tolerance()) {
  require_absolutely_continuous(p, q);
  require_absolutely_continuous(p_prime, q);
  const auto layout = make_lift_layout(q, opts);
  const auto a = lift(p, layout), b = lift(p_prime, layout);
  const std::span<const T> av(a.values), bv(b.values);
  return combine_directions(is_majorized_by(bv, av, tol), is_majorized_by(av, bv, tol));
}

/// Moves `amount` from option n to option m where p_m/q_m <= p_n/q_n.
template <class T>
struct relative_transfer {
  std::size_t m;
  std::size_t n;
  T amount;
};

/// Largest admissible amount: (p_n/q_n - p_m/q_m) / (1/q_m + 1/q_n).
template <class T>
T relative_transfer_bound(const basic_dist<T>& p, const basic_dist<T>& q, std::size_t m, std::size_t n) {
  if (q[m] == T(0) || q[n] == T(0)) fail(errc::invalid_transfer, "relative transfers need positive prior mass");
  return (p[n] / q[n] - p[m] / q[m]) / (T(1) / q[m] + T(1) / q[n]);
}

template <class T>
basic_dist<T> apply_relative_transfer(const basic_dist<T>& p, const basic_dist<T>& q, const relative_transfer<T>& t,
                                      const T& tol = scalar_traits<T>::default_tolerance()) {
  require_absolutely_continuous(p, q);
  if (t.m >= p.size() || t.n >= p.size() || t.m == t.n) fail(errc::invalid_transfer, "transfer indices must be distinct and in range");
  if (q[t.m] == T(0) || q[t.n] == T(0)) fail(errc::invalid_transfer, "relative transfers need positive prior mass");
  if (p[t.m] * q[t.n] > p[t.n] * q[t.m]) fail(errc::invalid_transfer, "ratio p_m/q_m exceeds p_n/q_n");
  if (t.amount < T(0)) fail(errc::invalid_transfer, "transfer amount must be non-negative");
  if (!leq(t.amount, relative_transfer_bound(p, q, t.m, t.n), tol)) fail(errc::invalid_transfer, "transfer amount exceeds the admissible bound");
  std::vector<T> w = p.vector();
  w[t.m] += t.amount;
  w[t.n] -= t.amount;
  if constexpr (!scalar_traits<T>::exact) {
    if (w[t.n] < 0) w[t.n] = 0;
  }
  return basic_dist<T>::validate(std::move(w));
}

/// Row-stochastic matrix with q A = q and p A = p'. Built by lifting both
/// distributions, synthesizing a T-transform chain on the elementary space and
/// conjugating its product B with the explicit lift matrices:
/// A = L B R with L_{i,ω} = 1/|A_i| for ω ∈ A_i and R_{ω,i} = [ω ∈ A_i].
/// The α×α product B is never materialized: the chain acts on the columns of L.
template <class T>
basic_matrix<T> witness_q_stochastic(const basic_dist<T>& p, const basic_dist<T>& p_prime, const basic_dist<T>& q,
                                     const lift_options& opts = {},
                                     const T& tol = scalar_traits<T>::default_tolerance()) {
  const auto rel = rel_majorizes(p, p_prime, q, tol);
  if (rel != relation::less && rel != relation::equivalent)
    fail(errc::not_rel_majorized, std::string("p' is not majorized by p relative to q (relation ") + to_string(rel) + ")");
  const auto layout = make_lift_layout(q, opts);
  const auto lp = lift(p, layout), lpp = lift(p_prime, layout);
  const auto chain = synthesize_transform_chain(basic_dist<T>::validate(lp.values, T(1)),
                                                basic_dist<T>::validate(lpp.values, T(1)), tol);

  const std::size_t n = p.size();
  const std::size_t blocks = layout.support.size();
  const std::size_t alpha = layout.alpha;
  std::vector<std::size_t> block_of(alpha);
  {
    std::size_t offset = 0;
    for (std::size_t b = 0; b < blocks; ++b)
      for (std::uint64_t k = 0; k < layout.block_sizes[b]; ++k) block_of[offset++] = b;
  }
  // M = L restricted to retained rows, then M <- M T for every transform.
  basic_matrix<T> m(blocks, alpha);
  for (std::size_t w = 0; w < alpha; ++w) m(block_of[w], w) = T(1) / T(static_cast<long>(layout.block_sizes[block_of[w]]));
  for (const auto& t : chain) {
    for (std::size_t r = 0; r < blocks; ++r) {
      const T cm = m(r, t.m), cn = m(r, t.n);
      if (cm == T(0) && cn == T(0)) continue;
      m(r, t.m) = (T(1) - t.lambda) * cm + t.lambda * cn;
      m(r, t.n) = t.lambda * cm + (T(1) - t.lambda) * cn;
    }
  }
  basic_matrix<T> a(n, n);
  for (std::size_t r = 0; r < blocks; ++r)
    for (std::size_t w = 0; w < alpha; ++w) a(layout.support[r], layout.support[block_of[w]]) += m(r, w);
  // Excluded options map to themselves; they carry no mass under p or q.
  std::vector<bool> kept(n, false);
  for (auto i : layout.support) kept[i] = true;
  for (std::size_t i = 0; i < n; ++i)
    if (!kept[i]) a(i, i) = T(1);
  return a;
}

/// Checks A e = e, q A = q, p A = p' and non-negativity.
template <class T>
bool verify_q_stochastic(const basic_matrix<T>& a, const basic_dist<T>& p, const basic_dist<T>& p_prime,
                         const basic_dist<T>& q, const T& tol = scalar_traits<T>::default_tolerance()) {
  if (a.rows() != p.size() || a.cols() != p.size() || !all_nonnegative(a, tol)) return false;
  for (const auto& s : row_sums(a))
    if (!near(s, T(1), tol)) return false;
  const auto qa = left_multiply(q.weights(), a);
  const auto pa = left_multiply(p.weights(), a);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!near(qa[i], q[i], tol) || !near(pa[i], p_prime[i], tol)) return false;
  return true;
}

}  // namespace brdm
