#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "brdm/scalar.hpp"
#include "brdm/simplex.hpp"

namespace brdm::testing {

inline rational Q(long num, long den = 1) { return rational(num) / rational(den); }

inline exact_dist exact(std::initializer_list<rational> w) { return exact_dist::validate(std::vector<rational>(w)); }

inline dist floats(std::initializer_list<double> w) { return dist::validate(std::vector<double>(w)); }

/// Exponential spacings: uniform on the simplex.
inline dist random_dist(std::size_t n, std::mt19937_64& rng, double zero_prob = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  for (auto& x : w) x = (zero_prob > 0 && u(rng) < zero_prob) ? 0.0 : e(rng);
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
  return dist::normalize(std::move(w));
}

/// Full-support prior with entries k_i / sum k, k_i in [1, kmax].
inline dist random_rational_prior(std::size_t n, std::mt19937_64& rng, long kmax = 6) {
  std::uniform_int_distribution<long> k(1, kmax);
  std::vector<double> w(n);
  for (auto& x : w) x = static_cast<double>(k(rng));
  return dist::normalize(std::move(w));
}

/// Every probability vector of length n whose entries are multiples of 1/d.
inline std::vector<exact_dist> simplex_grid(std::size_t n, long d) {
  std::vector<exact_dist> out;
  std::vector<long> counts(n, 0);
  auto rec = [&](auto&& self, std::size_t i, long left) -> void {
    if (i + 1 == n) {
      counts[i] = left;
      std::vector<rational> w;
      for (auto c : counts) w.push_back(Q(c, d));
      out.push_back(exact_dist::validate(std::move(w)));
      return;
    }
    for (long c = 0; c <= left; ++c) {
      counts[i] = c;
      self(self, i + 1, left - c);
    }
  };
  rec(rec, 0, d);
  return out;
}

/// All rational probability vectors of length n with denominators up to
/// dmax, deduplicated.
inline std::vector<exact_dist> rational_grid(std::size_t n, long dmax) {
  std::vector<exact_dist> out;
  for (long d = 1; d <= dmax; ++d)
    for (auto& p : simplex_grid(n, d))
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  return out;
}

/// Independent majorization oracle: a ≺ b iff sum (a_i - t)+ <= sum (b_i - t)+
/// for every threshold t; the entries of a and b are enough thresholds.
template <class T>
bool hlp_majorized(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> ts(a);
  ts.insert(ts.end(), b.begin(), b.end());
  for (const auto& t : ts) {
    T sa(0), sb(0);
    for (const auto& x : a)
      if (x > t) sa += x - t;
    for (const auto& x : b)
      if (x > t) sb += x - t;
    if (sa > sb) return false;
  }
  return true;
}

/// Relative version: p' ≺_q p iff sum q_i (p'_i/q_i - t)+ <= sum q_i (p_i/q_i - t)+
/// for all t; the ratios are enough thresholds. Options with q_i = 0 are
/// skipped (both p and p' vanish there).
inline bool hlp_rel_majorized(const exact_dist& pp, const exact_dist& p, const exact_dist& q) {
  std::vector<rational> ts;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0) {
      ts.push_back(p[i] / q[i]);
      ts.push_back(pp[i] / q[i]);
    }
  for (const auto& t : ts) {
    rational sa(0), sb(0);
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i] == 0) continue;
      if (pp[i] / q[i] > t) sa += pp[i] - q[i] * t;
      if (p[i] / q[i] > t) sb += p[i] - q[i] * t;
    }
    if (sa > sb) return false;
  }
  return true;
}

}  // namespace brdm::testing
