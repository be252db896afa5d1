#pragma once

// Single-task bounded-rational decisions with informational (KL) cost:
// Boltzmann posteriors, free energy, constraint inversion by bisection,
// beta paths and two-step decompositions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "brdm/error.hpp"
#include "brdm/simplex.hpp"

namespace brdm {

class utility_vector {
 public:
  utility_vector() = default;
  explicit utility_vector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) fail(errc::empty_input, "utility vector is empty");
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i])) fail(errc::invalid_argument, "utility " + std::to_string(i) + " is not finite");
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

inline constexpr double infinite_beta = std::numeric_limits<double>::infinity();

struct beta_constraint {
  double beta;
};
struct max_cost_constraint {
  double nats;
};
struct min_utility_constraint {
  double value;
};
using resource_constraint = std::variant<beta_constraint, max_cost_constraint, min_utility_constraint>;

/// Bounded-optimal problem: the search space is the whole simplex.
struct bounded_problem {
  utility_vector utility;
  dist prior;
  resource_constraint constraint;
};

struct free_energy_result {
  dist posterior;
  double beta = 0.0;
  /// E_p[U] - KL(p||q)/beta; the beta = 0 and beta = inf limits are E_q[U]
  /// and max U over the prior's support.
  double free_energy = 0.0;
  double expected_utility = 0.0;
  /// KL(p||q) in nats.
  double kl_cost = 0.0;
  /// log Z_beta = log sum q e^{beta U}; zero at beta = 0, unused at inf.
  double log_partition = 0.0;
  /// Set when the result is the beta = inf (fully rational) limit.
  bool rational_limit = false;
};

inline double kl_divergence(const dist& p, const dist& q) {
  if (p.size() != q.size()) fail(errc::length_mismatch, "KL needs distributions of equal length");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) fail(errc::not_absolutely_continuous, "KL is infinite: p has mass where q has none");
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc;
}

inline double nats_to_bits(double nats) { return nats / std::log(2.0); }
inline double bits_to_nats(double bits) { return bits * std::log(2.0); }

namespace detail {

inline void check_problem(std::span<const double> u, const dist& prior) {
  if (u.size() != prior.size()) fail(errc::length_mismatch, "utility and prior differ in length");
}

inline double max_supported(std::span<const double> u, const dist& prior) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i)
    if (prior[i] > 0) best = std::max(best, u[i]);
  return best;
}

}  // namespace detail

/// beta = inf limit: prior restricted to argmax U over its support.
inline free_energy_result rational_posterior(const utility_vector& u, const dist& prior) {
  detail::check_problem(u.values(), prior);
  const double best = detail::max_supported(u.values(), prior);
  std::vector<double> w(prior.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    if (prior[i] > 0 && u[i] == best) w[i] = prior[i];
  free_energy_result r{dist::normalize(std::move(w))};
  r.beta = infinite_beta;
  r.expected_utility = best;
  r.free_energy = best;
  r.kl_cost = kl_divergence(r.posterior, prior);
  r.rational_limit = true;
  return r;
}

/// p_beta(x) = q(x) e^{beta U(x)} / Z_beta, computed with the largest
/// exponent subtracted.
inline free_energy_result boltzmann_posterior(const utility_vector& u, const dist& prior, double beta) {
  detail::check_problem(u.values(), prior);
  if (std::isnan(beta) || beta < 0) fail(errc::invalid_argument, "beta must be non-negative");
  if (std::isinf(beta)) return rational_posterior(u, prior);
  if (beta == 0.0) {
    free_energy_result r{prior};
    r.expected_utility = expectation(prior, u.values());
    r.free_energy = r.expected_utility;
    return r;
  }
  const std::size_t n = u.size();
  std::vector<double> log_w(n, -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (prior[i] == 0.0) continue;
    log_w[i] = std::log(prior[i]) + beta * u[i];
    top = std::max(top, log_w[i]);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (prior[i] > 0) z += std::exp(log_w[i] - top);
  const double log_z = top + std::log(z);
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (prior[i] > 0) w[i] = std::exp(log_w[i] - log_z);
  free_energy_result r{dist::normalize(std::move(w))};
  r.beta = beta;
  r.log_partition = log_z;
  r.expected_utility = expectation(r.posterior, u.values());
  r.kl_cost = kl_divergence(r.posterior, prior);
  r.free_energy = r.expected_utility - r.kl_cost / beta;
  return r;
}

/// E_p[U] - KL(p||q)/beta for an arbitrary p.
inline double free_energy(const dist& p, const utility_vector& u, const dist& prior, double beta) {
  if (!(beta > 0) || std::isinf(beta)) fail(errc::invalid_argument, "free energy needs a finite positive beta");
  return expectation(p, u.values()) - kl_divergence(p, prior) / beta;
}

struct solver_options {
  double tolerance = 1e-10;
  double beta_cap = 1e6;
  int max_bisections = 400;
};

/// Chooses beta so that the cost or utility constraint is met with equality.
/// A cost budget at or above KL(rational posterior || q), or a utility target
/// equal to max U, is slack at every finite beta; the beta = inf limit is
/// returned with rational_limit set. A utility target below E_q[U] is met by
/// the prior (beta = 0).
inline free_energy_result solve_for_constraint(const bounded_problem& prob, const solver_options& opts = {}) {
  const auto& u = prob.utility;
  const auto& q = prob.prior;
  detail::check_problem(u.values(), q);
  if (const auto* b = std::get_if<beta_constraint>(&prob.constraint)) return boltzmann_posterior(u, q, b->beta);

  const auto rational = rational_posterior(u, q);
  const auto at_zero = boltzmann_posterior(u, q, 0.0);
  // measure(beta) is non-decreasing in beta; target is what it must reach.
  double target = 0.0;
  bool cost_mode = false;
  if (const auto* c = std::get_if<max_cost_constraint>(&prob.constraint)) {
    cost_mode = true;
    target = c->nats;
    if (!std::isfinite(target) || target < 0) fail(errc::infeasible_constraint, "cost budget must be non-negative");
    if (target == 0.0) return at_zero;
    if (target >= rational.kl_cost) return rational;
  } else {
    target = std::get<min_utility_constraint>(prob.constraint).value;
    if (!std::isfinite(target)) fail(errc::invalid_argument, "utility target must be finite");
    if (target > rational.expected_utility) {
      if (rational.expected_utility == at_zero.expected_utility)
        fail(errc::degenerate_utility, "utility is constant on the prior's support and below the target");
      fail(errc::infeasible_constraint, "utility target exceeds the best attainable utility");
    }
    if (target <= at_zero.expected_utility) return at_zero;
    if (target == rational.expected_utility) return rational;
  }
  auto measure = [&](const free_energy_result& r) { return cost_mode ? r.kl_cost : r.expected_utility; };

  double lo = 0.0, hi = 1.0;
  auto hi_result = boltzmann_posterior(u, q, hi);
  while (measure(hi_result) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > opts.beta_cap) return rational;
    hi_result = boltzmann_posterior(u, q, hi);
  }
  free_energy_result best = hi_result;
  for (int it = 0; it < opts.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    auto r = boltzmann_posterior(u, q, mid);
    const double residual = measure(r) - target;
    if (std::fabs(residual) < std::fabs(measure(best) - target)) best = r;
    if (std::fabs(residual) <= opts.tolerance) return r;
    if (residual < 0)
      lo = mid;
    else
      hi = mid;
  }
  return best;
}

/// Posteriors along an increasing beta grid, in grid order.
inline std::vector<free_energy_result> beta_path(const utility_vector& u, const dist& prior, std::span<const double> betas) {
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] >= 0)) fail(errc::invalid_argument, "betas must be non-negative");
    if (i > 0 && !(betas[i] > betas[i - 1])) fail(errc::invalid_argument, "betas must be strictly increasing");
  }
  std::vector<free_energy_result> out;
  out.reserve(betas.size());
  for (double b : betas) out.push_back(boltzmann_posterior(u, prior, b));
  return out;
}

struct two_step_result {
  /// Posterior over blocks (the coarse decision).
  dist first_step_posterior;
  /// Inner decision inside each block, with the block's conditional prior.
  std::vector<free_energy_result> blocks;
  /// Outer decision with block free energies as utilities.
  free_energy_result outer;
  double total_free_energy = 0.0;
};

/// Two-step decision: choose a block with resource beta1 using each block's
/// free energy (at beta2) as its utility, then choose inside the block.
inline two_step_result two_step_value(const utility_vector& u, const partition& part, const dist& prior, double beta1,
                                      double beta2) {
  detail::check_problem(u.values(), prior);
  if (part.universe() != u.size()) fail(errc::length_mismatch, "partition does not match the option count");
  const auto cg = coarse_grain(prior, part);
  std::vector<free_energy_result> blocks;
  std::vector<double> block_values;
  for (std::size_t k = 0; k < part.block_count(); ++k) {
    if (!cg.conditionals[k]) fail(errc::degenerate_partition, "block " + std::to_string(k) + " has zero prior mass");
    std::vector<double> sub;
    for (auto i : part.block(k)) sub.push_back(u[i]);
    blocks.push_back(boltzmann_posterior(utility_vector(std::move(sub)), *cg.conditionals[k], beta2));
    block_values.push_back(blocks.back().free_energy);
  }
  auto outer = boltzmann_posterior(utility_vector(std::move(block_values)), cg.marginal, beta1);
  two_step_result out{outer.posterior, std::move(blocks), outer, outer.free_energy};
  return out;
}

}  // namespace brdm
