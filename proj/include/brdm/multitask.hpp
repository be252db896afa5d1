#pragma once

// Multi-task decisions sharing one prior across world states: conditional
// Boltzmann posteriors, the optimal prior as the posterior marginal, the
// Blahut-Arimoto alternation between the two, and utility-information
// frontiers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "brdm/bounded.hpp"
#include "brdm/error.hpp"
#include "brdm/simplex.hpp"

namespace brdm {

/// U(w, x) for M world states and N options, row-major by world state.
class utility_table {
 public:
  utility_table() = default;
  utility_table(std::size_t worlds, std::size_t options, std::vector<double> values)
      : worlds_(worlds), options_(options), values_(std::move(values)) {
    if (worlds_ == 0 || options_ == 0) fail(errc::empty_input, "utility table is empty");
    if (values_.size() != worlds_ * options_) fail(errc::length_mismatch, "utility table has the wrong number of entries");
    for (double v : values_)
      if (!std::isfinite(v)) fail(errc::invalid_argument, "utility table entries must be finite");
  }

  static utility_table from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) fail(errc::empty_input, "utility table is empty");
    std::vector<double> flat;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) fail(errc::length_mismatch, "utility table rows differ in length");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return utility_table(rows.size(), rows.front().size(), std::move(flat));
  }

  /// U(w, x) = scale_w if w == x, else 0.
  static utility_table diagonal(std::span<const double> scale) {
    const std::size_t n = scale.size();
    std::vector<double> flat(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) flat[i * n + i] = scale[i];
    return utility_table(n, n, std::move(flat));
  }

  std::size_t worlds() const noexcept { return worlds_; }
  std::size_t options() const noexcept { return options_; }
  double operator()(std::size_t w, std::size_t x) const { return values_[w * options_ + x]; }
  std::span<const double> row(std::size_t w) const { return {values_.data() + w * options_, options_}; }

 private:
  std::size_t worlds_ = 0;
  std::size_t options_ = 0;
  std::vector<double> values_;
};

struct multitask_problem {
  dist world;
  utility_table utility;
  double beta = 0.0;
};

struct channel_state {
  dist prior;
  std::vector<dist> posteriors;
  /// E_{p(W)}[ E_{p(X|W)}[U] - KL(p(X|W)||q)/beta ].
  double free_energy = 0.0;
  double expected_utility = 0.0;
  /// E_{p(W)} KL(p(X|W)||q) in nats: the cost actually paid against the prior.
  double kl_to_prior = 0.0;
  /// I(W;X) in nats, measured against the actual marginal of the posteriors.
  double mutual_information = 0.0;
};

struct information_report {
  double mutual_information = 0.0;
  double kl_to_prior = 0.0;
  dist marginal;
};

namespace detail {

inline void check_multitask(const multitask_problem& prob) {
  if (prob.world.size() != prob.utility.worlds()) fail(errc::length_mismatch, "world distribution does not match the table");
  if (std::isnan(prob.beta) || prob.beta < 0) fail(errc::invalid_argument, "beta must be non-negative");
}

inline dist posterior_marginal(const dist& world, const std::vector<dist>& posteriors) {
  const std::size_t n = posteriors.front().size();
  std::vector<double> m(n, 0.0);
  const dist* common = nullptr;
  bool identical = true;
  for (std::size_t w = 0; w < world.size() && identical; ++w) {
    if (world[w] == 0.0) continue;
    if (!common) common = &posteriors[w];
    else identical = posteriors[w] == *common;
  }
  if (common && identical) return *common;
  std::vector<bool> reached(n, false);
  for (std::size_t w = 0; w < world.size(); ++w) {
    if (world[w] == 0.0) continue;
    for (std::size_t x = 0; x < n; ++x) {
      m[x] += world[w] * posteriors[w][x];
      reached[x] = reached[x] || posteriors[w][x] > 0;
    }
  }
  // A product can underflow to zero while the posterior entry is positive.
  for (std::size_t x = 0; x < n; ++x)
    if (reached[x] && m[x] == 0.0) m[x] = std::numeric_limits<double>::denorm_min();
  return dist::normalize(std::move(m));
}

}  // namespace detail

/// I(W;X) against the actual marginal, and the KL-to-prior cost; the gap is
/// KL(marginal||prior) >= 0.
inline information_report mutual_information(const dist& world, const std::vector<dist>& posteriors, const dist& prior) {
  if (posteriors.size() != world.size()) fail(errc::length_mismatch, "one posterior per world state is required");
  for (const auto& p : posteriors)
    if (p.size() != prior.size()) fail(errc::length_mismatch, "posterior and prior differ in length");
  information_report r{0.0, 0.0, detail::posterior_marginal(world, posteriors)};
  for (std::size_t w = 0; w < world.size(); ++w) {
    if (world[w] == 0.0) continue;
    r.mutual_information += world[w] * kl_divergence(posteriors[w], r.marginal);
    r.kl_to_prior += world[w] * kl_divergence(posteriors[w], prior);
  }
  r.mutual_information = std::max(r.mutual_information, 0.0);
  return r;
}

/// Free energy of arbitrary posteriors and prior.
inline double multitask_free_energy(const multitask_problem& prob, const std::vector<dist>& posteriors, const dist& prior) {
  detail::check_multitask(prob);
  double eu = 0.0, cost = 0.0;
  for (std::size_t w = 0; w < prob.world.size(); ++w) {
    if (prob.world[w] == 0.0) continue;
    eu += prob.world[w] * expectation(posteriors[w], prob.utility.row(w));
    if (prob.beta > 0) cost += prob.world[w] * kl_divergence(posteriors[w], prior);
  }
  if (prob.beta == 0.0 || std::isinf(prob.beta)) return eu;
  return eu - cost / prob.beta;
}

/// p(x|w) = q(x) e^{beta U(w,x)} / Z_beta(w) for every world state.
inline channel_state conditional_posteriors(const multitask_problem& prob, const dist& prior) {
  detail::check_multitask(prob);
  if (prior.size() != prob.utility.options()) fail(errc::length_mismatch, "prior does not match the option count");
  channel_state s{prior, {}};
  s.posteriors.reserve(prob.world.size());
  for (std::size_t w = 0; w < prob.world.size(); ++w) {
    const utility_vector row(std::vector<double>(prob.utility.row(w).begin(), prob.utility.row(w).end()));
    s.posteriors.push_back(boltzmann_posterior(row, prior, prob.beta).posterior);
  }
  for (std::size_t w = 0; w < prob.world.size(); ++w)
    if (prob.world[w] > 0) s.expected_utility += prob.world[w] * expectation(s.posteriors[w], prob.utility.row(w));
  const auto info = mutual_information(prob.world, s.posteriors, prior);
  s.mutual_information = info.mutual_information;
  s.kl_to_prior = info.kl_to_prior;
  s.free_energy = (prob.beta == 0.0 || std::isinf(prob.beta)) ? s.expected_utility
                                                              : s.expected_utility - s.kl_to_prior / prob.beta;
  return s;
}

struct blahut_arimoto_options {
  std::size_t max_iters = 100000;
  /// Stop once the max-norm change of the prior is at most this.
  double tol = 1e-10;
};

struct blahut_arimoto_result {
  channel_state state;
  /// Free energy after every half-step: posterior update, then prior update.
  std::vector<double> trace;
  std::size_t iterations = 0;
  bool converged = false;
  /// Max-norm distance between the returned prior and its posterior marginal.
  double fixed_point_residual = 0.0;
};

/// Alternates the conditional Boltzmann posteriors and the prior update to
/// their marginal. The free energy never decreases along the way. Running out
/// of iterations is reported through `converged`, not thrown.
inline blahut_arimoto_result blahut_arimoto(const multitask_problem& prob, const dist& init_prior,
                                            const blahut_arimoto_options& opts = {}) {
  detail::check_multitask(prob);
  blahut_arimoto_result out{conditional_posteriors(prob, init_prior), {}};
  dist prior = init_prior;
  for (std::size_t it = 1; it <= opts.max_iters; ++it) {
    auto state = conditional_posteriors(prob, prior);
    out.trace.push_back(state.free_energy);
    const dist next = detail::posterior_marginal(prob.world, state.posteriors);
    out.trace.push_back(multitask_free_energy(prob, state.posteriors, next));
    double change = 0.0;
    for (std::size_t x = 0; x < next.size(); ++x) change = std::max(change, std::fabs(next[x] - prior[x]));
    out.iterations = it;
    out.state = std::move(state);
    out.fixed_point_residual = change;
    prior = next;
    if (change <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

enum class prior_mode { uniform, optimal };

struct frontier_point {
  double beta = 0.0;
  double information_bits = 0.0;
  double expected_utility = 0.0;
  double free_energy = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
  dist prior = dist::uniform(1);
};

/// Utility-information curve over a beta grid: a fixed uniform prior, or the
/// optimal prior from Blahut-Arimoto (started from uniform at every beta).
inline std::vector<frontier_point> efficiency_frontier(const dist& world, const utility_table& table,
                                                       std::span<const double> betas, prior_mode mode,
                                                       const blahut_arimoto_options& opts = {}) {
  for (std::size_t i = 1; i < betas.size(); ++i)
    if (!(betas[i] > betas[i - 1])) fail(errc::invalid_argument, "betas must be strictly increasing");
  const auto uniform = dist::uniform(table.options());
  std::vector<frontier_point> out;
  out.reserve(betas.size());
  for (double beta : betas) {
    multitask_problem prob{world, table, beta};
    frontier_point pt;
    pt.beta = beta;
    channel_state state{uniform, {}};
    if (mode == prior_mode::uniform) {
      state = conditional_posteriors(prob, uniform);
    } else {
      auto ba = blahut_arimoto(prob, uniform, opts);
      pt.iterations = ba.iterations;
      pt.converged = ba.converged;
      state = std::move(ba.state);
    }
    pt.information_bits = nats_to_bits(state.mutual_information);
    pt.expected_utility = state.expected_utility;
    pt.free_energy = state.free_energy;
    pt.prior = state.prior;
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace brdm
