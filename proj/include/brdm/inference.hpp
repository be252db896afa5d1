#pragma once

// Bayesian inference over a finite parameter grid, read as a bounded-optimal
// decision whose resource is the number of observed samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "brdm/bounded.hpp"
#include "brdm/error.hpp"
#include "brdm/majorization.hpp"
#include "brdm/simplex.hpp"

namespace brdm {

struct grid_config {
  /// Unset bounds span the world points.
  std::optional<double> mu_lo, mu_hi;
  std::size_t mu_count = 21;
  double sigma_lo = 0.5, sigma_hi = 5.0;
  std::size_t sigma_count = 10;
};

/// Two-component Gaussian mixture with equal weights.
struct mixture_params {
  double mu1 = 6.0, mu2 = 15.0;
  double sigma1 = 1.5, sigma2 = 1.5;

  bool operator==(const mixture_params&) const = default;
};

namespace detail {

inline double log_sum_exp(std::span<const double> xs) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : xs) top = std::max(top, x);
  if (std::isinf(top)) return top;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - top);
  return top + std::log(acc);
}

inline double log_normal_density(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) fail(errc::invalid_argument, "grid axis needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

}  // namespace detail

/// log p(W = w_j | theta) over the world points, renormalized on that set.
inline std::vector<double> mixture_log_pmf(const mixture_params& theta, std::span<const double> points) {
  if (!(theta.sigma1 > 0) || !(theta.sigma2 > 0)) fail(errc::invalid_argument, "mixture widths must be positive");
  std::vector<double> out(points.size());
  const double half = std::log(0.5);
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double parts[2] = {half + detail::log_normal_density(points[j], theta.mu1, theta.sigma1),
                             half + detail::log_normal_density(points[j], theta.mu2, theta.sigma2)};
    out[j] = detail::log_sum_exp(parts);
  }
  const double norm = detail::log_sum_exp(out);
  for (auto& v : out) v -= norm;
  return out;
}

inline dist mixture_pmf(const mixture_params& theta, std::span<const double> points) {
  auto lp = mixture_log_pmf(theta, points);
  std::vector<double> w(lp.size());
  std::transform(lp.begin(), lp.end(), w.begin(), [](double v) { return std::exp(v); });
  return dist::normalize(std::move(w));
}

inline std::vector<double> integer_points(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i + 1);
  return out;
}

/// Parameter grid, per-point world distributions (as log-pmf rows) and the
/// prior belief over the grid.
class world_model {
 public:
  /// Mixture grid pruned by the symmetry mu1 <= mu2; uniform prior.
  static world_model mixture_grid(std::vector<double> points, const grid_config& cfg = {}) {
    if (points.empty()) fail(errc::empty_input, "world model needs world points");
    const auto [lo, hi] = std::minmax_element(points.begin(), points.end());
    const auto mus = detail::linspace(cfg.mu_lo.value_or(*lo), cfg.mu_hi.value_or(*hi), cfg.mu_count);
    const auto sigmas = detail::linspace(cfg.sigma_lo, cfg.sigma_hi, cfg.sigma_count);
    world_model m;
    m.points_ = std::move(points);
    for (std::size_t a = 0; a < mus.size(); ++a)
      for (std::size_t b = a; b < mus.size(); ++b)
        for (double s1 : sigmas)
          for (double s2 : sigmas) {
            mixture_params th{mus[a], mus[b], s1, s2};
            auto row = mixture_log_pmf(th, m.points_);
            m.log_pmf_.insert(m.log_pmf_.end(), row.begin(), row.end());
            m.params_.push_back(th);
          }
    m.prior_ = dist::uniform(m.params_.size());
    return m;
  }

  /// Explicit grid: one world distribution per grid point.
  static world_model explicit_grid(std::vector<dist> worlds, dist prior) {
    if (worlds.empty()) fail(errc::empty_input, "world model needs at least one grid point");
    if (prior.size() != worlds.size()) fail(errc::length_mismatch, "prior does not match the grid");
    world_model m;
    m.points_ = integer_points(worlds.front().size());
    for (const auto& w : worlds) {
      if (w.size() != m.points_.size()) fail(errc::length_mismatch, "grid world distributions differ in length");
      for (double v : w) m.log_pmf_.push_back(v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity());
    }
    m.params_.resize(worlds.size());
    m.prior_ = std::move(prior);
    return m;
  }

  std::size_t grid_size() const noexcept { return prior_.size(); }
  std::size_t world_size() const noexcept { return points_.size(); }
  std::span<const double> points() const noexcept { return points_; }
  const dist& prior() const noexcept { return prior_; }
  /// Mixture parameters per grid point; default-valued for explicit grids.
  const std::vector<mixture_params>& params() const noexcept { return params_; }
  std::span<const double> log_pmf(std::size_t k) const { return {log_pmf_.data() + k * points_.size(), points_.size()}; }

  dist world(std::size_t k) const {
    std::vector<double> w(points_.size());
    auto row = log_pmf(k);
    std::transform(row.begin(), row.end(), w.begin(), [](double v) { return std::exp(v); });
    return dist::normalize(std::move(w));
  }

  world_model with_prior(dist prior) const {
    if (prior.size() != grid_size()) fail(errc::length_mismatch, "prior does not match the grid");
    world_model m = *this;
    m.prior_ = std::move(prior);
    return m;
  }

 private:
  world_model() = default;
  std::vector<double> points_;
  std::vector<double> log_pmf_;
  std::vector<mixture_params> params_;
  dist prior_ = dist::uniform(1);
};

/// Samples as 0-based indices into the model's world points.
struct dataset {
  std::vector<std::size_t> samples;

  std::size_t size() const noexcept { return samples.size(); }
  dataset prefix(std::size_t n) const {
    if (n > samples.size()) fail(errc::invalid_argument, "prefix longer than the dataset");
    return {std::vector<std::size_t>(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n))};
  }
  std::vector<std::size_t> counts(std::size_t worlds) const {
    std::vector<std::size_t> c(worlds, 0);
    for (auto s : samples) {
      if (s >= worlds) fail(errc::invalid_argument, "sample " + std::to_string(s) + " is outside the world set");
      ++c[s];
    }
    return c;
  }
};

struct belief_state {
  dist posterior;
  dist predictive;
};

/// Uniform doubles in [0, 1) from the top 53 bits; fixed across platforms,
/// unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t sample_index(const dist& p, std::mt19937_64& rng) {
  const double u = unit_uniform(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0) return i;
  return p.size() - 1;
}

inline dataset sample_dataset(const dist& world, std::size_t n, std::mt19937_64& rng) {
  dataset d;
  d.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) d.samples.push_back(sample_index(world, rng));
  return d;
}

/// sum_i log p(w_i | theta_k) for every grid point k.
inline std::vector<double> log_likelihoods(const world_model& model, const dataset& data) {
  const auto counts = data.counts(model.world_size());
  std::vector<double> ll(model.grid_size(), 0.0);
  for (std::size_t k = 0; k < model.grid_size(); ++k) {
    auto row = model.log_pmf(k);
    double acc = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j)
      if (counts[j] > 0) acc += static_cast<double>(counts[j]) * row[j];
    ll[k] = acc;
  }
  return ll;
}

inline dist predictive(const world_model& model, const dist& posterior) {
  std::vector<double> w(model.world_size(), 0.0);
  for (std::size_t k = 0; k < model.grid_size(); ++k) {
    if (posterior[k] == 0.0) continue;
    auto row = model.log_pmf(k);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += posterior[k] * std::exp(row[j]);
  }
  return dist::normalize(std::move(w));
}

/// p(theta | d) proportional to p(theta) prod_i p(w_i | theta), in log space.
inline belief_state bayes_update(const world_model& model, const dataset& data) {
  const auto ll = log_likelihoods(model, data);
  std::vector<double> lp(model.grid_size(), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < lp.size(); ++k)
    if (model.prior()[k] > 0) lp[k] = std::log(model.prior()[k]) + ll[k];
  const double norm = detail::log_sum_exp(lp);
  if (std::isinf(norm)) fail(errc::zero_evidence, "no grid point explains the data");
  std::vector<double> w(lp.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(lp[k] - norm);
  auto post = dist::normalize(std::move(w));
  auto pred = predictive(model, post);
  return {std::move(post), std::move(pred)};
}

/// Continues from an earlier belief by using its posterior as the prior.
inline belief_state bayes_update(const world_model& model, const belief_state& from, const dataset& more) {
  return bayes_update(model.with_prior(from.posterior), more);
}

struct boltzmann_check_report {
  double max_abs_diff = 0.0;
  dist bayes;
  dist boltzmann;
};

/// The Bayes posterior against the Boltzmann posterior with beta = N and
/// U(theta) the average log-likelihood per sample.
inline boltzmann_check_report bayes_as_boltzmann_check(const world_model& model, const dataset& data) {
  if (data.size() == 0) fail(errc::invalid_argument, "the Boltzmann form needs at least one sample");
  const auto ll = log_likelihoods(model, data);
  const double n = static_cast<double>(data.size());
  // Grid points the data rule out carry no posterior mass in either form;
  // they are dropped from the prior so the utility stays finite.
  std::vector<double> u(ll.size(), 0.0), q(ll.size(), 0.0);
  for (std::size_t k = 0; k < ll.size(); ++k) {
    if (std::isinf(ll[k])) continue;
    u[k] = ll[k] / n;
    q[k] = model.prior()[k];
  }
  if (std::all_of(q.begin(), q.end(), [](double v) { return v == 0.0; }))
    fail(errc::zero_evidence, "no grid point explains the data");
  boltzmann_check_report r{0.0, bayes_update(model, data).posterior,
                           boltzmann_posterior(utility_vector(std::move(u)), dist::normalize(std::move(q)), n).posterior};
  for (std::size_t k = 0; k < r.bayes.size(); ++k) r.max_abs_diff = std::max(r.max_abs_diff, std::fabs(r.bayes[k] - r.boltzmann[k]));
  return r;
}

struct ml_result {
  std::size_t index = 0;
  double log_likelihood = 0.0;
  dist predictive;
};

/// Grid argmax of the log-likelihood; the first index wins ties.
inline ml_result ml_estimate(const world_model& model, const dataset& data) {
  if (data.size() == 0) fail(errc::invalid_argument, "maximum likelihood needs at least one sample");
  const auto ll = log_likelihoods(model, data);
  std::size_t best = 0;
  for (std::size_t k = 1; k < ll.size(); ++k)
    if (ll[k] > ll[best]) best = k;
  if (std::isinf(ll[best])) fail(errc::zero_evidence, "no grid point explains the data");
  return {best, ll[best], model.world(best)};
}

inline double shannon_entropy(const dist& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0) h -= v * std::log(v);
  return h;
}

struct anytime_report {
  std::vector<std::size_t> sizes;
  /// Per consecutive size pair, the fraction of seeds whose later posterior
  /// majorizes the earlier one.
  std::vector<double> pass_rate;
  /// Shannon entropy (nats) of the seed-averaged posterior at each size.
  std::vector<double> averaged_entropy;
};

/// Nested prefixes of one sample stream per seed; seed s uses a generator
/// seeded with base_seed + s.
inline anytime_report anytime_order_check(const world_model& model, const dist& truth, std::vector<std::size_t> sizes,
                                          std::size_t seeds, std::uint64_t base_seed, double tol = 1e-12) {
  if (truth.size() != model.world_size()) fail(errc::length_mismatch, "true world distribution does not match the model");
  if (sizes.empty() || seeds == 0) fail(errc::invalid_argument, "anytime check needs sizes and seeds");
  for (std::size_t i = 1; i < sizes.size(); ++i)
    if (sizes[i] < sizes[i - 1]) fail(errc::invalid_argument, "dataset sizes must be nested");
  anytime_report r;
  r.sizes = sizes;
  std::vector<std::size_t> passes(sizes.size() - 1, 0);
  std::vector<std::vector<double>> avg(sizes.size(), std::vector<double>(model.grid_size(), 0.0));
  for (std::size_t s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(base_seed + s);
    const auto stream = sample_dataset(truth, sizes.back(), rng);
    std::vector<dist> posts;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      posts.push_back(bayes_update(model, stream.prefix(sizes[i])).posterior);
      for (std::size_t k = 0; k < model.grid_size(); ++k) avg[i][k] += posts.back()[k] / static_cast<double>(seeds);
    }
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
      const auto rel = majorizes(posts[i + 1], posts[i], tol);
      if (rel == relation::less || rel == relation::equivalent) ++passes[i];
    }
  }
  for (auto c : passes) r.pass_rate.push_back(static_cast<double>(c) / static_cast<double>(seeds));
  for (auto& a : avg) r.averaged_entropy.push_back(shannon_entropy(dist::normalize(std::move(a))));
  return r;
}

}  // namespace brdm
