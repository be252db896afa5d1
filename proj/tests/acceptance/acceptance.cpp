#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "../unit/support.hpp"
#include "brdm/bounded.hpp"
#include "brdm/costs.hpp"
#include "brdm/experiments.hpp"
#include "brdm/inference.hpp"
#include "brdm/majorization.hpp"
#include "brdm/multitask.hpp"
#include "brdm/relative.hpp"

using namespace brdm;
using brdm::testing::Q;
using brdm::testing::exact;

namespace {

struct outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

utility_vector random_utility(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return utility_vector(std::move(v));
}

partition random_partition(std::size_t n, std::size_t max_blocks, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, max_blocks - 1);
  std::vector<std::vector<std::size_t>> blocks(max_blocks);
  for (std::size_t i = 0; i < n; ++i) blocks[pick(rng)].push_back(i);
  std::erase_if(blocks, [](const auto& b) { return b.empty(); });
  return partition::make(blocks, n);
}

outcome c1_lift() {
  outcome o;
  const auto q = exact({Q(1, 6), Q(1, 2), Q(1, 3)});
  const auto p = exact({Q(1, 6), Q(3, 4), Q(1, 12)});
  const auto t0 = std::chrono::steady_clock::now();
  const auto l = lift(p, q);
  const auto back = unlift(l);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  o.require(l.values == std::vector<rational>{Q(1, 6), Q(1, 4), Q(1, 4), Q(1, 4), Q(1, 24), Q(1, 24)}, "lifted vector differs");
  o.require(back == p, "unlift does not round-trip");
  o.require(ms < 1.0, "lift took " + fmt("%.3f", ms) + " ms");
  o.detail = o.pass ? "alpha=6, lift+unlift " + fmt("%.3f", ms) + " ms" : o.detail;
  return o;
}

outcome c2_incomparable() {
  outcome o;
  o.require(majorizes(exact({Q(1, 2), Q(1, 4), Q(1, 4)}), exact({Q(2, 5), Q(2, 5), Q(1, 5)})) == relation::incomparable,
            "pair is not reported incomparable");
  for (std::size_t n = 2; n <= 6; ++n) {
    std::vector<exact_dist> chain;
    for (std::size_t m = n; m >= 1; --m) {
      std::vector<rational> w(n, Q(0));
      for (std::size_t i = 0; i < m; ++i) w[i] = Q(1, static_cast<long>(m));
      chain.push_back(exact_dist::validate(std::move(w)));
    }
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
      o.require(majorizes(chain[i + 1], chain[i]) == relation::less, "uniform chain out of order at N=" + std::to_string(n));
  }
  if (o.pass) o.detail = "incomparable pair and uniform chains N=2..6";
  return o;
}

outcome c3_plain_oracle() {
  outcome o;
  std::size_t pairs = 0, below = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto grid = brdm::testing::rational_grid(n, 6);
    for (const auto& p : grid)
      for (const auto& pp : grid) {
        ++pairs;
        const auto rel = majorizes(p, pp);
        const bool oracle_below = brdm::testing::hlp_majorized(pp.vector(), p.vector());
        const bool oracle_above = brdm::testing::hlp_majorized(p.vector(), pp.vector());
        o.require(rel == combine_directions(oracle_below, oracle_above), "partial sums disagree with the convex oracle");
        bool built = false;
        try {
          const auto chain = synthesize_transform_chain(p, pp);
          built = true;
          const auto end = apply_chain(p.weights(), chain);
          o.require(std::equal(end.begin(), end.end(), pp.weights().begin()), "chain misses its target");
          const auto a = witness_doubly_stochastic(chain, n);
          o.require(is_doubly_stochastic(a, rational(0)), "witness is not doubly stochastic");
          o.require(left_multiply(p.weights(), a) == pp.vector(), "pA differs from p'");
        } catch (const error& e) {
          o.require(e.code() == errc::not_majorized, std::string("unexpected error ") + e.what());
        }
        const bool is_below = rel == relation::less || rel == relation::equivalent;
        o.require(built == is_below, "chain existence disagrees with the partial-sum test");
        below += is_below;
      }
  }
  if (o.pass) o.detail = std::to_string(pairs) + " pairs, " + std::to_string(below) + " with exact chains";
  return o;
}

outcome c4_relative_oracle() {
  outcome o;
  std::size_t cases = 0, witnesses = 0;
  for (std::size_t n = 2; n <= 3; ++n) {
    const auto grid = brdm::testing::rational_grid(n, 6);
    for (const auto& q : grid) {
      if (std::any_of(q.begin(), q.end(), [](const rational& v) { return v == 0; })) continue;
      for (const auto& p : grid)
        for (const auto& pp : grid) {
          ++cases;
          const auto rel = rel_majorizes(p, pp, q);
          o.require(rel == rel_majorizes_lifted(p, pp, q), "test (v) disagrees with the lifted test");
          if (rel != relation::less && rel != relation::equivalent) continue;
          const auto a = witness_q_stochastic(p, pp, q);
          o.require(left_multiply(p.weights(), a) == pp.vector(), "pA differs from p'");
          o.require(left_multiply(q.weights(), a) == q.vector(), "qA differs from q");
          for (const auto& s : row_sums(a)) o.require(s == 1, "row sum differs from 1");
          o.require(all_nonnegative(a, rational(0)), "negative witness entry");
          ++witnesses;
        }
    }
  }
  if (o.pass) o.detail = std::to_string(cases) + " triples, " + std::to_string(witnesses) + " exact witnesses";
  return o;
}

outcome c5_minimality() {
  outcome o;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  for (int i = 0; i < 10000; ++i) o.require(uniform_is_minimal_check(brdm::testing::random_dist(size(rng), rng, 0.2)), "uniform not minimal");
  for (int i = 0; i < 10000; ++i) {
    const auto n = size(rng);
    const auto q = brdm::testing::random_dist(n, rng);
    const auto p = brdm::testing::random_dist(n, rng, 0.2);
    const auto rel = rel_majorizes(p, q, q);
    o.require(rel == relation::less || rel == relation::equivalent, "prior not minimal");
  }
  if (o.pass) o.detail = "10^4 + 10^4 random instances";
  return o;
}

outcome c6_superadditivity() {
  outcome o;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  const std::vector<cost_spec> all{specs::kl(), specs::tsallis(2), specs::tsallis(3), specs::burg(), specs::squared_l2()};
  std::vector<std::size_t> violations(all.size(), 0);
  std::vector<double> worst(all.size(), 0.0);
  double kl_gap = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 10000; ++i) {
    const auto n = size(rng);
    const auto p = brdm::testing::random_dist(n, rng), q = brdm::testing::random_dist(n, rng);
    const auto part = random_partition(n, 2, rng);
    for (std::size_t s = 0; s < all.size(); ++s) {
      const auto r = check_superadditivity(p, q, part, all[s]);
      if (r.lhs < r.rhs - 1e-9) ++violations[s];
      worst[s] = std::min(worst[s], r.lhs - r.rhs);
      if (s == 0) kl_gap = std::max(kl_gap, std::fabs(r.lhs - r.rhs));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string d;
  for (std::size_t s = 0; s < all.size(); ++s) {
    o.require(violations[s] == 0, "");
    d += all[s].name + ":" + std::to_string(violations[s]) + " ";
  }
  o.require(kl_gap <= 1e-9, "");
  o.require(secs < 30, "");
  o.detail = "violations " + d + "(worst l2 gap " + fmt("%.3g", worst[4]) + "), KL |lhs-rhs| max " + fmt("%.2g", kl_gap);
  return o;
}

outcome c7_uniform_monotonicity() {
  outcome o;
  const std::vector<cost_spec> all{specs::kl(), specs::tsallis(2), specs::tsallis(3), specs::tsallis(0.5), specs::burg(),
                                   specs::squared_l2()};
  const double inf = std::numeric_limits<double>::infinity();
  auto cost = [&](std::size_t m, std::size_t n, const cost_spec& s) {
    try {
      return uniform_cost(m, n, s);
    } catch (const error& e) {
      if (e.code() != errc::domain_error) throw;
      return inf;
    }
  };
  for (const auto& s : all)
    for (std::size_t n = 1; n <= 50; ++n)
      for (std::size_t m = 1; m <= n; ++m) {
        if (m < n) o.require(cost(m + 1, n, s) <= cost(m, n, s), s.name + " increases in M");
        if (n < 50) o.require(cost(m, n, s) <= cost(m, n + 1, s), s.name + " decreases in N");
      }
  o.require(uniform_cost(1, 2, specs::kl()) == std::log(2.0), "KL(1,2) differs from log 2");
  if (o.pass) o.detail = "6 specs, 1 <= M <= N <= 50";
  return o;
}

outcome c8_beta_path() {
  outcome o;
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  const auto betas = detail::linspace(0.0, 10.0, 20);
  for (int i = 0; i < 100; ++i) {
    const auto n = size(rng);
    auto u = random_utility(n, rng);
    const auto q = brdm::testing::random_dist(n, rng);
    const auto path = beta_path(u, q, betas);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      o.require(rel_majorizes(path[k + 1].posterior, path[k].posterior, q) == relation::less, "consecutive pair not Less");
      for (const auto& s : {specs::kl(), specs::tsallis(3), specs::squared_l2()})
        o.require(divergence(path[k].posterior, q, s) < divergence(path[k + 1].posterior, q, s), s.name + " not increasing");
    }
  }
  if (o.pass) o.detail = "100 problems x 19 steps";
  return o;
}

outcome c9_free_energy() {
  outcome o;
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  std::uniform_real_distribution<double> b(0.01, 20.0), frac(0.05, 0.95);
  double worst_f = 0, worst_c = 0, worst_u = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = size(rng);
    const auto u = random_utility(n, rng);
    const auto q = brdm::testing::random_dist(n, rng);
    const double beta = b(rng);
    const auto r = boltzmann_posterior(u, q, beta);
    worst_f = std::max(worst_f, std::fabs(r.free_energy - r.log_partition / beta));
    const auto top = rational_posterior(u, q);
    const double budget = frac(rng) * top.kl_cost;
    worst_c = std::max(worst_c, std::fabs(solve_for_constraint({u, q, max_cost_constraint{budget}}).kl_cost - budget));
    const double lo = expectation(q, u.values());
    const double target = lo + frac(rng) * (top.expected_utility - lo);
    worst_u = std::max(worst_u, std::fabs(solve_for_constraint({u, q, min_utility_constraint{target}}).expected_utility - target));
    o.require(boltzmann_posterior(u, q, 0.0).posterior == q, "beta = 0 is not the prior");
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (u[k] > u[best]) best = k;
    o.require(boltzmann_posterior(u, q, infinite_beta).posterior == dist::dirac(n, best), "beta = inf is not the argmax");
  }
  o.require(worst_f <= 1e-9, "free energy identity");
  o.require(worst_c <= 1e-8, "cost constraint");
  o.require(worst_u <= 1e-8, "utility constraint");
  o.detail = (o.pass ? std::string() : o.detail + "; ") + "max |F - logZ/beta| " + fmt("%.2g", worst_f) + ", cost " +
             fmt("%.2g", worst_c) + ", utility " + fmt("%.2g", worst_u);
  return o;
}

outcome c10_two_step() {
  outcome o;
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  std::uniform_real_distribution<double> b(0.05, 20.0);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = size(rng);
    const auto u = random_utility(n, rng);
    const auto q = brdm::testing::random_dist(n, rng);
    const double beta = b(rng);
    const auto two = two_step_value(u, random_partition(n, n, rng), q, beta, beta);
    worst = std::max(worst, std::fabs(two.total_free_energy - boltzmann_posterior(u, q, beta).free_energy));
  }
  o.require(worst <= 1e-9, "recursivity gap too large");
  o.detail = (o.pass ? std::string() : o.detail + "; ") + "max gap " + fmt("%.2g", worst);
  return o;
}

outcome c11_blahut_arimoto() {
  outcome o;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  std::uniform_real_distribution<double> b(0.1, 20.0), uu(0.0, 1.0);
  double worst_drop = 0, worst_res = 0;
  for (int i = 0; i < 100; ++i) {
    const auto m = size(rng), n = size(rng);
    std::vector<double> v(m * n);
    for (auto& x : v) x = uu(rng);
    multitask_problem prob{brdm::testing::random_dist(m, rng), utility_table(m, n, std::move(v)), b(rng)};
    const auto r = blahut_arimoto(prob, dist::uniform(n));
    o.require(r.converged, "run did not converge");
    for (std::size_t k = 1; k < r.trace.size(); ++k) worst_drop = std::max(worst_drop, r.trace[k - 1] - r.trace[k]);
    const auto s = conditional_posteriors(prob, r.state.prior);
    const auto marginal = mutual_information(prob.world, s.posteriors, r.state.prior).marginal;
    for (std::size_t x = 0; x < n; ++x) worst_res = std::max(worst_res, std::fabs(marginal[x] - r.state.prior[x]));
  }
  o.require(worst_drop <= 1e-12, "free energy decreased");
  o.require(worst_res <= 1e-8, "fixed point residual");
  o.detail = (o.pass ? std::string() : o.detail + "; ") + "max drop " + fmt("%.2g", worst_drop) + ", max residual " +
             fmt("%.2g", worst_res);
  return o;
}

outcome c12_ident_known() {
  outcome o;
  const auto world = mixture_pmf({}, integer_points(20));
  const auto table = utility_table::diagonal(std::vector<double>(20, 1.0));
  std::vector<double> betas;
  for (int i = 0; i <= 400; ++i) betas.push_back(0.25 * i);
  betas.push_back(infinite_beta);
  const auto opt = efficiency_frontier(world, table, betas, prior_mode::optimal);
  const auto uni = efficiency_frontier(world, table, betas, prior_mode::uniform);
  // Piecewise-linear interpolation under-estimates the concave optimal curve.
  auto opt_at = [&](double info) {
    for (std::size_t k = 1; k < opt.size(); ++k)
      if (info <= opt[k].information_bits) {
        const auto &a = opt[k - 1], &c = opt[k];
        const double span = c.information_bits - a.information_bits;
        const double t = span > 0 ? (info - a.information_bits) / span : 1.0;
        return a.expected_utility + t * (c.expected_utility - a.expected_utility);
      }
    return opt.back().expected_utility;
  };
  double best_gain = 0, worst_gap = 0;
  for (const auto& pt : uni) {
    const double gain = opt_at(pt.information_bits) - pt.expected_utility;
    best_gain = std::max(best_gain, gain);
    worst_gap = std::min(worst_gap, gain);
  }
  for (const auto& pt : opt) o.require(pt.converged, "optimal prior did not converge");
  o.require(worst_gap >= -1e-9, "uniform prior beats the optimal frontier");
  o.require(best_gain > 1e-3, "no strict dominance");
  const auto r50 = blahut_arimoto({world, table, 50.0}, dist::uniform(20));
  double tv = 0;
  for (std::size_t x = 0; x < 20; ++x) tv += 0.5 * std::fabs(r50.state.prior[x] - world[x]);
  o.require(r50.converged && tv <= 1e-3, "prior at beta=50 is far from p(W)");
  o.detail = (o.pass ? std::string() : o.detail + "; ") + "min gain " + fmt("%.2g", worst_gap) + ", max gain " +
             fmt("%.3f", best_gain) + ", TV at beta=50 " + fmt("%.2g", tv);
  return o;
}

outcome c13_bayes() {
  outcome o;
  const auto model = world_model::mixture_grid(integer_points(20));
  const auto world = mixture_pmf({}, integer_points(20));
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> size(1, 64);
  double worst_b = 0, worst_p = 0, worst_s = 0;
  for (int i = 0; i < 100; ++i) {
    const auto d = sample_dataset(world, size(rng), rng);
    worst_b = std::max(worst_b, bayes_as_boltzmann_check(model, d).max_abs_diff);
    const auto all = bayes_update(model, d);
    auto shuffled = d;
    std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
    const auto perm = bayes_update(model, shuffled);
    const std::size_t cut = d.size() / 2;
    const auto seq = bayes_update(model, bayes_update(model, d.prefix(cut)),
                                  dataset{{d.samples.begin() + static_cast<std::ptrdiff_t>(cut), d.samples.end()}});
    for (std::size_t k = 0; k < model.grid_size(); ++k) {
      worst_p = std::max(worst_p, std::fabs(perm.posterior[k] - all.posterior[k]));
      worst_s = std::max(worst_s, std::fabs(seq.posterior[k] - all.posterior[k]));
    }
  }
  o.require(worst_b <= 1e-12, "Boltzmann form differs");
  o.require(worst_p <= 1e-12, "permutation changes the posterior");
  o.require(worst_s <= 1e-12, "sequential update differs");
  o.detail = (o.pass ? std::string() : o.detail + "; ") + "max diff boltzmann " + fmt("%.2g", worst_b) + ", permutation " +
             fmt("%.2g", worst_p) + ", sequential " + fmt("%.2g", worst_s);
  return o;
}

outcome c14_ident_unknown() {
  outcome o;
  const std::vector<std::size_t> sizes{1, 2, 4, 8, 16, 32, 64};
  const auto model = world_model::mixture_grid(integer_points(20));
  experiment_config cfg;
  cfg.sizes = sizes;
  cfg.seeds = 100;
  const auto any = anytime_order_check(model, cfg.true_world(), sizes, cfg.seeds, cfg.seed);
  for (std::size_t i = 1; i < any.averaged_entropy.size(); ++i)
    o.require(any.averaged_entropy[i] <= any.averaged_entropy[i - 1], "averaged entropy increased");
  const auto rows = bayes_vs_ml_rows(cfg, model);
  bool positive_small = false;
  std::string d;
  for (const auto& r : rows) {
    o.require(r.diff.mean() >= -r.diff.stderr_of_mean(), "ML beats Bayes by more than one standard error");
    if (r.n <= 8 && r.diff.mean() > 0) positive_small = true;
    d += std::to_string(r.n) + ":" + fmt("%.3g", r.diff.mean()) + " ";
  }
  o.require(positive_small, "Bayes never ahead at small N");
  o.detail = (o.pass ? std::string() : o.detail + "; ") + "entropy " + fmt("%.2f", any.averaged_entropy.front()) + " -> " +
             fmt("%.2f", any.averaged_entropy.back()) + " nats, Bayes-ML " + d;
  return o;
}

}  // namespace

int main() {
  struct criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<outcome()> run;
  };
  const std::vector<criterion> all{
      {1, "worked-example lift", 1, c1_lift},
      {2, "incomparability and uniform chain", 1, c2_incomparable},
      {3, "plain majorization oracle equivalence", 60, c3_plain_oracle},
      {4, "relative majorization oracle equivalence", 120, c4_relative_oracle},
      {5, "minimality", 60, c5_minimality},
      {6, "superadditivity sweep", 30, c6_superadditivity},
      {7, "uniform monotonicity", 60, c7_uniform_monotonicity},
      {8, "beta-path order", 30, c8_beta_path},
      {9, "free-energy identities", 60, c9_free_energy},
      {10, "two-step recursivity", 60, c10_two_step},
      {11, "Blahut-Arimoto monotonicity and fixed point", 60, c11_blahut_arimoto},
      {12, "known-world frontier", 60, c12_ident_known},
      {13, "Bayes identities", 60, c13_bayes},
      {14, "unknown-world anytime and Bayes vs ML", 600, c14_ident_unknown},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%g", c.limit_s) + " s limit";
    }
    failed += !o.pass;
    std::printf("%s  criterion %2d  %-44s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, all.size());
  return failed ? 1 : 0;
}
