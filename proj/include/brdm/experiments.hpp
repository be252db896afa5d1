#pragma once

// Desk-scale experiment runners: identification with a known world
// distribution, with an inferred one, and Bayes against maximum likelihood
// at a fixed information budget. Each runner returns CSV tables; writing
// files and manifests is left to the caller.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "brdm/bounded.hpp"
#include "brdm/inference.hpp"
#include "brdm/io.hpp"
#include "brdm/multitask.hpp"

namespace brdm {

struct experiment_config {
  std::string experiment = "ident-known";
  std::size_t n_world = 20;
  mixture_params truth{};
  /// u_w in U(w, x) = u_w [w == x]; a single value applies to every w.
  std::vector<double> utility_scale{1.0};
  std::vector<double> betas{0, 0.25, 0.5, 0.75, 1, 1.5, 2, 2.5, 3, 4, 5, 6, 8, 10, 12, 15, 20, 30, 50};
  /// Betas at which the optimal prior is written out.
  std::vector<double> prior_betas{2, 5, 10, 50};
  std::vector<std::size_t> sizes{0, 1, 2, 4, 8, 16, 32, 64};
  std::size_t seeds = 100;
  std::uint64_t seed = 0;
  double budget_bits = 2.0;
  grid_config grid{};
  blahut_arimoto_options ba{};

  std::vector<double> scales() const {
    if (utility_scale.size() == 1) return std::vector<double>(n_world, utility_scale.front());
    if (utility_scale.size() != n_world) fail(errc::length_mismatch, "utility_scale needs one value or one per world state");
    return utility_scale;
  }

  dist true_world() const { return mixture_pmf(truth, integer_points(n_world)); }

  void validate() const {
    if (experiment != "ident-known" && experiment != "ident-unknown" && experiment != "bayes-vs-ml")
      fail(errc::invalid_argument, "unknown experiment '" + experiment + "'");
    if (n_world == 0) fail(errc::invalid_argument, "n_world must be positive");
    if (betas.empty()) fail(errc::invalid_argument, "beta grid is empty");
    for (std::size_t i = 0; i < betas.size(); ++i) {
      if (!(betas[i] >= 0)) fail(errc::invalid_argument, "betas must be non-negative");
      if (i > 0 && !(betas[i] > betas[i - 1])) fail(errc::invalid_argument, "betas must be strictly increasing");
    }
    if (sizes.empty()) fail(errc::invalid_argument, "dataset sizes are empty");
    for (std::size_t i = 1; i < sizes.size(); ++i)
      if (sizes[i] < sizes[i - 1]) fail(errc::invalid_argument, "dataset sizes must be non-decreasing");
    if (seeds == 0) fail(errc::invalid_argument, "seed count must be positive");
    if (!(budget_bits >= 0)) fail(errc::invalid_argument, "budget must be non-negative");
    (void)scales();
  }
};

inline nlohmann::json to_json(const experiment_config& c) {
  return {{"experiment", c.experiment},
          {"n_world", c.n_world},
          {"truth", {{"mu1", c.truth.mu1}, {"mu2", c.truth.mu2}, {"sigma1", c.truth.sigma1}, {"sigma2", c.truth.sigma2}}},
          {"utility_scale", c.utility_scale},
          {"betas", c.betas},
          {"prior_betas", c.prior_betas},
          {"sizes", c.sizes},
          {"seeds", c.seeds},
          {"seed", c.seed},
          {"budget_bits", c.budget_bits},
          {"grid",
           {{"mu_range", c.grid.mu_lo && c.grid.mu_hi ? nlohmann::json{*c.grid.mu_lo, *c.grid.mu_hi} : nlohmann::json(nullptr)},
            {"sigma_range", {c.grid.sigma_lo, c.grid.sigma_hi}},
            {"counts", {c.grid.mu_count, c.grid.sigma_count}}}},
          {"ba", {{"tol", c.ba.tol}, {"max_iters", c.ba.max_iters}}}};
}

/// Overlays the keys present in `j` on the defaults.
inline experiment_config config_from_json(const nlohmann::json& j, experiment_config c = {}) {
  if (!j.is_object()) fail(errc::invalid_argument, "config must be a JSON object");
  try {
    if (j.contains("experiment")) c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("n_world")) c.n_world = j.at("n_world").get<std::size_t>();
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      c.truth.mu1 = t.value("mu1", c.truth.mu1);
      c.truth.mu2 = t.value("mu2", c.truth.mu2);
      c.truth.sigma1 = t.value("sigma1", c.truth.sigma1);
      c.truth.sigma2 = t.value("sigma2", c.truth.sigma2);
    }
    if (j.contains("utility_scale")) {
      const auto& u = j.at("utility_scale");
      c.utility_scale = u.is_array() ? u.get<std::vector<double>>() : std::vector<double>{u.get<double>()};
    }
    if (j.contains("betas")) {
      const auto& b = j.at("betas");
      c.betas = b.is_string() ? io::parse_grid(b.get<std::string>()) : b.get<std::vector<double>>();
    }
    if (j.contains("prior_betas")) c.prior_betas = j.at("prior_betas").get<std::vector<double>>();
    if (j.contains("sizes")) c.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("budget_bits")) c.budget_bits = j.at("budget_bits").get<double>();
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("mu_range") && !g.at("mu_range").is_null()) {
        auto r = g.at("mu_range").get<std::vector<double>>();
        if (r.size() != 2) fail(errc::invalid_argument, "mu_range must be [lo, hi]");
        c.grid.mu_lo = r[0];
        c.grid.mu_hi = r[1];
      }
      if (g.contains("sigma_range")) {
        auto r = g.at("sigma_range").get<std::vector<double>>();
        if (r.size() != 2) fail(errc::invalid_argument, "sigma_range must be [lo, hi]");
        c.grid.sigma_lo = r[0];
        c.grid.sigma_hi = r[1];
      }
      if (g.contains("counts")) {
        auto r = g.at("counts").get<std::vector<std::size_t>>();
        if (r.size() != 2) fail(errc::invalid_argument, "counts must be [mu_count, sigma_count]");
        c.grid.mu_count = r[0];
        c.grid.sigma_count = r[1];
      }
    }
    if (j.contains("ba")) {
      c.ba.tol = j.at("ba").value("tol", c.ba.tol);
      c.ba.max_iters = j.at("ba").value("max_iters", c.ba.max_iters);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_argument, std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

/// Modelling choices recorded in every manifest.
inline std::vector<std::string> artifact_choices() {
  return {"true p(W): equal-weight Gaussian mixture at integer world states, renormalized (default modes 6 and 15, sigma 1.5)",
          "utility: diagonal, u_w = 1 by default",
          "parameter grid: mu over the world-state range at 21 points, sigma over [0.5, 5] at 10 points, mu1 <= mu2, uniform prior",
          "Blahut-Arimoto: uniform initial prior, max-norm prior change <= tol",
          "dataset sizes are nested prefixes of one sample stream per seed; seed s uses mt19937_64(seed + s)"};
}

struct experiment_output {
  std::map<std::string, io::csv_table> tables;
  /// Set when any Blahut-Arimoto run stopped at max_iters.
  bool non_converged = false;
};

/// Uniform-prior and optimal-prior frontiers for the known world
/// distribution, and the optimal priors at selected betas.
inline experiment_output run_ident_known(const experiment_config& cfg) {
  cfg.validate();
  const auto world = cfg.true_world();
  const auto table = utility_table::diagonal(cfg.scales());
  experiment_output out;

  io::csv_table frontier({"prior", "beta", "I_bits", "expected_utility", "free_energy", "iters"});
  for (auto mode : {prior_mode::uniform, prior_mode::optimal}) {
    for (const auto& pt : efficiency_frontier(world, table, cfg.betas, mode, cfg.ba)) {
      out.non_converged |= !pt.converged;
      frontier.add_row({mode == prior_mode::uniform ? "uniform" : "optimal", io::format_number(pt.beta),
                        io::format_number(pt.information_bits), io::format_number(pt.expected_utility),
                        io::format_number(pt.free_energy), std::to_string(pt.iterations)});
    }
  }
  out.tables.emplace("ident_known_frontier.csv", std::move(frontier));

  std::vector<std::string> cols{"beta"};
  for (std::size_t x = 0; x < cfg.n_world; ++x) cols.push_back("q_" + std::to_string(x + 1));
  cols.push_back("tv_to_world");
  io::csv_table priors(std::move(cols));
  {
    std::vector<double> row{0.0};
    for (double v : world) row.push_back(v);
    row.push_back(0.0);
    std::vector<std::string> cells{"world"};
    for (std::size_t i = 1; i < row.size(); ++i) cells.push_back(io::format_number(row[i]));
    priors.add_row(std::move(cells));
  }
  for (const auto& pt : efficiency_frontier(world, table, cfg.prior_betas, prior_mode::optimal, cfg.ba)) {
    out.non_converged |= !pt.converged;
    std::vector<double> row{pt.beta};
    double tv = 0.0;
    for (std::size_t x = 0; x < pt.prior.size(); ++x) {
      row.push_back(pt.prior[x]);
      tv += 0.5 * std::fabs(pt.prior[x] - world[x]);
    }
    row.push_back(tv);
    priors.add_row(row);
  }
  out.tables.emplace("ident_known_priors.csv", std::move(priors));
  return out;
}

namespace detail {

struct running_stats {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  /// Sample standard deviation.
  double stddev() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1)));
  }
  double stderr_of_mean() const { return n ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

inline std::vector<dataset> nested_datasets(const dist& world, const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto stream = sample_dataset(world, sizes.back(), rng);
  std::vector<dataset> out;
  for (auto n : sizes) out.push_back(stream.prefix(n));
  return out;
}

}  // namespace detail

/// Expected utility and information of the channel whose prior is optimal
/// for `believed`, when world states actually arrive from `truth`.
struct channel_evaluation {
  double expected_utility = 0.0;
  double information_bits = 0.0;
  bool converged = true;
};

inline channel_evaluation evaluate_believed_channel(const dist& truth, const dist& believed, const utility_table& table,
                                                    double beta, const blahut_arimoto_options& opts) {
  auto ba = blahut_arimoto({believed, table, beta}, dist::uniform(table.options()), opts);
  const auto actual = conditional_posteriors({truth, table, beta}, ba.state.prior);
  return {actual.expected_utility, nats_to_bits(actual.mutual_information), ba.converged};
}

/// Optimal priors built from the Bayes predictive after N samples, scored
/// against the true world distribution; mean and std over seeds per (N, beta),
/// next to the known-distribution curve.
inline experiment_output run_ident_unknown(const experiment_config& cfg) {
  cfg.validate();
  const auto world = cfg.true_world();
  const auto table = utility_table::diagonal(cfg.scales());
  const auto model = world_model::mixture_grid(integer_points(cfg.n_world), cfg.grid);
  experiment_output out;

  std::vector<channel_evaluation> known;
  for (double b : cfg.betas) {
    known.push_back(evaluate_believed_channel(world, world, table, b, cfg.ba));
    out.non_converged |= !known.back().converged;
  }

  const std::size_t nb = cfg.betas.size(), ns = cfg.sizes.size();
  std::vector<detail::running_stats> eu(nb * ns), info(nb * ns);
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    const auto data = detail::nested_datasets(world, cfg.sizes, cfg.seed + s);
    for (std::size_t i = 0; i < ns; ++i) {
      const auto belief = bayes_update(model, data[i]);
      for (std::size_t b = 0; b < nb; ++b) {
        const auto ev = evaluate_believed_channel(world, belief.predictive, table, cfg.betas[b], cfg.ba);
        out.non_converged |= !ev.converged;
        eu[i * nb + b].add(ev.expected_utility);
        info[i * nb + b].add(ev.information_bits);
      }
    }
  }

  io::csv_table curves({"N", "beta", "I_bits_mean", "I_bits_std", "expected_utility_mean", "expected_utility_std",
                        "known_I_bits", "known_expected_utility"});
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& e = eu[i * nb + b];
      const auto& m = info[i * nb + b];
      curves.add_row({std::to_string(cfg.sizes[i]), io::format_number(cfg.betas[b]), io::format_number(m.mean()),
                      io::format_number(m.stddev()), io::format_number(e.mean()), io::format_number(e.stddev()),
                      io::format_number(known[b].information_bits), io::format_number(known[b].expected_utility)});
    }
  out.tables.emplace("ident_unknown_curves.csv", std::move(curves));
  return out;
}

/// Expected utility under `truth` of deciding each world state with prior
/// `believed` and a per-task KL budget.
inline double budget_expected_utility(const dist& truth, const dist& believed, std::span<const double> scale,
                                      double budget_nats) {
  double eu = 0.0;
  for (std::size_t w = 0; w < truth.size(); ++w) {
    if (truth[w] == 0.0) continue;
    std::vector<double> u(truth.size(), 0.0);
    u[w] = scale[w];
    const auto r = solve_for_constraint({utility_vector(std::move(u)), believed, max_cost_constraint{budget_nats}});
    eu += truth[w] * r.expected_utility;
  }
  return eu;
}

struct bayes_vs_ml_row {
  std::size_t n = 0;
  detail::running_stats bayes, ml, diff;
};

/// Paired comparison per dataset size; N = 0 is skipped since maximum
/// likelihood needs data.
inline std::vector<bayes_vs_ml_row> bayes_vs_ml_rows(const experiment_config& cfg, const world_model& model) {
  const auto world = cfg.true_world();
  const auto scale = cfg.scales();
  const double budget = bits_to_nats(cfg.budget_bits);
  std::vector<std::size_t> sizes;
  for (auto n : cfg.sizes)
    if (n > 0) sizes.push_back(n);
  if (sizes.empty()) fail(errc::invalid_argument, "bayes-vs-ml needs a positive dataset size");
  std::vector<bayes_vs_ml_row> rows(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) rows[i].n = sizes[i];
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    const auto data = detail::nested_datasets(world, sizes, cfg.seed + s);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const double b = budget_expected_utility(world, bayes_update(model, data[i]).predictive, scale, budget);
      const double m = budget_expected_utility(world, ml_estimate(model, data[i]).predictive, scale, budget);
      rows[i].bayes.add(b);
      rows[i].ml.add(m);
      rows[i].diff.add(b - m);
    }
  }
  return rows;
}

inline experiment_output run_bayes_vs_ml(const experiment_config& cfg) {
  cfg.validate();
  const auto model = world_model::mixture_grid(integer_points(cfg.n_world), cfg.grid);
  io::csv_table t({"N", "bayes_eu_mean", "bayes_eu_std", "ml_eu_mean", "ml_eu_std", "diff_mean", "diff_stderr"});
  for (const auto& r : bayes_vs_ml_rows(cfg, model))
    t.add_row({std::to_string(r.n), io::format_number(r.bayes.mean()), io::format_number(r.bayes.stddev()),
               io::format_number(r.ml.mean()), io::format_number(r.ml.stddev()), io::format_number(r.diff.mean()),
               io::format_number(r.diff.stderr_of_mean())});
  experiment_output out;
  out.tables.emplace("bayes_vs_ml.csv", std::move(t));
  return out;
}

inline experiment_output run_experiment(const experiment_config& cfg) {
  if (cfg.experiment == "ident-known") return run_ident_known(cfg);
  if (cfg.experiment == "ident-unknown") return run_ident_unknown(cfg);
  if (cfg.experiment == "bayes-vs-ml") return run_bayes_vs_ml(cfg);
  fail(errc::invalid_argument, "unknown experiment '" + cfg.experiment + "'");
}

}  // namespace brdm
