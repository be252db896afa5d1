// brdm: command-line front-end for the decision-making library.

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "brdm/bounded.hpp"
#include "brdm/costs.hpp"
#include "brdm/experiments.hpp"
#include "brdm/inference.hpp"
#include "brdm/io.hpp"
#include "brdm/majorization.hpp"
#include "brdm/multitask.hpp"
#include "brdm/relative.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* tool_version = "0.1.0";

enum exit_code { ok = 0, invalid_input = 2, infeasible = 3, non_converged = 4 };

int exit_for(brdm::errc code) {
  switch (code) {
    case brdm::errc::infeasible_constraint:
    case brdm::errc::degenerate_utility: return infeasible;
    case brdm::errc::non_convergence: return non_converged;
    default: return invalid_input;
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

json scalar_json(double v) { return v; }
json scalar_json(const brdm::rational& v) { return v.str(); }

template <class T>
json vector_json(std::span<const T> v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(scalar_json(x));
  return a;
}

template <class T>
json matrix_json(const brdm::basic_matrix<T>& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r)));
  return rows;
}

template <class T>
json chain_json(const brdm::transform_chain<T>& chain) {
  json a = json::array();
  for (const auto& t : chain)
    a.push_back({{"m", t.m}, {"n", t.n}, {"lambda", scalar_json(t.lambda)}, {"permutation", t.permutation}});
  return a;
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

struct globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool exact = false;
  std::string out_dir = ".";
  std::string config;
};

template <class T>
json majorize_report(const brdm::basic_dist<T>& p, const brdm::basic_dist<T>& q, bool witness) {
  const auto rel = brdm::majorizes(p, q);
  json out{{"relation", brdm::to_string(rel)}};
  if (!witness) return out;
  if (rel == brdm::relation::less || rel == brdm::relation::equivalent) {
    const auto chain = brdm::synthesize_transform_chain(p, q);
    out["direction"] = "p_to_q";
    out["chain"] = chain_json(chain);
    out["matrix"] = matrix_json(brdm::witness_doubly_stochastic(chain, p.size()));
  } else if (rel == brdm::relation::greater) {
    const auto chain = brdm::synthesize_transform_chain(q, p);
    out["direction"] = "q_to_p";
    out["chain"] = chain_json(chain);
    out["matrix"] = matrix_json(brdm::witness_doubly_stochastic(chain, p.size()));
  }
  return out;
}

template <class T>
json relmajorize_report(const brdm::basic_dist<T>& p, const brdm::basic_dist<T>& p2, const brdm::basic_dist<T>& q,
                        bool witness) {
  const auto rel = brdm::rel_majorizes(p, p2, q);
  json out{{"relation", brdm::to_string(rel)}};
  if (!witness) return out;
  if (rel == brdm::relation::less || rel == brdm::relation::equivalent) {
    out["direction"] = "p_to_p2";
    out["matrix"] = matrix_json(brdm::witness_q_stochastic(p, p2, q));
  } else if (rel == brdm::relation::greater) {
    out["direction"] = "p2_to_p";
    out["matrix"] = matrix_json(brdm::witness_q_stochastic(p2, p, q));
  }
  return out;
}

json result_json(const brdm::free_energy_result& r) {
  json j{{"posterior", vector_json(r.posterior.weights())},
         {"expected_utility", r.expected_utility},
         {"kl_nats", r.kl_cost},
         {"kl_bits", brdm::nats_to_bits(r.kl_cost)},
         {"free_energy", r.free_energy},
         {"rational_limit", r.rational_limit}};
  if (std::isinf(r.beta))
    j["beta"] = "inf";
  else
    j["beta"] = r.beta;
  return j;
}

void write_manifest(const globals& g, const brdm::experiment_config& cfg, const brdm::experiment_output& out) {
  fs::create_directories(g.out_dir);
  json files = json::array();
  for (const auto& [name, table] : out.tables) {
    const auto text = table.str();
    brdm::io::write_file((fs::path(g.out_dir) / name).string(), text);
    files.push_back({{"file", name}, {"sha256", sha256_hex(text)}, {"rows", table.rows()}});
  }
  json manifest{{"tool", "brdm"},
                {"version", tool_version},
                {"experiment", cfg.experiment},
                {"seed", cfg.seed},
                {"config", brdm::to_json(cfg)},
                {"artifact_choices", brdm::artifact_choices()},
                {"outputs", files},
                {"non_converged", out.non_converged}};
  std::string stem = cfg.experiment;
  for (auto& c : stem)
    if (c == '-') c = '_';
  brdm::io::write_file((fs::path(g.out_dir) / (stem + ".manifest.json")).string(), manifest.dump(2) + "\n");
  emit(manifest);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded-rational decision making: majorization, costs, free-energy solvers and experiments"};
  app.require_subcommand(1);
  globals g;
  app.add_option("--seed", g.seed, "Base seed for sampling")->each([&](const std::string&) { g.seed_set = true; });
  app.add_flag("--exact", g.exact, "Use exact rational arithmetic where supported");
  app.add_option("--out", g.out_dir, "Output directory for experiment files");
  app.add_option("--config", g.config, "Experiment configuration (JSON)");

  std::string p_file, q_file, p2_file, prior_file, spec_text = "kl", utility_file, betas_text, csv_file, world_file,
                                                  table_file, prior_mode_text = "optimal", model_file, data_file;
  bool witness = false, check_order = false, check_boltzmann = false;
  std::optional<double> beta, max_cost_bits, min_utility;

  auto* majorize = app.add_subcommand("majorize", "Compare p against q under majorization");
  majorize->add_option("--p", p_file)->required();
  majorize->add_option("--q", q_file)->required();
  majorize->add_flag("--witness", witness, "Emit a T-transform chain and its doubly stochastic matrix");

  auto* relmajorize = app.add_subcommand("relmajorize", "Compare p against p2 relative to a prior");
  relmajorize->add_option("--p", p_file)->required();
  relmajorize->add_option("--p2", p2_file)->required();
  relmajorize->add_option("--prior", prior_file)->required();
  relmajorize->add_flag("--witness", witness, "Emit a q-stochastic matrix");

  auto* cost = app.add_subcommand("cost", "Evaluate a cost function");
  cost->add_option("--p", p_file)->required();
  cost->add_option("--prior", prior_file, "Prior; omitted means the entropy form");
  cost->add_option("--spec", spec_text, "kl | shannon | burg | l2 | tsallis:a | renyi:a");

  auto* solve = app.add_subcommand("solve", "Bounded-optimal posterior under one resource constraint");
  solve->add_option("--utility", utility_file)->required();
  solve->add_option("--prior", prior_file)->required();
  auto* beta_opt = solve->add_option("--beta", beta);
  auto* cost_opt = solve->add_option("--max-cost-bits", max_cost_bits);
  auto* util_opt = solve->add_option("--min-utility", min_utility);
  beta_opt->excludes(cost_opt)->excludes(util_opt);
  cost_opt->excludes(util_opt);

  auto* path = app.add_subcommand("path", "Posteriors along a beta grid");
  path->add_option("--utility", utility_file)->required();
  path->add_option("--prior", prior_file)->required();
  path->add_option("--betas", betas_text, "start:stop:step")->required();
  path->add_flag("--check-order", check_order, "Check that consecutive posteriors are ordered");
  path->add_option("--csv", csv_file);

  auto* frontier = app.add_subcommand("frontier", "Utility-information curve");
  frontier->add_option("--world", world_file)->required();
  frontier->add_option("--utility-table", table_file)->required();
  frontier->add_option("--betas", betas_text)->required();
  frontier->add_option("--prior", prior_mode_text)->check(CLI::IsMember({"uniform", "optimal"}));
  frontier->add_option("--csv", csv_file);

  auto* bayes = app.add_subcommand("bayes", "Grid Bayes posterior for a Gaussian-mixture world model");
  bayes->add_option("--model", model_file)->required();
  bayes->add_option("--data", data_file)->required();
  bayes->add_flag("--check-boltzmann", check_boltzmann);

  auto* experiment = app.add_subcommand("experiment", "Run a desk-scale experiment");
  std::string experiment_id;
  experiment->add_option("id", experiment_id)->required()->check(CLI::IsMember({"ident-known", "ident-unknown", "bayes-vs-ml"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : invalid_input;
  }

  using namespace brdm;
  try {
    if (*majorize) {
      if (g.exact)
        emit(majorize_report(io::parse_exact_dist(io::read_json(p_file)), io::parse_exact_dist(io::read_json(q_file)), witness));
      else
        emit(majorize_report(io::parse_dist(io::read_json(p_file)), io::parse_dist(io::read_json(q_file)), witness));
    } else if (*relmajorize) {
      if (g.exact)
        emit(relmajorize_report(io::parse_exact_dist(io::read_json(p_file)), io::parse_exact_dist(io::read_json(p2_file)),
                                io::parse_exact_dist(io::read_json(prior_file)), witness));
      else
        emit(relmajorize_report(io::parse_dist(io::read_json(p_file)), io::parse_dist(io::read_json(p2_file)),
                                io::parse_dist(io::read_json(prior_file)), witness));
    } else if (*cost) {
      const auto spec = specs::parse(spec_text);
      const auto p = io::parse_dist(io::read_json(p_file));
      const double v = prior_file.empty() ? entropy_cost(p, spec) : divergence(p, io::parse_dist(io::read_json(prior_file)), spec);
      json out{{"spec", spec.name}, {"form", prior_file.empty() ? "entropy" : "divergence"}, {"value_nats", v}};
      if (spec.name == "kl" || spec.name == "shannon" || spec.name.starts_with("renyi")) out["value_bits"] = nats_to_bits(v);
      emit(out);
    } else if (*solve) {
      const auto u = io::parse_utility(io::read_json(utility_file));
      const auto q = io::parse_dist(io::read_json(prior_file));
      resource_constraint c = beta_constraint{0.0};
      if (beta)
        c = beta_constraint{*beta};
      else if (max_cost_bits)
        c = max_cost_constraint{bits_to_nats(*max_cost_bits)};
      else if (min_utility)
        c = min_utility_constraint{*min_utility};
      else
        fail(errc::invalid_argument, "one of --beta, --max-cost-bits, --min-utility is required");
      emit(result_json(solve_for_constraint({u, q, c})));
    } else if (*path) {
      const auto u = io::parse_utility(io::read_json(utility_file));
      const auto q = io::parse_dist(io::read_json(prior_file));
      const auto betas = io::parse_grid(betas_text);
      const auto results = beta_path(u, q, betas);
      std::vector<std::string> cols{"beta"};
      for (std::size_t i = 0; i < q.size(); ++i) cols.push_back("p_" + std::to_string(i + 1));
      for (const char* c : {"expected_utility", "kl_bits", "free_energy"}) cols.emplace_back(c);
      io::csv_table table(cols);
      json points = json::array();
      for (const auto& r : results) {
        std::vector<double> row{r.beta};
        row.insert(row.end(), r.posterior.begin(), r.posterior.end());
        row.insert(row.end(), {r.expected_utility, nats_to_bits(r.kl_cost), r.free_energy});
        table.add_row(row);
        points.push_back(result_json(r));
      }
      json out{{"points", points}};
      if (check_order) {
        json pairs = json::array();
        bool all = true;
        for (std::size_t i = 0; i + 1 < results.size(); ++i) {
          const auto rel = rel_majorizes(results[i + 1].posterior, results[i].posterior, q);
          all = all && (rel == relation::less || rel == relation::equivalent);
          pairs.push_back(to_string(rel));
        }
        out["order"] = {{"relations", pairs}, {"ordered", all}};
      }
      if (!csv_file.empty()) {
        io::write_file(csv_file, table.str());
        out.erase("points");
        out["csv"] = csv_file;
      }
      emit(out);
    } else if (*frontier) {
      const auto world = io::parse_dist(io::read_json(world_file));
      const auto table = io::parse_utility_table(io::read_json(table_file));
      const auto betas = io::parse_grid(betas_text);
      const auto mode = prior_mode_text == "uniform" ? prior_mode::uniform : prior_mode::optimal;
      const auto curve = efficiency_frontier(world, table, betas, mode);
      io::csv_table csv({"beta", "I_bits", "expected_utility", "free_energy", "iters"});
      bool converged = true;
      for (const auto& pt : curve) {
        converged = converged && pt.converged;
        csv.add_row({io::format_number(pt.beta), io::format_number(pt.information_bits),
                     io::format_number(pt.expected_utility), io::format_number(pt.free_energy), std::to_string(pt.iterations)});
      }
      if (csv_file.empty())
        std::cout << csv.str();
      else
        io::write_file(csv_file, csv.str());
      if (!converged) {
        std::cerr << "NonConvergence: Blahut-Arimoto hit max_iters at some beta\n";
        return non_converged;
      }
    } else if (*bayes) {
      const auto model = io::parse_model(io::read_json(model_file));
      const auto data = io::parse_dataset(io::read_json(data_file), model);
      const auto belief = bayes_update(model, data);
      std::size_t map = 0;
      for (std::size_t k = 1; k < belief.posterior.size(); ++k)
        if (belief.posterior[k] > belief.posterior[map]) map = k;
      const auto& th = model.params()[map];
      json out{{"samples", data.size()},
               {"grid_size", model.grid_size()},
               {"predictive", vector_json(belief.predictive.weights())},
               {"posterior_entropy_nats", shannon_entropy(belief.posterior)},
               {"map", {{"mu1", th.mu1}, {"mu2", th.mu2}, {"sigma1", th.sigma1}, {"sigma2", th.sigma2}, {"probability", belief.posterior[map]}}}};
      if (data.size() > 0) {
        const auto ml = ml_estimate(model, data);
        const auto& mt = model.params()[ml.index];
        out["ml"] = {{"mu1", mt.mu1}, {"mu2", mt.mu2}, {"sigma1", mt.sigma1}, {"sigma2", mt.sigma2}, {"log_likelihood", ml.log_likelihood}};
      }
      if (check_boltzmann) out["boltzmann_max_abs_diff"] = bayes_as_boltzmann_check(model, data).max_abs_diff;
      emit(out);
    } else if (*experiment) {
      experiment_config cfg;
      if (!g.config.empty()) cfg = config_from_json(io::read_json(g.config));
      cfg.experiment = experiment_id;
      if (g.seed_set) cfg.seed = g.seed;
      cfg.validate();
      const auto out = run_experiment(cfg);
      write_manifest(g, cfg, out);
      if (out.non_converged) {
        std::cerr << "NonConvergence: Blahut-Arimoto hit max_iters in at least one run\n";
        return non_converged;
      }
    }
  } catch (const brdm::error& e) {
    std::cerr << e.what() << '\n';
    return exit_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return invalid_input;
  }
  return ok;
}
