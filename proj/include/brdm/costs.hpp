#pragma once

// Cost functions: generalized entropies C(p) = sum f(p_i) and f-divergences
// C_q(p) = sum q_i f(p_i/q_i), their behaviour under coarse-graining and on
// uniform distributions.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brdm/error.hpp"
#include "brdm/relative.hpp"
#include "brdm/simplex.hpp"

namespace brdm {

struct cost_spec {
  std::string name;
  /// Raw generator on [0, inf). Values outside its domain are +inf or NaN.
  std::function<double(double)> generator;
  /// Optional monotone outer map applied to the summed form (Rényi-type
  /// costs). Specs with an outer map are not f-divergences.
  std::function<double(double)> outer;
  bool strictly_convex = true;
  bool differentiable = true;
  /// generator(1), subtracted in the divergence form so that C_q(q) = 0.
  double shift = 0.0;

  bool is_f_divergence() const { return !outer; }

  /// Generator with f(1) = 0.
  double f(double t) const { return generator(t) - shift; }
};

namespace detail {

inline bool sampled_convex(const std::function<double(double)>& f) {
  // Midpoint convexity on a grid inside (0, 4].
  constexpr int steps = 64;
  for (int i = 1; i <= steps; ++i) {
    for (int j = i + 2; j <= steps; j += 2) {
      const double a = 4.0 * i / steps, b = 4.0 * j / steps;
      const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
      if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) continue;
      const double scale = 1.0 + std::fabs(fa) + std::fabs(fb);
      if (fm > 0.5 * (fa + fb) + 1e-12 * scale) return false;
    }
  }
  return true;
}

inline std::string order_label(double order) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", order);
  return buf;
}

inline double finite_or_fail(double value, std::string_view what) {
  if (std::isnan(value) || std::isinf(value)) fail(errc::domain_error, std::string(what) + " is undefined at this input");
  return value;
}

}  // namespace detail

/// Builds a spec, storing f(1) as the divergence shift and rejecting
/// generators that fail a sampled midpoint-convexity check. Composite specs
/// (with an outer map) skip the check: their Schur-convexity comes from the
/// pairing of generator and outer map.
inline cost_spec make_cost_spec(std::string name, std::function<double(double)> generator,
                                std::function<double(double)> outer = {}, bool strictly_convex = true,
                                bool differentiable = true) {
  if (!generator) fail(errc::invalid_argument, "cost spec needs a generator");
  cost_spec spec{std::move(name), std::move(generator), std::move(outer), strictly_convex, differentiable, 0.0};
  spec.shift = spec.generator(1.0);
  if (!std::isfinite(spec.shift)) fail(errc::invalid_argument, "generator must be finite at 1");
  if (spec.is_f_divergence() && !detail::sampled_convex(spec.generator))
    fail(errc::invalid_argument, "generator '" + spec.name + "' is not convex");
  return spec;
}

namespace specs {

/// f(t) = t log t with 0 log 0 = 0.
inline cost_spec kl() {
  return make_cost_spec("kl", [](double t) { return t > 0 ? t * std::log(t) : (t == 0 ? 0.0 : NAN); });
}

/// Same generator as kl; its entropy form is the negative Shannon entropy.
inline cost_spec shannon() {
  auto s = kl();
  s.name = "shannon";
  return s;
}

/// f(t) = -log t, undefined (infinite) at 0.
inline cost_spec burg() {
  return make_cost_spec("burg", [](double t) {
    return t > 0 ? -std::log(t) : (t == 0 ? std::numeric_limits<double>::infinity() : NAN);
  });
}

/// f(t) = t^a for a > 1 and -t^a for 0 < a < 1.
inline cost_spec tsallis(double order) {
  if (!(order > 0) || order == 1.0 || !std::isfinite(order))
    fail(errc::invalid_argument, "Tsallis order must be positive and different from 1");
  const double sign = order > 1 ? 1.0 : -1.0;
  return make_cost_spec("tsallis:" + detail::order_label(order),
                        [order, sign](double t) { return t >= 0 ? sign * std::pow(t, order) : NAN; });
}

/// f(t) = (t - 1)^2.
inline cost_spec squared_l2() {
  return make_cost_spec("l2", [](double t) { return t >= 0 ? (t - 1) * (t - 1) : NAN; });
}

/// log(sum q (p/q)^a) / (a - 1); as an entropy form it is minus the Rényi
/// entropy of order a.
inline cost_spec renyi(double order) {
  if (!(order > 0) || order == 1.0 || !std::isfinite(order))
    fail(errc::invalid_argument, "Rényi order must be positive and different from 1");
  auto spec = make_cost_spec(
      "renyi:" + detail::order_label(order), [order](double t) { return t >= 0 ? std::pow(t, order) : NAN; },
      [order](double s) { return std::log(s) / (order - 1); });
  return spec;
}

/// Parses "kl", "shannon", "burg", "l2", "tsallis:<a>" or "renyi:<a>".
inline cost_spec parse(std::string_view text) {
  auto order_of = [&](std::string_view prefix) {
    const std::string rest(text.substr(prefix.size()));
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail(errc::invalid_argument, "bad order in cost spec '" + std::string(text) + "'");
    }
    if (used != rest.size()) fail(errc::invalid_argument, "bad order in cost spec '" + std::string(text) + "'");
    return value;
  };
  if (text == "kl") return kl();
  if (text == "shannon") return shannon();
  if (text == "burg") return burg();
  if (text == "l2") return squared_l2();
  if (text.starts_with("tsallis:")) return tsallis(order_of("tsallis:"));
  if (text.starts_with("renyi:")) return renyi(order_of("renyi:"));
  fail(errc::invalid_argument, "unknown cost spec '" + std::string(text) + "'");
}

}  // namespace specs

/// sum_i f(p_i) with the raw generator, passed through the outer map when
/// present. For the shannon spec this is -H(p).
inline double entropy_cost(const dist& p, const cost_spec& spec) {
  double acc = 0.0;
  for (double x : p) acc += detail::finite_or_fail(spec.generator(x), spec.name + " generator");
  if (spec.outer) return detail::finite_or_fail(spec.outer(acc), spec.name + " outer map");
  return acc;
}

/// sum_i q_i f(p_i/q_i) with f(1) = 0, and 0 f(0/0) = 0.
inline double divergence(const dist& p, const dist& q, const cost_spec& spec) {
  require_absolutely_continuous(p, q);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) continue;
    const double fx = spec.outer ? spec.generator(p[i] / q[i]) : spec.f(p[i] / q[i]);
    acc += q[i] * detail::finite_or_fail(fx, spec.name + " generator");
  }
  if (spec.outer) return detail::finite_or_fail(spec.outer(acc), spec.name + " outer map");
  return acc;
}

/// Divergence of the lifted p from the uniform distribution on the
/// elementary space; equals divergence(p, q, spec).
inline double divergence_on_lift(const dist& p, const dist& q, const cost_spec& spec, const lift_options& opts = {}) {
  const auto layout = make_lift_layout(q, opts);
  const auto lifted = lift(p, layout);
  const double alpha = static_cast<double>(layout.alpha);
  double acc = 0.0;
  for (double v : lifted.values) {
    const double fx = spec.outer ? spec.generator(v * alpha) : spec.f(v * alpha);
    acc += detail::finite_or_fail(fx, spec.name + " generator") / alpha;
  }
  if (spec.outer) return detail::finite_or_fail(spec.outer(acc), spec.name + " outer map");
  return acc;
}

struct superadditivity_report {
  double lhs = 0.0;
  double rhs = 0.0;
  double coarse = 0.0;       // C_q(X)
  double conditional = 0.0;  // C_q(Y|X)
  bool holds = false;
  /// Set for f-divergence specs. Only KL satisfies the inequality in general.
  bool claim_applies = false;
};

/// lhs = C_q(p); rhs = C_q(X) + sum_k p(A_k) C_{q(.|A_k)}(p(.|A_k)). Blocks
/// where p has no mass contribute nothing to the conditional term.
inline superadditivity_report check_superadditivity(const dist& p, const dist& q, const partition& part,
                                                    const cost_spec& spec, double tol = 1e-9) {
  require_absolutely_continuous(p, q);
  const auto cp = coarse_grain(p, part);
  const auto cq = coarse_grain(q, part);
  superadditivity_report r;
  r.lhs = divergence(p, q, spec);
  r.coarse = divergence(cp.marginal, cq.marginal, spec);
  for (std::size_t k = 0; k < part.block_count(); ++k) {
    if (!cp.conditionals[k]) continue;
    r.conditional += cp.marginal[k] * divergence(*cp.conditionals[k], *cq.conditionals[k], spec);
  }
  r.rhs = r.coarse + r.conditional;
  r.holds = r.lhs >= r.rhs - tol;
  r.claim_applies = spec.is_f_divergence();
  return r;
}

/// Cost of narrowing a uniform prior over N options to a uniform posterior
/// over M of them: M/N f(N/M) + (N-M)/N f(0).
inline double uniform_cost(std::size_t m, std::size_t n, const cost_spec& spec) {
  if (m < 1 || m > n) fail(errc::invalid_argument, "uniform_cost needs 1 <= M <= N");
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  if (spec.outer) {
    double acc = md / nd * spec.generator(nd / md);
    if (m < n) acc += (nd - md) / nd * spec.generator(0.0);
    return detail::finite_or_fail(spec.outer(detail::finite_or_fail(acc, spec.name + " generator")), spec.name);
  }
  double acc = md / nd * spec.f(nd / md);
  if (m < n) acc += (nd - md) / nd * spec.f(0.0);
  return detail::finite_or_fail(acc, spec.name + " generator");
}

/// True when the relative transfer does not increase the cost, strictly
/// decreasing it for a positive amount and a strictly convex spec.
inline bool schur_monotonicity_check(const dist& p, const dist& q, const relative_transfer<double>& t,
                                     const cost_spec& spec, double tol = 1e-9) {
  const auto moved = apply_relative_transfer(p, q, t);
  const double before = divergence(p, q, spec);
  const double after = divergence(moved, q, spec);
  if (t.amount > 0 && spec.strictly_convex) return after < before;
  return after <= before + tol;
}

}  // namespace brdm
