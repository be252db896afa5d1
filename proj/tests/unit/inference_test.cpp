#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "brdm/inference.hpp"
#include "support.hpp"

using namespace brdm;
using brdm::testing::floats;

namespace {

world_model two_coins() {
  return world_model::explicit_grid({floats({0.8, 0.2}), floats({0.3, 0.7})}, floats({0.5, 0.5}));
}

}  // namespace

TEST(Mixture, PmfIsNormalizedAndBimodal) {
  const auto p = mixture_pmf({6, 15, 1.5, 1.5}, integer_points(20));
  double s = 0;
  for (double v : p) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_GT(p[5], p[10]);
  EXPECT_GT(p[14], p[10]);
  EXPECT_NEAR(p[5], p[14], 1e-12);
}

TEST(Mixture, LogPmfMatchesDirectDensity) {
  const mixture_params th{4, 9, 1.0, 2.0};
  const auto pts = integer_points(12);
  const auto lp = mixture_log_pmf(th, pts);
  std::vector<double> raw;
  double z = 0;
  for (double x : pts) {
    const double a = std::exp(-0.5 * (x - 4) * (x - 4)) / std::sqrt(2 * M_PI);
    const double b = std::exp(-0.5 * (x - 9) * (x - 9) / 4) / (2 * std::sqrt(2 * M_PI));
    raw.push_back(0.5 * a + 0.5 * b);
    z += raw.back();
  }
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(std::exp(lp[i]), raw[i] / z, 1e-12);
}

TEST(Grid, DefaultSizeAndSymmetryPruning) {
  const auto m = world_model::mixture_grid(integer_points(20));
  EXPECT_EQ(m.grid_size(), 21u * 22u / 2u * 100u);
  for (const auto& th : m.params()) EXPECT_LE(th.mu1, th.mu2);
  double lo = 1e9, hi = -1e9, slo = 1e9, shi = -1e9;
  for (const auto& th : m.params()) {
    lo = std::min(lo, th.mu1);
    hi = std::max(hi, th.mu2);
    slo = std::min({slo, th.sigma1, th.sigma2});
    shi = std::max({shi, th.sigma1, th.sigma2});
  }
  EXPECT_EQ(lo, 1.0);
  EXPECT_EQ(hi, 20.0);
  EXPECT_EQ(slo, 0.5);
  EXPECT_EQ(shi, 5.0);
}

TEST(Bayes, NoDataKeepsPrior) {
  const auto m = two_coins();
  const auto b = bayes_update(m, dataset{});
  EXPECT_EQ(b.posterior, m.prior());
  EXPECT_NEAR(b.predictive[0], 0.55, 1e-15);
}

TEST(Bayes, SingleGridPointIsCertain) {
  const auto m = world_model::explicit_grid({floats({0.25, 0.75})}, dist::uniform(1));
  const auto b = bayes_update(m, dataset{{0, 1, 1}});
  EXPECT_EQ(b.posterior, dist::dirac(1, 0));
  EXPECT_NEAR(b.predictive[1], 0.75, 1e-15);
}

TEST(Bayes, HandComputedTwoPointPosterior) {
  const auto b = bayes_update(two_coins(), dataset{{0, 0, 1}});
  const double a = 0.8 * 0.8 * 0.2, c = 0.3 * 0.3 * 0.7;
  EXPECT_NEAR(b.posterior[0], a / (a + c), 1e-15);
  EXPECT_NEAR(b.predictive[0], (0.8 * a + 0.3 * c) / (a + c), 1e-15);
}

TEST(Bayes, ZeroEvidence) {
  const auto m = world_model::explicit_grid({floats({1.0, 0.0}), floats({1.0, 0.0})}, dist::uniform(2));
  try {
    bayes_update(m, dataset{{1}});
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::zero_evidence);
  }
}

TEST(Bayes, OrderAndBatchingDoNotMatter) {
  const auto m = world_model::mixture_grid(integer_points(20), {0, 20, 11, 0.5, 5, 4});
  std::mt19937_64 rng(7);
  const auto d = sample_dataset(mixture_pmf({6, 15, 1.5, 1.5}, integer_points(20)), 30, rng);
  const auto all = bayes_update(m, d);
  auto shuffled = d;
  std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
  const auto perm = bayes_update(m, shuffled);
  const auto first = bayes_update(m, d.prefix(11));
  const auto seq = bayes_update(m, first, dataset{{d.samples.begin() + 11, d.samples.end()}});
  for (std::size_t k = 0; k < m.grid_size(); ++k) {
    EXPECT_NEAR(perm.posterior[k], all.posterior[k], 1e-12);
    EXPECT_NEAR(seq.posterior[k], all.posterior[k], 1e-12);
  }
}

TEST(Bayes, PosteriorIsBoltzmannWithAverageLogLikelihood) {
  const auto m = world_model::mixture_grid(integer_points(20), {0, 20, 11, 0.5, 5, 4});
  std::mt19937_64 rng(8);
  const auto world = mixture_pmf({6, 15, 1.5, 1.5}, integer_points(20));
  for (std::size_t n : {1u, 5u, 40u}) {
    const auto r = bayes_as_boltzmann_check(m, sample_dataset(world, n, rng));
    EXPECT_LE(r.max_abs_diff, 1e-10);
  }
  EXPECT_THROW(bayes_as_boltzmann_check(m, dataset{}), error);
}

TEST(MaximumLikelihood, FirstIndexWinsTies) {
  const auto m = world_model::explicit_grid({floats({0.5, 0.5}), floats({0.9, 0.1}), floats({0.5, 0.5})}, dist::uniform(3));
  EXPECT_EQ(ml_estimate(m, dataset{{0, 1}}).index, 0u);
  EXPECT_EQ(ml_estimate(m, dataset{{0, 0, 0}}).index, 1u);
  EXPECT_THROW(ml_estimate(m, dataset{}), error);
}

TEST(Sampling, DeterministicAndFollowsTheDistribution) {
  const auto p = floats({0.1, 0.6, 0.3});
  std::mt19937_64 a(42), b(42);
  const auto da = sample_dataset(p, 20000, a), db = sample_dataset(p, 20000, b);
  EXPECT_EQ(da.samples, db.samples);
  const auto c = da.counts(3);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(c[i] / 20000.0, p[i], 0.015);
  std::mt19937_64 r(1);
  for (int i = 0; i < 1000; ++i) EXPECT_NE(sample_index(floats({0.5, 0.0, 0.5}), r), 1u);
}

TEST(Anytime, PosteriorsSharpenWithData) {
  const auto m = world_model::mixture_grid(integer_points(20), {0, 20, 11, 0.5, 5, 4});
  const auto world = mixture_pmf({6, 15, 1.5, 1.5}, integer_points(20));
  const auto r = anytime_order_check(m, world, {0, 1, 2, 4, 8}, 10, 0);
  EXPECT_EQ(r.pass_rate.front(), 1.0);
  for (std::size_t i = 1; i < r.averaged_entropy.size(); ++i) EXPECT_LT(r.averaged_entropy[i], r.averaged_entropy[i - 1]);
  EXPECT_NEAR(r.averaged_entropy.front(), std::log(double(m.grid_size())), 1e-9);
}
