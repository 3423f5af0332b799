#include "subpress/gibbs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "subpress/errors.hpp"

using namespace subpress;

TEST(GibbsDistribution, Examples) {
  auto p = gibbs_distribution(std::vector<double>{0, 0, 0});
  for (double v : p) EXPECT_NEAR(v, 1.0 / 3, 1e-15);
  p = gibbs_distribution(std::vector<double>{std::log(2.0), 0});
  EXPECT_NEAR(p[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3, 1e-15);
  p = gibbs_distribution(std::vector<double>{1000, 1000 + std::log(3.0)});
  EXPECT_NEAR(p[0], 0.25, 1e-12);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
}

TEST(GibbsDistribution, RejectsEmpty) { EXPECT_THROW(gibbs_distribution(std::vector<double>{}), InputError); }

TEST(GibbsInequality, Examples) {
  auto r = gibbs_inequality(std::vector<double>{0, 0}, std::vector<double>{0.5, 0.5});
  EXPECT_NEAR(r.lhs, std::log(2.0), 1e-15);
  EXPECT_NEAR(r.rhs, std::log(2.0), 1e-15);
  EXPECT_TRUE(r.equality);

  r = gibbs_inequality(std::vector<double>{1, 0}, std::vector<double>{1, 0});
  EXPECT_DOUBLE_EQ(r.lhs, 1.0);
  EXPECT_NEAR(r.rhs, 1.313261687518223, 1e-12);
  EXPECT_FALSE(r.equality);

  r = gibbs_inequality(std::vector<double>{std::log(3.0), 0}, std::vector<double>{0.75, 0.25});
  EXPECT_NEAR(r.lhs, std::log(4.0), 1e-15);
  EXPECT_NEAR(r.rhs, std::log(4.0), 1e-15);
  EXPECT_TRUE(r.equality);
}

TEST(GibbsInequality, RejectsUnnormalized) {
  EXPECT_THROW(gibbs_inequality(std::vector<double>{0, 0}, std::vector<double>{0.5, 0.6}), InputError);
  EXPECT_THROW(gibbs_inequality(std::vector<double>{0, 0}, std::vector<double>{1.0}), InputError);
}

TEST(GibbsInequality, RandomWeightsEqualityOnlyAtGibbs) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-50, 50);
  std::uniform_int_distribution<int> len(1, 8);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(static_cast<std::size_t>(len(rng)));
    for (auto& v : a) v = u(rng);
    if (t % 2) for (auto& v : a) v += 1000;
    const auto g = gibbs_distribution(a);
    const auto at = gibbs_inequality(a, g);
    EXPECT_TRUE(at.equality);
    EXPECT_LE(std::abs(at.lhs - at.rhs), 1e-12 * (1 + std::abs(at.rhs)));

    // A perturbed vector is strictly below.
    if (a.size() < 2) continue;
    std::vector<double> q(a.size());
    std::uniform_real_distribution<double> w(0.1, 1.0);
    double s = 0;
    for (auto& v : q) s += (v = w(rng));
    for (auto& v : q) v /= s;
    const auto off = gibbs_inequality(a, q);
    EXPECT_LE(off.lhs, off.rhs);
  }
}

TEST(LogSumExp, StreamingMatchesBatch) {
  std::vector<double> a{-800, -801, 3, 700, 705};
  LogSumExp acc;
  for (double v : a) acc.add(v);
  EXPECT_NEAR(acc.value(), log_sum_exp(a), 1e-12);
  EXPECT_TRUE(std::isinf(LogSumExp().value()));
}

TEST(Eta, ZeroConvention) {
  EXPECT_EQ(eta(0.0), 0.0);
  EXPECT_EQ(eta(1.0), 0.0);
  EXPECT_NEAR(eta(0.5), 0.5 * std::log(2.0), 1e-16);
}
