#include "subpress/measures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace subpress;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;

InvariantMeasure parry() { return InvariantMeasure::markov({{1 / kPhi, 1 / (kPhi * kPhi)}, {1.0, 0.0}}); }

double h2(double p) { return eta(p) + eta(1 - p); }

}  // namespace

TEST(InvariantMeasure, Validation) {
  EXPECT_THROW(InvariantMeasure::bernoulli({0.5, 0.6}), InputError);
  EXPECT_THROW(InvariantMeasure::bernoulli({-0.1, 1.1}), InputError);
  try {
    InvariantMeasure::markov({{0.5, 0.5}, {0.7, 0.2}}, std::nullopt, "measures[0]");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("measures[0].P[1]"), std::string::npos);
  }
  EXPECT_THROW(InvariantMeasure::markov({{0.5, 0.5}, {1, 0}}, std::vector<double>{0.5, 0.5}), InputError);
}

TEST(InvariantMeasure, StationaryVectorOfPeriodicChain) {
  const auto mu = InvariantMeasure::markov({{0.0, 1.0}, {1.0, 0.0}});
  EXPECT_NEAR(mu.marginal()[0], 0.5, 1e-15);
  EXPECT_NEAR(mu.marginal()[1], 0.5, 1e-15);
}

TEST(CylinderProb, Examples) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto u = InvariantMeasure::bernoulli({0.5, 0.5});
  EXPECT_EQ(u.cylinder(ClopenSet::product(s, FiniteSubset::line({0}), {{0}})), 0.5);
  const auto b = InvariantMeasure::bernoulli({1.0 / 3, 2.0 / 3});
  EXPECT_NEAR(b.cylinder(folner_box(1, 2), {0, 1}), 2.0 / 9, 1e-16);
  const auto m = InvariantMeasure::markov({{0.3, 0.7}, {1.0, 0.0}});
  EXPECT_EQ(m.cylinder(folner_box(1, 2), {1, 1}), 0.0);
}

TEST(CylinderProb, MarkovRejectsHigherDimension) {
  EXPECT_THROW(parry().cylinder(folner_box(2, 1), {0}), InputError);
  EXPECT_THROW(parry().check_space(ShiftSpace::full_shift(2, 2)), InputError);
}

TEST(CylinderProb, GapsAreSummedOut) {
  const auto m = InvariantMeasure::markov({{0.3, 0.7}, {0.6, 0.4}});
  const FiniteSubset gap = FiniteSubset::line({0, 3});
  const auto s = ShiftSpace::full_shift(1, 2);
  for (Symbol a : {0, 1})
    for (Symbol c : {0, 1}) {
      double direct = 0;
      PatternEnumerator(s, folner_box(1, 4)).for_each([&](const Pattern& x) {
        if (x[0] == a && x[3] == c) direct += m.cylinder(folner_box(1, 4), x);
      });
      EXPECT_NEAR(m.cylinder(gap, {a, c}), direct, 1e-15);
    }
}

TEST(CylinderProb, TranslationInvariantAndNormalized) {
  const auto s = ShiftSpace::golden_mean();
  const auto m = parry();
  double total = 0;
  PatternEnumerator(s, folner_box(1, 6)).for_each([&](const Pattern& x) {
    const double p = m.cylinder(folner_box(1, 6), x);
    total += p;
    EXPECT_NEAR(p, m.cylinder(translate(folner_box(1, 6), Point({17})), x), 1e-16);
  });
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(PartitionEntropy, Examples) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const Cover a = Cover::standard_partition(s);
  EXPECT_NEAR(partition_entropy(InvariantMeasure::bernoulli({0.5, 0.5}), a), std::log(2.0), 1e-15);
  EXPECT_NEAR(partition_entropy(InvariantMeasure::bernoulli({0.75, 0.25}), a), std::log(4.0) - 0.75 * std::log(3.0), 1e-15);
  EXPECT_EQ(partition_entropy(InvariantMeasure::bernoulli({0.75, 0.25}), Cover::trivial(s)), 0.0);
}

TEST(CoverEntropy, Examples) {
  const auto s3 = ShiftSpace::full_shift(1, 3);
  const auto u3 = InvariantMeasure::bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const Cover std3 = Cover::standard_partition(s3);
  EXPECT_NEAR(cover_entropy(u3, std3, Mode::exact, s3).value, partition_entropy(u3, std3), 1e-15);

  const Cover ov = Cover::from_symbol_sets(s3, {{0, 1}, {1, 2}});
  const auto ex = cover_entropy(u3, ov, Mode::exact, s3);
  EXPECT_NEAR(ex.value, h2(2.0 / 3), 1e-12);
  EXPECT_TRUE(ex.certified);
  EXPECT_LE(ex.value, cover_entropy(u3, ov, Mode::greedy, s3).value + 1e-15);

  const FiniteSubset w = FiniteSubset::line({0});
  const Cover withX(w, {ClopenSet::product(s3, w, {{2}}), ClopenSet::whole(s3, w)});
  EXPECT_EQ(cover_entropy(u3, withX, Mode::exact, s3).value, 0.0);
}

TEST(CoverEntropy, ExactNeverAboveGreedy) {
  std::mt19937_64 rng(3);
  const auto s = ShiftSpace::full_shift(1, 3);
  std::uniform_real_distribution<double> u(0.05, 1);
  const Cover ov = Cover::from_symbol_sets(s, {{0, 1}, {1, 2}, {0, 2}});
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p{u(rng), u(rng), u(rng)};
    const double z = p[0] + p[1] + p[2];
    for (auto& v : p) v /= z;
    const auto mu = InvariantMeasure::bernoulli(p);
    const auto F = folner_box(1, 2);
    EXPECT_LE(join_cover_entropy(mu, ov, F, Mode::exact, s).value, join_cover_entropy(mu, ov, F, Mode::greedy, s).value + 1e-12);
  }
}

TEST(CoverEntropy, ExactBudgetRecommendsGreedy) {
  const auto s = ShiftSpace::full_shift(1, 3);
  const auto mu = InvariantMeasure::bernoulli({0.2, 0.3, 0.5});
  const Cover ov = Cover::from_symbol_sets(s, {{0, 1}, {1, 2}});
  try {
    join_cover_entropy(mu, ov, folner_box(1, 4), Mode::exact, s);
    FAIL();
  } catch (const BudgetError& e) {
    EXPECT_NE(std::string(e.what()).find("greedy"), std::string::npos);
  }
}

TEST(EntropyRate, BernoulliIsConstant) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto mu = InvariantMeasure::bernoulli({0.3, 0.7});
  const auto r = entropy_rate(mu, Cover::standard_partition(s), 8, s);
  for (double v : r.normalized) EXPECT_NEAR(v, h2(0.3), 1e-14);
  ASSERT_TRUE(r.closed_form);
  EXPECT_NEAR(*r.closed_form, h2(0.3), 1e-15);
}

TEST(EntropyRate, BernoulliTwoDimensional) {
  const auto s = ShiftSpace::full_shift(2, 2);
  const auto mu = InvariantMeasure::bernoulli({0.5, 0.5});
  for (double v : entropy_rate(mu, Cover::standard_partition(s), 3, s).normalized) EXPECT_NEAR(v, std::log(2.0), 1e-14);
}

TEST(EntropyRate, GoldenMeanParry) {
  const auto s = ShiftSpace::golden_mean();
  const auto r = entropy_rate(parry(), Cover::standard_partition(s), 20, s);
  EXPECT_NEAR(r.estimate, std::log(kPhi), 1e-6);
  ASSERT_TRUE(r.closed_form);
  EXPECT_NEAR(*r.closed_form, std::log(kPhi), 1e-12);
  for (std::size_t i = 1; i < r.inf_to_date.size(); ++i) EXPECT_LE(r.inf_to_date[i], r.inf_to_date[i - 1]);
  // H(alpha_[0,n)) = H(pi) + (n - 1) h
  const double Hpi = eta(parry().marginal()[0]) + eta(parry().marginal()[1]);
  EXPECT_NEAR(r.entropies[19], Hpi + 19 * std::log(kPhi), 1e-10);
}

TEST(EntropyRate, TrivialPartition) {
  const auto s = ShiftSpace::full_shift(1, 2);
  EXPECT_EQ(entropy_rate(InvariantMeasure::bernoulli({0.4, 0.6}), Cover::trivial(s), 5, s).estimate, 0.0);
}

TEST(EntropyRate, DoublingMonotone) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto mu = InvariantMeasure::markov({{0.9, 0.1}, {0.4, 0.6}});
  const auto r = entropy_rate(mu, Cover::standard_partition(s), 16, s);
  for (std::size_t n : {1, 2, 4, 8}) EXPECT_LE(r.normalized[2 * n - 1], r.normalized[n - 1] + 1e-15);
}

TEST(JoinEntropy, SubadditiveAndMonotone) {
  const auto s = ShiftSpace::full_shift(1, 3);
  const auto mu = InvariantMeasure::bernoulli({0.2, 0.5, 0.3});
  const Cover a = Cover::standard_partition(s);
  const Cover ab = join_over(a, FiniteSubset::line({0, 1}), s);
  const Cover ov = Cover::from_symbol_sets(s, {{0, 1}, {2}});
  EXPECT_LE(partition_entropy(mu, ov), partition_entropy(mu, a) + 1e-15);
  EXPECT_LE(partition_entropy(mu, ab), 2 * partition_entropy(mu, a) + 1e-15);
}

TEST(LocalEntropy, PartitionSqueezes) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto mu = InvariantMeasure::bernoulli({0.3, 0.7});
  const auto le = local_entropy(mu, Cover::standard_partition(s), 4, s);
  EXPECT_NEAR(le.upper, h2(0.3), 1e-14);
  EXPECT_NEAR(le.lower_estimate, h2(0.3), 1e-14);
  EXPECT_TRUE(le.squeezed);
}

TEST(LocalEntropy, OverlapUpperBound) {
  const auto s = ShiftSpace::full_shift(1, 3);
  const auto mu = InvariantMeasure::bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto le = local_entropy(mu, Cover::from_symbol_sets(s, {{0, 1}, {1, 2}}), 3, s);
  EXPECT_EQ(le.candidates, 2u);
  EXPECT_NEAR(le.upper, h2(2.0 / 3), 1e-12);
  EXPECT_LE(le.upper, std::log(2.0));
}

TEST(LocalEntropy, PointMassIsZero) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto mu = InvariantMeasure::bernoulli({1.0, 0.0});
  for (const Cover& U : {Cover::standard_partition(s), Cover::trivial(s)}) {
    const auto le = local_entropy(mu, U, 3, s);
    EXPECT_EQ(le.upper, 0.0);
    EXPECT_EQ(le.lower_estimate, 0.0);
  }
}

TEST(LocalEntropy, RejectsNonRefiningCandidate) {
  const auto s = ShiftSpace::full_shift(1, 3);
  const auto mu = InvariantMeasure::bernoulli({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const Cover U = Cover::from_symbol_sets(s, {{0}, {1, 2}});
  EXPECT_THROW(local_entropy(mu, U, 2, s, {Cover::from_symbol_sets(s, {{0, 1}, {2}})}), InputError);
}
