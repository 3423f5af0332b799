#include "subpress/set_function.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

#include "subpress/measures.hpp"
#include "subpress/symbolic.hpp"

using namespace subpress;

namespace {

SetFunction cardinality() {
  return SetFunction([](const FiniteSubset& F) { return static_cast<double>(F.size()); }, PropertySet::all(), "|F|");
}

// Number of binary words of length n avoiding "11", by the Fibonacci recursion.
double golden_words(Coord n) {
  double a = 1, b = 2;  // lengths 0 and 1
  for (Coord i = 1; i < n; ++i) {
    const double c = a + b;
    a = b;
    b = c;
  }
  return b;
}

}  // namespace

TEST(CheckProperties, CardinalityPassesAll) {
  const auto rep = check_properties(cardinality(), 2, 200, 4, 11);
  EXPECT_TRUE(rep.all_passed());
  for (Property p : kAllProperties) EXPECT_TRUE(rep[p].passed) << to_string(p);
}

TEST(CheckProperties, SquareFailsSubadditivityOnSingletons) {
  SetFunction sq([](const FiniteSubset& F) { return std::pow(static_cast<double>(F.size()), 2); });
  const auto rep = check_properties(sq, 1, 50, 4, 3);
  EXPECT_FALSE(rep[Property::subadditive].passed);
  ASSERT_TRUE(rep[Property::subadditive].witness);
  EXPECT_TRUE(rep[Property::monotone].passed);
  EXPECT_TRUE(rep[Property::invariant].passed);
  const auto& w = *rep[Property::subadditive].witness;
  EXPECT_GT(w.lhs, w.rhs);
}

TEST(CheckProperties, UniformBernoulliEntropyIsStronglySubadditive) {
  const auto space = ShiftSpace::full_shift(1, 2);
  const auto mu = InvariantMeasure::bernoulli({0.5, 0.5});
  const auto f = entropy_set_function(mu, Cover::standard_partition(space), space);
  const auto rep = check_properties(f, 1, 100, 5, 5);
  EXPECT_TRUE(rep[Property::strongly_subadditive].passed);
  EXPECT_TRUE(rep.all_passed());
  EXPECT_NEAR(f(FiniteSubset::line({0, 3, 4})), 3 * std::log(2.0), 1e-12);
}

TEST(CheckProperties, RecordsAreSerializable) {
  const auto recs = check_properties(cardinality(), 1, 5, 3, 9).records();
  ASSERT_EQ(recs.size(), 5u);
  EXPECT_EQ(recs[0]["verdict"], "pass");
  EXPECT_EQ(recs[0]["seed"], 9);
  EXPECT_FALSE(recs[0].contains("witness"));
}

TEST(CheckProperties, RejectsZeroSamples) { EXPECT_THROW(check_properties(cardinality(), 1, 0, 3, 1), InputError); }

TEST(SetFunction, EvaluatorFailureCarriesSet) {
  SetFunction bad([](const FiniteSubset& F) -> double {
    if (F.size() > 2) throw std::runtime_error("too big");
    return 0.0;
  });
  try {
    bad(FiniteSubset::line({0, 1, 2}));
    FAIL();
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.set(), FiniteSubset::line({0, 1, 2}));
  }
}

TEST(SetFunction, InvariantCacheCollapsesTranslates) {
  int calls = 0;
  SetFunction f(
      [&](const FiniteSubset& F) {
        ++calls;
        return static_cast<double>(F.size());
      },
      PropertySet::all());
  for (Coord g = -5; g <= 5; ++g) f(translate(FiniteSubset::line({0, 2}), Point({g})));
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(f.cache_size(), 1u);
}

TEST(SetFunction, ConcurrentEvaluationAgrees) {
  const auto f = cardinality();
  std::vector<std::thread> ts;
  std::vector<double> out(8);
  for (int i = 0; i < 8; ++i)
    ts.emplace_back([&, i] { out[static_cast<std::size_t>(i)] = f(folner_box(2, 3 + i % 2)); });
  for (auto& t : ts) t.join();
  for (int i = 0; i < 8; ++i) EXPECT_EQ(out[static_cast<std::size_t>(i)], i % 2 ? 16.0 : 9.0);
}

TEST(OwLimit, Cardinality) {
  const auto est = ow_limit(cardinality(), 1, 10);
  for (const auto& [n, v] : est.samples) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(est.limit_estimate, 1.0);
}

TEST(OwLimit, ScaledCardinalityDoesNotDrift) {
  const double c = 0.37;
  SetFunction f([=](const FiniteSubset& F) { return c * static_cast<double>(F.size()); }, PropertySet::all());
  for (int d = 1; d <= 2; ++d)
    for (const auto& [n, v] : ow_limit(f, d, 8).samples) EXPECT_NEAR(v, c, 1e-15);
}

TEST(OwLimit, ConstantVanishes) {
  SetFunction f([](const FiniteSubset&) { return 2.0; }, PropertySet::ow_ready());
  const auto est = ow_limit(f, 1, 40);
  EXPECT_LE(est.limit_estimate, 2.0 / 40 + 1e-15);
  EXPECT_EQ(est.inf_estimate, est.limit_estimate);
}

TEST(OwLimit, GoldenMeanWordCount) {
  SetFunction f([](const FiniteSubset& F) { return std::log(golden_words(static_cast<Coord>(F.size()))); },
                PropertySet::ow_ready());
  const auto est = ow_limit(f, 1, 32);
  // log(F_{n+2})/n approaches log(phi) like log(phi^2/sqrt 5)/n.
  const double lphi = std::log((1 + std::sqrt(5.0)) / 2);
  EXPECT_NEAR(est.limit_estimate, lphi, 0.02);
  EXPECT_GT(est.limit_estimate, lphi);
}

TEST(OwLimit, RequiresDeclaredProperties) {
  SetFunction f([](const FiniteSubset& F) { return static_cast<double>(F.size()); });
  EXPECT_THROW(ow_limit(f, 1, 3), InputError);
}

TEST(OwLimit, DoublingMonotoneForStronglySubadditive) {
  const auto space = ShiftSpace::golden_mean();
  const auto mu = InvariantMeasure::markov({{0.7, 0.3}, {1.0, 0.0}});
  const auto f = entropy_set_function(mu, Cover::standard_partition(space), space);
  const auto est = ow_limit(f, 1, 16);
  for (Coord n : {1, 2, 4, 8})
    EXPECT_LE(est.samples[static_cast<std::size_t>(2 * n - 1)].second, est.samples[static_cast<std::size_t>(n - 1)].second + 1e-15);
}

TEST(CoveringInequality, Examples) {
  EXPECT_EQ(covering_inequality_check(cardinality(), FiniteSubset::line({0, 1}), {FiniteSubset::line({0, 1})}, 1).slack, 0.0);
  const std::vector<FiniteSubset> parts{FiniteSubset::line({0, 1}), FiniteSubset::line({1, 2}), FiniteSubset::line({0, 2})};
  const auto r = covering_inequality_check(cardinality(), FiniteSubset::line({0, 1, 2}), parts, 2);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.slack, 0.0);
}

TEST(CoveringInequality, GoldenMeanEntropy) {
  const auto space = ShiftSpace::golden_mean();
  const auto mu = InvariantMeasure::markov({{0.6180339887498949, 0.3819660112501051}, {1.0, 0.0}});
  const auto f = entropy_set_function(mu, Cover::standard_partition(space), space);
  const std::vector<FiniteSubset> parts{FiniteSubset::line({0, 1}), FiniteSubset::line({1, 2}), FiniteSubset::line({0, 2})};
  const auto r = covering_inequality_check(f, FiniteSubset::line({0, 1, 2}), parts, 2);
  EXPECT_TRUE(r.passed);
  EXPECT_GE(r.slack, 0.0);
}

TEST(CoveringInequality, RejectsBadIndicator) {
  EXPECT_THROW(covering_inequality_check(cardinality(), FiniteSubset::line({0, 1}), {FiniteSubset::line({0})}, 1), InputError);
}

TEST(BlockBound, Examples) {
  auto r = block_bound(cardinality(), folner_box(1, 5), FiniteSubset::line({0, 1}), 1.0);
  EXPECT_EQ(r.lhs, 5.0);
  EXPECT_EQ(r.rhs, 6.0);
  r = block_bound(cardinality(), folner_box(1, 5), FiniteSubset::line({0}), 1.0);
  EXPECT_EQ(r.lhs, r.rhs);

  const auto space = ShiftSpace::full_shift(1, 2);
  const auto f = entropy_set_function(InvariantMeasure::bernoulli({0.5, 0.5}), Cover::standard_partition(space), space);
  r = block_bound(f, folner_box(1, 4), FiniteSubset::line({0, 1}), std::log(2.0));
  EXPECT_NEAR(r.lhs, 4 * std::log(2.0), 1e-12);
  EXPECT_NEAR(r.rhs, 5 * std::log(2.0), 1e-12);
  EXPECT_TRUE(r.passed);
}
