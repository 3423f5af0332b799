#include "subpress/varprin.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace subpress;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;
const FiniteSubset kSite = FiniteSubset::line({0});

SearchOptions fast() {
  SearchOptions o;
  o.n_entropy = 3;
  o.n_pressure = 6;
  o.restarts = 3;
  return o;
}

}  // namespace

TEST(MaximizeOverBernoulli, GibbsClosedForm) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto P = Potential::additive(kSite, {std::log(3.0), 0.0}, 2);
  const auto r = maximize_over_bernoulli(s, P, Cover::standard_partition(s), fast());
  ASSERT_EQ(r.parameters.size(), 2u);
  EXPECT_NEAR(r.parameters[0], 0.75, 1e-3);
  EXPECT_NEAR(r.best_value, std::log(4.0), 1e-4);
  EXPECT_NEAR(r.gap, 0.0, 1e-3);
  EXPECT_GE(r.gap, -1e-9);
  EXPECT_FALSE(r.trace.empty());
}

TEST(MaximizeOverBernoulli, ZeroPotentialIsUniform) {
  const auto s = ShiftSpace::full_shift(1, 3);
  const auto r = maximize_over_bernoulli(s, Potential::zero(1, 3), Cover::standard_partition(s), fast());
  for (double p : r.parameters) EXPECT_NEAR(p, 1.0 / 3, 1e-3);
  EXPECT_NEAR(r.best_value, std::log(3.0), 1e-6);
  EXPECT_GE(r.gap, -1e-9);
}

TEST(MaximizeOverBernoulli, DegeneratePotentialIsStable) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const double big = 52.5, small = 2.5;
  const auto r = maximize_over_bernoulli(s, Potential::additive(kSite, {big, small}, 2), Cover::standard_partition(s), fast());
  EXPECT_GT(r.parameters[0], 1 - 1e-9);
  EXPECT_NEAR(r.best_value, big, 1e-6);
  EXPECT_TRUE(std::isfinite(r.pressure_estimate));
  EXPECT_GE(r.gap, -1e-9);
}

TEST(MaximizeOverBernoulli, ShiftRaisesValueByConstant) {
  const auto s = ShiftSpace::full_shift(1, 3);
  const auto P = Potential::additive(kSite, {0.4, -0.3, 1.0}, 3);
  const double c = 0.75;
  const auto a = maximize_over_bernoulli(s, P, Cover::standard_partition(s), fast());
  const auto b = maximize_over_bernoulli(s, P.shifted(c), Cover::standard_partition(s), fast());
  EXPECT_NEAR(b.best_value - a.best_value, c, 1e-9);
  EXPECT_NEAR(b.pressure_estimate - a.pressure_estimate, c, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.parameters[i], b.parameters[i], 1e-4);
}

TEST(MaximizeOverBernoulli, OverlapCoverRespectsStep1) {
  const auto s = ShiftSpace::full_shift(1, 3);
  const auto P = Potential::additive(kSite, {0.2, -0.5, 0.1}, 3);
  const auto r = maximize_over_bernoulli(s, P, Cover::from_symbol_sets(s, {{0, 1}, {1, 2}}), fast());
  EXPECT_GE(r.gap, -1e-9);
}

TEST(MaximizeOverBernoulli, Deterministic) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto P = Potential::additive(kSite, {0.3, -0.2}, 2);
  const auto a = maximize_over_bernoulli(s, P, Cover::standard_partition(s), fast());
  const auto b = maximize_over_bernoulli(s, P, Cover::standard_partition(s), fast());
  EXPECT_EQ(a.parameters, b.parameters);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(MaximizeOverMarkov, GoldenMeanParry) {
  const auto g = ShiftSpace::golden_mean();
  auto opt = fast();
  // The ratio estimate converges like phi^(-2n); n = 24 puts it well inside 1e-9.
  opt.n_pressure = 24;
  const auto r = maximize_over_markov(g, Potential::zero(1, 2), Cover::standard_partition(g), opt);
  EXPECT_NEAR(r.best_value, std::log(kPhi), 1e-6);
  ASSERT_EQ(r.parameters.size(), 4u);
  EXPECT_NEAR(r.parameters[0], 1 / kPhi, 1e-3);
  EXPECT_NEAR(r.parameters[1], 1 / (kPhi * kPhi), 1e-3);
  EXPECT_EQ(r.parameters[3], 0.0);
  EXPECT_GE(r.gap, -1e-9);
}

TEST(MaximizeOverMarkov, MatchesBernoulliOnFullShift) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto P = Potential::additive(kSite, {0.9, -0.4}, 2);
  const auto m = maximize_over_markov(s, P, Cover::standard_partition(s), fast());
  const auto b = maximize_over_bernoulli(s, P, Cover::standard_partition(s), fast());
  EXPECT_NEAR(m.best_value, b.best_value, 1e-6);
}

TEST(MaximizeOverMarkov, SingleSymbol) {
  const auto one = ShiftSpace::full_shift(1, 1);
  const auto r = maximize_over_markov(one, Potential::zero(1, 1), Cover::standard_partition(one), fast());
  EXPECT_EQ(r.best_value, 0.0);
}

TEST(MaximizeOverMarkov, Errors) {
  const auto plane = ShiftSpace::full_shift(2, 2);
  EXPECT_THROW(maximize_over_markov(plane, Potential::zero(2, 2), Cover::standard_partition(plane), fast()), InputError);
  // Symbol 1 cannot be followed by anything.
  const ShiftSpace dead(1, 2, {{FiniteSubset::line({0, 1}), {1, 0}}, {FiniteSubset::line({0, 1}), {1, 1}}});
  EXPECT_THROW(maximize_over_markov(dead, Potential::zero(1, 2), Cover::standard_partition(dead), fast()), InputError);
}

TEST(EquilibriumCandidate, ZeroPotentialIsUniform) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto c = equilibrium_candidate(s, Potential::zero(1, 2), Cover::standard_partition(s), 5);
  EXPECT_EQ(c.points.size(), 32u);
  for (double w : c.weights) EXPECT_NEAR(w, 1.0 / 32, 1e-15);
  EXPECT_NEAR(c.marginal[0], 0.5, 1e-14);
  double total = 0;
  for (const auto& row : c.pair_marginal)
    for (double v : row) total += v;
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(EquilibriumCandidate, AdditiveGibbs) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const std::vector<double> a{std::log(3.0), 0.0};
  const auto P = Potential::additive(kSite, a, 2);
  const auto c12 = equilibrium_candidate(s, P, Cover::standard_partition(s), 12);
  EXPECT_NEAR(c12.marginal[0], 0.75, 0.05);
  const auto c1 = equilibrium_candidate(s, P, Cover::standard_partition(s), 1);
  const auto g = gibbs_distribution(a);
  EXPECT_NEAR(c1.marginal[0], g[0], 1e-15);
  EXPECT_NEAR(c1.marginal[1], g[1], 1e-15);
  double total = 0;
  for (double w : c12.weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(EquilibriumCandidate, OnePointPerAtom) {
  const auto g = ShiftSpace::golden_mean();
  const auto c = equilibrium_candidate(g, Potential::zero(1, 2), Cover::standard_partition(g), 6);
  EXPECT_EQ(c.points.size(), 21u);  // admissible words of length 6
  const auto pos = positions_in(c.domain, folner_box(1, 6));
  std::set<Pattern> seen;
  for (const auto& x : c.points) EXPECT_TRUE(seen.insert(restrict_pattern(x, pos)).second);
}

TEST(EquilibriumCandidate, GoldenMeanApproachesParry) {
  const auto g = ShiftSpace::golden_mean();
  const auto parry = InvariantMeasure::markov({{1 / kPhi, 1 / (kPhi * kPhi)}, {1.0, 0.0}});
  std::vector<double> tv;
  for (Coord n : {2, 4, 8, 14})
    tv.push_back(total_variation(equilibrium_candidate(g, Potential::zero(1, 2), Cover::standard_partition(g), n).marginal,
                                 parry.marginal()));
  EXPECT_LT(tv.back(), tv.front());
  EXPECT_LT(tv.back(), 0.03);
}

TEST(EquilibriumCandidate, RejectsCover) {
  const auto s = ShiftSpace::full_shift(1, 3);
  EXPECT_THROW(equilibrium_candidate(s, Potential::zero(1, 3), Cover::from_symbol_sets(s, {{0, 1}, {1, 2}}), 2), InputError);
}

TEST(VerifyStep1, RandomBernoulliMargins) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd(0, 1);
  std::uniform_real_distribution<double> u(0.01, 1);
  for (int t = 0; t < 50; ++t) {
    const int k = 2 + t % 2;
    const auto s = ShiftSpace::full_shift(1, k);
    std::vector<double> a(static_cast<std::size_t>(k)), p(static_cast<std::size_t>(k));
    double z = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = nd(rng);
      z += (p[i] = u(rng));
    }
    for (auto& v : p) v /= z;
    const auto U = t % 4 == 3 ? Cover::from_symbol_sets(s, {{0, 1}, {1, 2}}) : Cover::standard_partition(s);
    const auto rep = verify_step1(s, Potential::additive(kSite, a, k), U, {{"mu", InvariantMeasure::bernoulli(p)}}, 3);
    EXPECT_FALSE(rep.violated());
    EXPECT_GE(rep.records[0].margin, -1e-9) << t;
    EXPECT_GE(rep.records[0].limit_margin, -1e-9) << t;
  }
}

TEST(VerifyStep1, GibbsMeasureIsTight) {
  const auto s = ShiftSpace::full_shift(1, 3);
  const std::vector<double> a{0.5, -1.0, 0.2};
  const auto rep = verify_step1(s, Potential::additive(kSite, a, 3), Cover::standard_partition(s),
                                {{"gibbs", InvariantMeasure::bernoulli(gibbs_distribution(a))}}, 5);
  EXPECT_LE(std::abs(rep.records[0].margin), 1e-3);
  EXPECT_LE(std::abs(rep.records[0].limit_margin), 1e-3);
}

TEST(VerifyStep1, ConstantMatrixIsEntropyGap) {
  const auto s = ShiftSpace::full_shift(1, 2);
  const auto P = Potential::constant_matrix(1, {1, {2.0}}, 2);
  const std::vector<double> p{0.2, 0.8};
  const auto rep = verify_step1(s, P, Cover::standard_partition(s), {{"mu", InvariantMeasure::bernoulli(p)}}, 6);
  const double h = eta(p[0]) + eta(p[1]);
  EXPECT_NEAR(rep.records[0].margin, std::log(2.0) - h, 1e-12);
  EXPECT_NEAR(rep.pressure_estimate, std::log(2.0), 1e-12);
}

TEST(VerifyStep1, MarkovOnGoldenMean) {
  const auto g = ShiftSpace::golden_mean();
  const auto P = Potential::additive(kSite, {0.0, 0.4}, 2);
  const auto rep = verify_step1(g, P, Cover::standard_partition(g),
                                {{"lazy", InvariantMeasure::markov({{0.5, 0.5}, {1.0, 0.0}})},
                                 {"parry", InvariantMeasure::markov({{1 / kPhi, 1 / (kPhi * kPhi)}, {1.0, 0.0}})}},
                                8);
  for (const auto& r : rep.records) EXPECT_GE(r.margin, -1e-9) << r.measure;
}
