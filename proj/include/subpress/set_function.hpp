#pragma once

// Real-valued functions on finite subsets of Z^d: the monotone /
// non-negative / invariant / sub-additive / strongly sub-additive property
// checkers, Ornstein-Weiss limit estimation along boxes, and the covering and
// block inequalities for strongly sub-additive functions.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subpress/errors.hpp"
#include "subpress/lattice.hpp"

namespace subpress {

enum class Property : unsigned { monotone = 1, nonnegative = 2, invariant = 4, subadditive = 8, strongly_subadditive = 16 };

inline constexpr Property kAllProperties[] = {Property::monotone, Property::nonnegative, Property::invariant,
                                              Property::subadditive, Property::strongly_subadditive};

inline const char* to_string(Property p) {
  switch (p) {
    case Property::monotone: return "monotone";
    case Property::nonnegative: return "nonnegative";
    case Property::invariant: return "invariant";
    case Property::subadditive: return "subadditive";
    case Property::strongly_subadditive: return "strongly_subadditive";
  }
  return "?";
}

class PropertySet {
 public:
  constexpr PropertySet() = default;
  constexpr PropertySet(std::initializer_list<Property> ps) {
    for (auto p : ps) bits_ |= static_cast<unsigned>(p);
  }
  constexpr bool has(Property p) const { return bits_ & static_cast<unsigned>(p); }
  constexpr PropertySet& add(Property p) {
    bits_ |= static_cast<unsigned>(p);
    return *this;
  }

  static constexpr PropertySet ow_ready() {
    return {Property::monotone, Property::nonnegative, Property::invariant, Property::subadditive};
  }
  static constexpr PropertySet all() {
    return {Property::monotone, Property::nonnegative, Property::invariant, Property::subadditive,
            Property::strongly_subadditive};
  }

 private:
  unsigned bits_ = 0;
};

// Evaluation failure with the offending set attached.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const FiniteSubset& set, const std::string& what)
      : std::runtime_error("evaluation failed on " + set.str() + ": " + what), set_(set) {}
  const FiniteSubset& set() const { return set_; }

 private:
  FiniteSubset set_;
};

// A set function with a thread-safe memo table. The empty set evaluates to 0.
// When declared invariant, cache keys are normalized to lower corner 0.
class SetFunction {
 public:
  using Evaluator = std::function<double(const FiniteSubset&)>;

  SetFunction(Evaluator eval, PropertySet declared = {}, std::string name = "f")
      : state_(std::make_shared<State>()), declared_(declared), name_(std::move(name)) {
    state_->eval = std::move(eval);
  }

  double operator()(const FiniteSubset& F) const {
    if (F.empty()) return 0.0;
    FiniteSubset key = declared_.has(Property::invariant) ? translate(F, -F.lower_corner()) : F;
    {
      std::lock_guard lock(state_->mu);
      if (auto it = state_->cache.find(key); it != state_->cache.end()) return it->second;
    }
    double v;
    try {
      v = state_->eval(F);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(F, e.what());
    }
    std::lock_guard lock(state_->mu);
    state_->cache.emplace(std::move(key), v);
    return v;
  }

  PropertySet declared() const { return declared_; }
  const std::string& name() const { return name_; }
  std::size_t cache_size() const {
    std::lock_guard lock(state_->mu);
    return state_->cache.size();
  }

 private:
  struct State {
    Evaluator eval;
    mutable std::mutex mu;
    std::map<FiniteSubset, double> cache;
  };
  std::shared_ptr<State> state_;
  PropertySet declared_;
  std::string name_;
};

struct PropertyWitness {
  FiniteSubset E, F;
  std::optional<Point> g;
  double lhs = 0, rhs = 0;
};

struct PropertyVerdict {
  Property property;
  bool passed = true;
  std::optional<PropertyWitness> witness;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

struct PropertyReport {
  std::vector<PropertyVerdict> verdicts;

  const PropertyVerdict& operator[](Property p) const {
    for (const auto& v : verdicts)
      if (v.property == p) return v;
    throw InputError("property not in report");
  }
  bool all_passed() const {
    for (const auto& v : verdicts)
      if (!v.passed) return false;
    return true;
  }

  std::vector<nlohmann::ordered_json> records() const {
    std::vector<nlohmann::ordered_json> out;
    for (const auto& v : verdicts) {
      nlohmann::ordered_json j;
      j["property"] = to_string(v.property);
      j["verdict"] = v.passed ? "pass" : "fail";
      if (v.witness) {
        nlohmann::ordered_json w;
        w["E"] = v.witness->E.str();
        w["F"] = v.witness->F.str();
        if (v.witness->g) w["g"] = v.witness->g->str();
        w["lhs"] = v.witness->lhs;
        w["rhs"] = v.witness->rhs;
        j["witness"] = w;
      }
      j["seed"] = v.seed;
      out.push_back(std::move(j));
    }
    return out;
  }
};

namespace detail {

inline bool approx_le(double a, double b) { return a <= b + 1e-9 * (1.0 + std::abs(a) + std::abs(b)); }
inline bool approx_eq(double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a) + std::abs(b)); }

inline FiniteSubset random_subset(std::mt19937_64& rng, int d, Coord max_box) {
  const FiniteSubset B = folner_box(d, max_box);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> pick(0, B.size() - 1);
  std::vector<Point> pts;
  for (const auto& p : B)
    if (coin(rng)) pts.push_back(p);
  if (pts.empty()) pts.push_back(B[pick(rng)]);
  return FiniteSubset(d, std::move(pts));
}

inline Point random_translate(std::mt19937_64& rng, int d, Coord range) {
  std::uniform_int_distribution<Coord> u(-range, range);
  Point g = Point::zero(d);
  for (int i = 0; i < d; ++i) g[i] = u(rng);
  return g;
}

}  // namespace detail

// Randomized counterexample search for each of the five properties. Pairs
// (E, F) are drawn inside [0, max_box)^d; translates from [-max_box, max_box]^d.
inline PropertyReport check_properties(const SetFunction& f, int d, std::size_t sample_count, Coord max_box,
                                       std::uint64_t seed) {
  if (sample_count < 1) throw InputError("check_properties: sample_count must be >= 1");
  if (d < 1 || max_box < 1) throw InputError("check_properties: bad dimension or box size");
  PropertyReport report;
  for (Property p : kAllProperties) report.verdicts.push_back({p, true, std::nullopt, seed, 0});
  auto fail = [&](Property p, PropertyWitness w) {
    for (auto& v : report.verdicts)
      if (v.property == p && v.passed) {
        v.passed = false;
        v.witness = std::move(w);
      }
  };

  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < sample_count; ++s) {
    FiniteSubset E = detail::random_subset(rng, d, max_box);
    FiniteSubset F = detail::random_subset(rng, d, max_box);
    const Point g = detail::random_translate(rng, d, max_box);
    const double fE = f(E), fF = f(F);

    const FiniteSubset EF = set_union(E, F);
    const double fU = f(EF);
    if (!detail::approx_le(fE, fU)) fail(Property::monotone, {E, EF, std::nullopt, fE, fU});
    if (fE < 0.0) fail(Property::nonnegative, {E, E, std::nullopt, fE, 0.0});
    const double fEg = f(translate(E, g));
    if (!detail::approx_eq(fEg, fE)) fail(Property::invariant, {E, E, g, fEg, fE});
    if (!detail::approx_le(fU, fE + fF)) fail(Property::subadditive, {E, F, std::nullopt, fU, fE + fF});
    const double fI = f(set_intersection(E, F));
    if (!detail::approx_le(fU + fI, fE + fF))
      fail(Property::strongly_subadditive, {E, F, std::nullopt, fU + fI, fE + fF});

    // Disjoint singleton pairs are where super-additive growth shows first.
    if (s % 4 == 0) {
      const FiniteSubset a = FiniteSubset::singleton(E[0]);
      const FiniteSubset b = FiniteSubset::singleton(E[0] + Point::axis(d, 0, 1));
      const double fa = f(a), fb = f(b), fab = f(set_union(a, b));
      if (!detail::approx_le(fab, fa + fb)) {
        fail(Property::subadditive, {a, b, std::nullopt, fab, fa + fb});
        fail(Property::strongly_subadditive, {a, b, std::nullopt, fab, fa + fb});
      }
    }
  }
  for (auto& v : report.verdicts) v.samples = sample_count;
  return report;
}

struct OwEstimate {
  std::vector<std::pair<Coord, double>> samples;  // (n, f(F_n)/|F_n|)
  double limit_estimate = 0;
  double inf_estimate = 0;
  bool strongly_subadditive = false;
  double gap = 0;  // limit_estimate - inf_estimate
};

// Normalized values f([0,n)^d)/n^d for n = 1..n_max.
inline OwEstimate ow_limit(const SetFunction& f, int d, Coord n_max) {
  const PropertySet need = PropertySet::ow_ready();
  for (Property p : {Property::monotone, Property::nonnegative, Property::invariant, Property::subadditive})
    if (!need.has(p) || !f.declared().has(p))
      throw InputError(std::string("ow_limit: set function not declared ") + to_string(p));
  if (n_max < 1) throw InputError("ow_limit: n_max must be >= 1");
  OwEstimate est;
  est.inf_estimate = std::numeric_limits<double>::infinity();
  for (Coord n = 1; n <= n_max; ++n) {
    const FiniteSubset box = folner_box(d, n);
    const double v = f(box) / static_cast<double>(box.size());
    est.samples.emplace_back(n, v);
    est.inf_estimate = std::min(est.inf_estimate, v);
  }
  est.limit_estimate = est.samples.back().second;
  est.strongly_subadditive = f.declared().has(Property::strongly_subadditive);
  est.gap = est.limit_estimate - est.inf_estimate;
  if (est.strongly_subadditive && est.limit_estimate < est.inf_estimate)
    throw InvariantViolation("ow_limit: limit estimate below infimum");
  return est;
}

struct InequalityCheck {
  bool passed;
  double lhs;
  double rhs;
  double slack;  // rhs - lhs
};

// If 1_E = (1/m) sum_i 1_{E_i} pointwise then f(E) <= (1/m) sum_i f(E_i).
inline InequalityCheck covering_inequality_check(const SetFunction& f, const FiniteSubset& E,
                                                 const std::vector<FiniteSubset>& parts, int m) {
  if (m < 1) throw InputError("covering_inequality_check: m must be positive");
  std::map<Point, int> mult;
  for (const auto& part : parts) {
    detail::require_same_dim(E, part, "covering_inequality_check");
    for (const auto& p : part) ++mult[p];
  }
  for (const auto& p : E) mult.try_emplace(p, 0);
  for (const auto& [p, c] : mult) {
    const int expect = E.contains(p) ? m : 0;
    if (c != expect)
      throw InputError("covering_inequality_check: indicator identity fails at " + p.str() + " (count " +
                       std::to_string(c) + ", expected " + std::to_string(expect) + ")");
  }
  const double lhs = f(E);
  double sum = 0.0;
  for (const auto& part : parts) sum += f(part);
  const double rhs = sum / m;
  return {detail::approx_le(lhs, rhs), lhs, rhs, rhs - lhs};
}

// f(F) <= sum_{g in F} f(B + g)/|B| + K |F \ A_{F,B}|.
inline InequalityCheck block_bound(const SetFunction& f, const FiniteSubset& F, const FiniteSubset& B,
                                   double K_bound) {
  detail::require_same_dim(F, B, "block_bound");
  const double lhs = f(F);
  double sum = 0.0;
  for (const auto& g : F) sum += f(translate(B, g));
  const double boundary = static_cast<double>(set_difference(F, interior_core(F, B)).size());
  const double rhs = sum / static_cast<double>(B.size()) + K_bound * boundary;
  return {detail::approx_le(lhs, rhs), lhs, rhs, rhs - lhs};
}

}  // namespace subpress
