#pragma once

// Sub-additive potential families {f_E} built from locally constant data on a
// window W. f_E(x) reads x on D(E) = union of W + g, g in E, through the
// codes of x|_{W+g}; this makes f_{E+g}(x) = f_E(g.x) hold by construction.
//
//   additive: f_E = sum_{g in E} phi(g.x)
//   matrix:   f_E = min over 1 <= m <= |E|, (g_1..g_m) in E^m of
//             log || M(g_1.x) ... M(g_m.x) ||, ||A|| = sum_ij A_ij
//   custom:   any function of (E, codes)
//
// Every kind also carries a per-site shift c, giving f_E + c|E|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "subpress/errors.hpp"
#include "subpress/lattice.hpp"
#include "subpress/measures.hpp"
#include "subpress/symbolic.hpp"

namespace subpress {

enum class PotentialKind { additive, matrix, custom };

inline const char* to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::additive: return "additive";
    case PotentialKind::matrix: return "matrix";
    case PotentialKind::custom: return "custom";
  }
  return "?";
}

// Row-major n x n non-negative matrix.
struct SquareMatrix {
  int n = 1;
  std::vector<double> a;

  double norm() const {
    double s = 0;
    for (double v : a) s += v;
    return s;
  }
  double min_row_sum() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int j = 0; j < n; ++j) s += a[static_cast<std::size_t>(i * n + j)];
      m = std::min(m, s);
    }
    return m;
  }
  SquareMatrix operator*(const SquareMatrix& o) const {
    SquareMatrix r{n, std::vector<double>(a.size(), 0.0)};
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < n; ++t) {
        const double v = a[static_cast<std::size_t>(i * n + t)];
        if (v == 0.0) continue;
        for (int j = 0; j < n; ++j) r.a[static_cast<std::size_t>(i * n + j)] += v * o.a[static_cast<std::size_t>(t * n + j)];
      }
    return r;
  }
  SquareMatrix scaled(double s) const {
    SquareMatrix r = *this;
    for (double& v : r.a) v *= s;
    return r;
  }
  bool operator==(const SquareMatrix&) const = default;
};

// min over products of length 1..max_len of log ||product||, letters drawn
// with repetition from `letters`. Depth-first search with children in
// ascending norm order. Pruning uses ||A C|| >= ||A|| * minrowsum(C) and
// minrowsum(C) >= s^len(C), s = smallest row sum among the letters.
inline double min_log_product_norm(std::span<const SquareMatrix> letters_in, std::size_t max_len,
                                   std::size_t node_budget = 2'000'000) {
  if (letters_in.empty()) throw InputError("matrix potential: empty product set");
  std::vector<SquareMatrix> letters;
  for (const auto& m : letters_in)
    if (std::find(letters.begin(), letters.end(), m) == letters.end()) letters.push_back(m);
  std::sort(letters.begin(), letters.end(), [](const auto& x, const auto& y) { return x.norm() < y.norm(); });

  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : letters) best = std::min(best, std::log(m.norm()));
  double s = std::numeric_limits<double>::infinity();
  for (const auto& m : letters) s = std::min(s, m.min_row_sum());
  if (!(s < 1.0) || max_len <= 1) return best;  // longer products never have smaller norm
  const double log_s = std::log(s);

  std::size_t nodes = 0;
  // prefix stored as unit-norm matrix plus its log norm
  std::function<void(const SquareMatrix&, double, std::size_t)> dfs = [&](const SquareMatrix& unit, double log_norm,
                                                                         std::size_t len) {
    if (++nodes > node_budget) throw BudgetError("matrix potential: product search exceeds node budget");
    best = std::min(best, log_norm);
    if (len == max_len) return;
    // Any extension by r >= 1 letters has log norm >= log_norm + r log s >= log_norm + (max_len - len) log s.
    if (log_norm + static_cast<double>(max_len - len) * log_s >= best) return;
    std::vector<std::pair<double, SquareMatrix>> kids;
    for (const auto& m : letters) {
      SquareMatrix p = unit * m;
      const double nn = p.norm();
      if (nn <= 0.0) {
        best = -std::numeric_limits<double>::infinity();
        return;
      }
      kids.emplace_back(log_norm + std::log(nn), p.scaled(1.0 / nn));
    }
    std::stable_sort(kids.begin(), kids.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [ln, p] : kids) dfs(p, ln, len + 1);
  };
  for (const auto& m : letters) {
    const double nn = m.norm();
    dfs(m.scaled(1.0 / nn), std::log(nn), 1);
  }
  return best;
}

class Potential;

// A potential bound to (E, domain): precomputed site positions of W + g.
class BoundPotential {
 public:
  double operator()(const Pattern& x) const;
  const FiniteSubset& E() const { return E_; }

 private:
  friend class Potential;
  const Potential* P_ = nullptr;
  FiniteSubset E_;
  std::vector<std::vector<int>> pos_;
  std::size_t matrix_nodes_ = 2'000'000;
};

class Potential {
 public:
  using CustomFn = std::function<double(const FiniteSubset& E, std::span<const std::uint64_t> codes)>;

  static Potential zero(int dim, int k) {
    return additive(FiniteSubset::singleton(Point::zero(dim)), std::vector<double>(static_cast<std::size_t>(k), 0.0), k);
  }

  // table[c] = phi on the window pattern with code c (size k^|W|).
  static Potential additive(FiniteSubset window, std::vector<double> table, int k) {
    Potential P(PotentialKind::additive, std::move(window), k);
    if (table.size() != ipow(static_cast<std::uint64_t>(k), P.window_.size()))
      throw InputError("potential.table: expected " + std::to_string(ipow(static_cast<std::uint64_t>(k), P.window_.size())) +
                       " entries (alphabet^|window|)");
    for (std::size_t i = 0; i < table.size(); ++i)
      if (!std::isfinite(table[i])) throw InputError("potential.table[" + std::to_string(i) + "]: not finite");
    P.table_ = std::move(table);
    return P;
  }

  // One n x n matrix per window pattern code.
  static Potential matrix(FiniteSubset window, std::vector<SquareMatrix> matrices, int k) {
    Potential P(PotentialKind::matrix, std::move(window), k);
    if (matrices.size() != ipow(static_cast<std::uint64_t>(k), P.window_.size()))
      throw InputError("potential.matrices: expected one matrix per window pattern");
    const int n = matrices.front().n;
    for (std::size_t i = 0; i < matrices.size(); ++i) {
      const auto& m = matrices[i];
      const std::string where = "potential.matrices[" + std::to_string(i) + "]";
      if (m.n != n || m.a.size() != static_cast<std::size_t>(n * n)) throw InputError(where + ": wrong size");
      for (double v : m.a) {
        if (!std::isfinite(v)) throw InputError(where + ": non-finite entry");
        if (v < 0.0) throw InputError(where + ": negative entry");
      }
      if (m.norm() <= 0.0) throw InputError(where + ": zero matrix");
    }
    P.matrices_ = std::move(matrices);
    return P;
  }

  static Potential constant_matrix(int dim, SquareMatrix m, int k) {
    return matrix(FiniteSubset::singleton(Point::zero(dim)), std::vector<SquareMatrix>(static_cast<std::size_t>(k), std::move(m)), k);
  }

  static Potential custom(FiniteSubset window, int k, CustomFn fn) {
    Potential P(PotentialKind::custom, std::move(window), k);
    P.custom_ = std::move(fn);
    return P;
  }

  // f_E + c|E|.
  Potential shifted(double c) const {
    Potential P = *this;
    P.site_shift_ += c;
    return P;
  }

  PotentialKind kind() const { return kind_; }
  const FiniteSubset& window() const { return window_; }
  int alphabet() const { return k_; }
  int dim() const { return window_.dim(); }
  double site_shift() const { return site_shift_; }
  const std::vector<double>& table() const { return table_; }
  const std::vector<SquareMatrix>& matrices() const { return matrices_; }
  bool is_zero() const {
    return kind_ == PotentialKind::additive && site_shift_ == 0.0 &&
           std::all_of(table_.begin(), table_.end(), [](double v) { return v == 0.0; });
  }

  // D(E) = union over g in E of W + g.
  FiniteSubset dependence(const FiniteSubset& E) const { return E.empty() ? FiniteSubset(dim()) : joined_window(window_, E); }

  BoundPotential bind(const FiniteSubset& E, const FiniteSubset& domain, std::size_t matrix_nodes = 2'000'000) const {
    BoundPotential b;
    b.P_ = this;
    b.E_ = E;
    b.matrix_nodes_ = matrix_nodes;
    for (const auto& g : E) {
      const FiniteSubset wg = translate(window_, g);
      if (!wg.subset_of(domain)) throw InputError("pattern domain does not contain D(E): missing " + wg.str());
      b.pos_.push_back(positions_in(domain, wg));
    }
    return b;
  }

  // f_E on a pattern over `domain` (must contain D(E)). f_empty = 0.
  double evaluate(const FiniteSubset& E, const FiniteSubset& domain, const Pattern& x) const { return bind(E, domain)(x); }

  double from_codes(const FiniteSubset& E, std::span<const std::uint64_t> codes, std::size_t matrix_nodes = 2'000'000) const {
    if (codes.empty()) return 0.0;
    double v = 0.0;
    switch (kind_) {
      case PotentialKind::additive:
        for (auto c : codes) v += table_[c];
        break;
      case PotentialKind::matrix: {
        // The value depends only on which letters occur and on |E|.
        std::vector<std::uint64_t> key(codes.begin(), codes.end());
        std::sort(key.begin(), key.end());
        key.erase(std::unique(key.begin(), key.end()), key.end());
        key.push_back(codes.size());
        {
          std::lock_guard lock(cache_->mu);
          if (auto it = cache_->values.find(key); it != cache_->values.end()) {
            v = it->second;
            break;
          }
        }
        std::vector<SquareMatrix> letters;
        for (std::size_t i = 0; i + 1 < key.size(); ++i) letters.push_back(matrices_[key[i]]);
        v = min_log_product_norm(letters, codes.size(), matrix_nodes);
        std::lock_guard lock(cache_->mu);
        cache_->values.emplace(std::move(key), v);
        break;
      }
      case PotentialKind::custom: v = custom_(E, codes); break;
    }
    return v + site_shift_ * static_cast<double>(codes.size());
  }

 private:
  Potential(PotentialKind kind, FiniteSubset window, int k) : kind_(kind), window_(std::move(window)), k_(k) {
    if (window_.empty()) throw InputError("potential.window: must be non-empty");
    if (k_ < 1) throw InputError("potential: alphabet must be positive");
  }

  PotentialKind kind_;
  FiniteSubset window_;
  int k_;
  double site_shift_ = 0.0;
  std::vector<double> table_;
  std::vector<SquareMatrix> matrices_;
  CustomFn custom_;
  struct ProductCache {
    std::mutex mu;
    std::map<std::vector<std::uint64_t>, double> values;
  };
  std::shared_ptr<ProductCache> cache_ = std::make_shared<ProductCache>();
};

inline double BoundPotential::operator()(const Pattern& x) const {
  std::vector<std::uint64_t> codes(pos_.size());
  for (std::size_t j = 0; j < pos_.size(); ++j) codes[j] = restricted_code(x, pos_[j], P_->alphabet());
  return P_->from_codes(E_, codes, matrix_nodes_);
}

// Direct sum for additive potentials: sum over g in E of phi(x|W+g).
inline double eval_additive(const Potential& P, const FiniteSubset& E, const FiniteSubset& domain, const Pattern& x) {
  if (P.kind() != PotentialKind::additive) throw InputError("eval_additive: potential is not additive");
  return P.evaluate(E, domain, x);
}

inline double eval_matrix(const Potential& P, const FiniteSubset& E, const FiniteSubset& domain, const Pattern& x,
                          std::size_t node_budget = 2'000'000) {
  if (P.kind() != PotentialKind::matrix) throw InputError("eval_matrix: potential is not a matrix potential");
  return P.bind(E, domain, node_budget)(x);
}

struct PotentialConstants {
  double C3_bound = 0;  // sup (f_E - f_{E u {g}})
  double K_bound = 0;   // sup |f_E| / |E|
  double K1 = 0, K2 = 0;
  bool c3_certified = false;
};

// Certified analytic bounds from the potential data over admissible window
// patterns. Matrix kind: K1 = min entry / max entry, K2 = min entry,
// C3 <= log(1 / (K1^2 K2)); zero entries leave C3 uncertified.
inline PotentialConstants compute_constants(const Potential& P, const ShiftSpace& space) {
  PotentialConstants c;
  const int k = space.alphabet();
  std::vector<std::uint64_t> codes;
  PatternEnumerator(space, P.window()).for_each([&](const Pattern& x) { codes.push_back(pattern_code(x, k)); });
  const double shift = P.site_shift();
  switch (P.kind()) {
    case PotentialKind::additive: {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (auto cc : codes) {
        lo = std::min(lo, P.table()[cc] + shift);
        hi = std::max(hi, P.table()[cc] + shift);
      }
      c.C3_bound = std::max(0.0, -lo);
      c.K_bound = std::max(std::abs(lo), std::abs(hi));
      c.c3_certified = true;
      break;
    }
    case PotentialKind::matrix: {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (auto cc : codes)
        for (double v : P.matrices()[cc].a) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      const double n = P.matrices().front().n;
      c.K2 = lo;
      c.K1 = hi > 0 ? lo / hi : 0.0;
      // f_E <= log(n^2 max); f_E >= |E| min(0, log(n K2)).
      const double up = std::max(0.0, std::log(n * n * hi));
      const double down = lo > 0 ? std::max(0.0, -std::log(n * lo)) : std::numeric_limits<double>::infinity();
      c.K_bound = std::max(up, down) + std::abs(shift);
      if (lo > 0.0) {
        c.C3_bound = std::log(1.0 / (c.K1 * c.K1 * c.K2)) - shift;
        c.c3_certified = true;
      } else {
        c.C3_bound = std::numeric_limits<double>::infinity();
      }
      break;
    }
    case PotentialKind::custom:
      c.C3_bound = std::numeric_limits<double>::infinity();
      c.K_bound = std::numeric_limits<double>::infinity();
      break;
  }
  return c;
}

struct ConditionCheck {
  bool passed = true;
  double worst = -std::numeric_limits<double>::infinity();  // largest observed violation measure
  std::string witness;
};

struct ConditionsReport {
  ConditionCheck c1;      // f_{E u F} <= f_E + f_F, E, F disjoint
  ConditionCheck c2;      // f_{E+g}(x) == f_E(g.x), exact
  ConditionCheck c3;      // empirical sup of f_E - f_{E u {g}} against the certified bound
  std::optional<ConditionCheck> strong;  // additive: f_{E u F} + f_{E n F} == f_E + f_F
  std::optional<ConditionCheck> shifted_monotone;  // g_E = f_E + C|E| monotone under one-site growth
  PotentialConstants constants;
  double c3_empirical_sup = -std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  bool passed() const {
    return c1.passed && c2.passed && c3.passed && (!strong || strong->passed) && (!shifted_monotone || shifted_monotone->passed);
  }
};

// Randomized verification of the three potential conditions. E, F are drawn
// inside [0, max_box)^d; configurations are random admissible patterns on a
// box large enough for every window touched.
inline ConditionsReport check_conditions(const Potential& P, const ShiftSpace& space, std::size_t samples, std::uint64_t seed,
                                         Coord max_box = 3, const Limits& limits = {}) {
  ConditionsReport r;
  r.samples = samples;
  r.seed = seed;
  r.constants = compute_constants(P, space);
  if (P.kind() == PotentialKind::additive) r.strong = ConditionCheck{};
  if (r.constants.c3_certified) r.shifted_monotone = ConditionCheck{};
  const int d = space.dim();
  std::mt19937_64 rng(seed);
  const Coord reach = 2;

  // Domain covering D(E) for E inside [-reach, max_box + reach)^d.
  const Point wlo = P.window().lower_corner(), whi = P.window().upper_corner();
  Point lo = Point::zero(d);
  std::vector<Coord> sides(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    lo[i] = -reach + wlo[i];
    sides[static_cast<std::size_t>(i)] = max_box + 2 * reach + (whi[i] - wlo[i]);
  }
  const FiniteSubset domain = box(lo, sides);
  const double tol = 1e-9;
  auto scale = [](double a, double b) { return 1.0 + std::abs(a) + std::abs(b); };

  std::uniform_int_distribution<Coord> shift(-reach, reach);
  for (std::size_t s = 0; s < samples; ++s) {
    const Pattern x = random_admissible_pattern(space, domain, rng);
    const FiniteSubset A = detail::random_subset(rng, d, max_box);
    // Split A into disjoint E, F.
    std::vector<Point> e, f;
    std::bernoulli_distribution coin(0.5);
    for (const auto& p : A) (coin(rng) ? e : f).push_back(p);
    if (e.empty()) {
      e.push_back(f.back());
      f.pop_back();
    }
    const FiniteSubset E(d, e), F(d, f);
    const double fE = P.evaluate(E, domain, x), fF = P.evaluate(F, domain, x), fEF = P.evaluate(A, domain, x);

    // (C1)
    const double v1 = fEF - (fE + fF);
    r.c1.worst = std::max(r.c1.worst, v1);
    if (v1 > tol * scale(fEF, fE + fF) && r.c1.passed) {
      r.c1.passed = false;
      r.c1.witness = "E=" + E.str() + " F=" + F.str();
    }

    // (C2): f_{E+g}(x) against f_E evaluated on the shifted configuration.
    Point g = Point::zero(d);
    for (int i = 0; i < d; ++i) g[i] = shift(rng);
    const FiniteSubset Eg = translate(E, g);
    const double lhs = P.evaluate(Eg, domain, x);
    const FiniteSubset DE = P.dependence(E);
    const double rhs = P.evaluate(E, DE, shift_pattern(x, domain, g, DE));
    r.c2.worst = std::max(r.c2.worst, std::abs(lhs - rhs));
    if (lhs != rhs && r.c2.passed) {
      r.c2.passed = false;
      r.c2.witness = "E=" + E.str() + " g=" + g.str();
    }

    // (C3) with a site h outside E.
    Point h = Point::zero(d);
    for (int tries = 0; tries < 64; ++tries) {
      for (int i = 0; i < d; ++i) h[i] = std::uniform_int_distribution<Coord>(0, max_box - 1)(rng);
      if (!E.contains(h)) break;
    }
    if (!E.contains(h)) {
      const FiniteSubset Eh = set_union(E, FiniteSubset::singleton(h));
      const double fEh = P.evaluate(Eh, domain, x);
      const double v3 = fE - fEh;
      r.c3_empirical_sup = std::max(r.c3_empirical_sup, v3);
      if (r.constants.c3_certified && v3 > r.constants.C3_bound + tol * scale(v3, r.constants.C3_bound) && r.c3.passed) {
        r.c3.passed = false;
        r.c3.witness = "E=" + E.str() + " g=" + h.str();
      }
      // g_E = f_E + C|E| must not decrease when E grows by one site.
      if (r.shifted_monotone) {
        const double gE = fE + r.constants.C3_bound * static_cast<double>(E.size());
        const double gEh = fEh + r.constants.C3_bound * static_cast<double>(Eh.size());
        if (gEh < gE - tol * scale(gE, gEh) && r.shifted_monotone->passed) {
          r.shifted_monotone->passed = false;
          r.shifted_monotone->witness = "E=" + E.str() + " g=" + h.str();
        }
      }
    }

    // Strong sub-additivity for additive families, on overlapping sets.
    if (r.strong) {
      const FiniteSubset G = detail::random_subset(rng, d, max_box);
      const FiniteSubset U = set_union(A, G), I = set_intersection(A, G);
      const double left = P.evaluate(U, domain, x) + P.evaluate(I, domain, x);
      const double right = fEF + P.evaluate(G, domain, x);
      const double v = std::abs(left - right);
      r.strong->worst = std::max(r.strong->worst, v);
      if (v > tol * scale(left, right) && r.strong->passed) {
        r.strong->passed = false;
        r.strong->witness = "E=" + A.str() + " F=" + G.str();
      }
    }
  }
  if (!r.constants.c3_certified) r.c3.passed = false;
  r.c3.worst = r.c3_empirical_sup;
  (void)limits;
  return r;
}

// sup of f_E over the admissible extensions of B's patterns to D(E) u W_B.
inline double sup_over(const Potential& P, const FiniteSubset& E, const ClopenSet& B, const ShiftSpace& space,
                       const Limits& limits = {}) {
  if (B.empty()) throw InputError("sup_over: empty clopen set");
  const FiniteSubset domain = set_union(P.dependence(E), B.window());
  const auto bpos = positions_in(domain, B.window());
  const auto f = P.bind(E, domain, limits.matrix_nodes);
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  PatternEnumerator(space, domain, limits).for_each([&](const Pattern& x) {
    if (!B.contains(restrict_pattern(x, bpos))) return;
    any = true;
    best = std::max(best, f(x));
  });
  if (!any) throw InputError("sup_over: clopen set has no admissible extension");
  return best;
}

struct LyapunovSample {
  Coord n;
  double value;            // (1/|F_n|) integral of f_{F_n}
  double std_error = 0.0;  // zero for exact evaluation
  bool exact = true;
};

struct LyapunovReport {
  std::vector<LyapunovSample> samples;
  double estimate = 0;
};

// integral phi dmu for an additive potential (exact, over window patterns).
inline double additive_mean(const Potential& P, const InvariantMeasure& mu, const ShiftSpace& space) {
  double s = 0;
  const int k = space.alphabet();
  PatternEnumerator(space, P.window()).for_each([&](const Pattern& x) {
    const double pr = mu.cylinder(P.window(), x);
    if (pr > 0) s += pr * P.table()[pattern_code(x, k)];
  });
  return s + P.site_shift();
}

// integral of f_E dmu by exact enumeration of D(E).
inline double exact_integral(const Potential& P, const InvariantMeasure& mu, const ShiftSpace& space, const FiniteSubset& E,
                             const Limits& limits = {}) {
  if (E.empty()) return 0.0;
  if (P.kind() == PotentialKind::additive) return static_cast<double>(E.size()) * additive_mean(P, mu, space);
  const FiniteSubset D = P.dependence(E);
  const auto f = P.bind(E, D, limits.matrix_nodes);
  double s = 0;
  PatternEnumerator(space, D, limits).for_each([&](const Pattern& x) {
    const double pr = mu.cylinder(D, x);
    if (pr > 0) s += pr * f(x);
  });
  return s;
}

// (1/|F_n|) integral of f_{F_n} dmu along boxes. Additive potentials are exact
// and n-independent. Other kinds use exact cylinder sums when the pattern
// count fits `exact_budget`, otherwise Monte Carlo with `mc_samples` draws.
inline LyapunovReport lyapunov(const Potential& P, const InvariantMeasure& mu, const ShiftSpace& space, Coord n_max,
                               std::size_t exact_budget = 1'000'000, std::size_t mc_samples = 4000, std::uint64_t seed = 1,
                               const Limits& limits = {}) {
  mu.check_space(space);
  if (n_max < 1) throw InputError("lyapunov: n_max must be >= 1");
  LyapunovReport r;
  if (P.kind() == PotentialKind::additive) {
    const double m = additive_mean(P, mu, space);
    for (Coord n = 1; n <= n_max; ++n) r.samples.push_back({n, m, 0.0, true});
    r.estimate = m;
    return r;
  }
  std::mt19937_64 rng(seed);
  for (Coord n = 1; n <= n_max; ++n) {
    const FiniteSubset F = folner_box(space.dim(), n);
    const FiniteSubset D = P.dependence(F);
    const auto f = P.bind(F, D, limits.matrix_nodes);
    const double vol = static_cast<double>(F.size());
    const double log_count = static_cast<double>(D.size()) * std::log(static_cast<double>(space.alphabet()));
    if (log_count <= std::log(static_cast<double>(exact_budget))) {
      r.samples.push_back({n, exact_integral(P, mu, space, F, limits) / vol, 0.0, true});
    } else {
      double s = 0, s2 = 0;
      for (std::size_t i = 0; i < mc_samples; ++i) {
        const double v = f(mu.sample(D, rng)) / vol;
        s += v;
        s2 += v * v;
      }
      const double mean = s / static_cast<double>(mc_samples);
      const double var = std::max(0.0, s2 / static_cast<double>(mc_samples) - mean * mean);
      r.samples.push_back({n, mean, std::sqrt(var / static_cast<double>(mc_samples)), false});
    }
  }
  r.estimate = r.samples.back().value;
  return r;
}

}  // namespace subpress
