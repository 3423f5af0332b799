#pragma once

// Shift spaces over Z^d, patterns on finite windows, clopen sets given as
// pattern lists, covers, partitions, pull-backs and joins.
//
// Action convention: (g.x)(h) = x(h + g). A pattern on a window W is stored
// as a symbol vector aligned with W's sorted order; translating W keeps that
// order, so the pull-back of a clopen set only moves its window.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "subpress/errors.hpp"
#include "subpress/lattice.hpp"

namespace subpress {

using Symbol = std::uint8_t;
using Pattern = std::vector<Symbol>;

struct Limits {
  std::size_t max_enumeration = 200'000'000;  // leaves visited by one pattern enumeration
  std::size_t max_stored_patterns = 4'000'000;
  std::size_t max_atoms = std::size_t{1} << 20;
  std::size_t max_cover_elements = 16;
  std::size_t exact_atoms = 40;             // branch-and-bound atom cap for pressure terms
  std::size_t exact_nodes = 5'000'000;      // branch-and-bound node cap
  std::size_t entropy_exact_atoms = 24;     // cover-entropy exact mode caps
  std::size_t entropy_exact_elements = 8;
  std::size_t matrix_nodes = 2'000'000;     // product search nodes in matrix potentials
};

struct ForbiddenPattern {
  FiniteSubset window;
  Pattern pattern;
  bool operator==(const ForbiddenPattern&) const = default;
};

// Base-k code of a pattern, first window element most significant, so code
// order is lexicographic order.
inline std::uint64_t pattern_code(const Pattern& x, int k) {
  std::uint64_t c = 0;
  for (Symbol s : x) c = c * static_cast<std::uint64_t>(k) + s;
  return c;
}

inline Pattern pattern_from_code(std::uint64_t code, std::size_t length, int k) {
  Pattern x(length);
  for (std::size_t i = length; i-- > 0;) {
    x[i] = static_cast<Symbol>(code % static_cast<std::uint64_t>(k));
    code /= static_cast<std::uint64_t>(k);
  }
  return x;
}

inline std::uint64_t ipow(std::uint64_t base, std::size_t e) {
  std::uint64_t r = 1;
  while (e--) r *= base;
  return r;
}

// Indices of `sub` inside `window`; throws when sub is not contained.
inline std::vector<int> positions_in(const FiniteSubset& window, const FiniteSubset& sub) {
  std::vector<int> pos;
  pos.reserve(sub.size());
  for (const auto& p : sub) {
    long i = window.index_of(p);
    if (i < 0) throw InputError("window " + window.str() + " does not contain " + p.str());
    pos.push_back(static_cast<int>(i));
  }
  return pos;
}

inline Pattern restrict_pattern(const Pattern& x, const std::vector<int>& positions) {
  Pattern r(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) r[i] = x[static_cast<std::size_t>(positions[i])];
  return r;
}

inline std::uint64_t restricted_code(const Pattern& x, const std::vector<int>& positions, int k) {
  std::uint64_t c = 0;
  for (int p : positions) c = c * static_cast<std::uint64_t>(k) + x[static_cast<std::size_t>(p)];
  return c;
}

// Pattern of g.x on `target`, read from x given on `domain`:
// (g.x)(h) = x(h + g) for h in target.
inline Pattern shift_pattern(const Pattern& x, const FiniteSubset& domain, const Point& g,
                             const FiniteSubset& target) {
  return restrict_pattern(x, positions_in(domain, translate(target, g)));
}

class ShiftSpace {
 public:
  ShiftSpace() = default;
  ShiftSpace(int dim, int alphabet, std::vector<ForbiddenPattern> forbidden = {})
      : dim_(dim), k_(alphabet), forbidden_(std::move(forbidden)) {
    if (dim_ < 1) throw InputError("shift space: dimension must be >= 1");
    if (k_ < 1 || k_ > 255) throw InputError("shift space: alphabet size must be in [1, 255]");
    for (std::size_t i = 0; i < forbidden_.size(); ++i) {
      const auto& f = forbidden_[i];
      const std::string where = "forbidden[" + std::to_string(i) + "]";
      if (f.window.empty() || f.window.dim() != dim_) throw InputError(where + ".window: bad window");
      if (f.pattern.size() != f.window.size()) throw InputError(where + ".pattern: length differs from window");
      for (Symbol s : f.pattern)
        if (s >= k_) throw InputError(where + ".pattern: symbol out of alphabet");
    }
  }

  static ShiftSpace full_shift(int dim, int k) { return ShiftSpace(dim, k); }
  // Binary words avoiding "11".
  static ShiftSpace golden_mean() { return ShiftSpace(1, 2, {{FiniteSubset::interval(0, 2), {1, 1}}}); }

  int dim() const { return dim_; }
  int alphabet() const { return k_; }
  const std::vector<ForbiddenPattern>& forbidden() const { return forbidden_; }
  bool is_full_shift() const { return forbidden_.empty(); }
  bool operator==(const ShiftSpace&) const = default;

  bool locally_admissible(const FiniteSubset& window, const Pattern& x) const;

  // Admissible 1-step transitions for a one-dimensional space whose
  // forbidden windows fit in two consecutive sites; nullopt otherwise.
  std::optional<std::vector<std::vector<int>>> transfer_matrix() const {
    if (dim_ != 1) return std::nullopt;
    std::vector<std::vector<int>> A(static_cast<std::size_t>(k_), std::vector<int>(static_cast<std::size_t>(k_), 1));
    for (const auto& f : forbidden_) {
      const Coord lo = f.window.lower_corner()[0], hi = f.window.upper_corner()[0];
      if (hi - lo > 1) return std::nullopt;
      if (f.window.size() == 1) {
        for (int j = 0; j < k_; ++j) {
          A[f.pattern[0]][static_cast<std::size_t>(j)] = 0;
          A[static_cast<std::size_t>(j)][f.pattern[0]] = 0;
        }
      } else {
        A[f.pattern[0]][f.pattern[1]] = 0;
      }
    }
    return A;
  }

 private:
  int dim_ = 1;
  int k_ = 2;
  std::vector<ForbiddenPattern> forbidden_;
};

// Lexicographic depth-first enumeration of the locally admissible patterns on
// a window. Forbidden placements are checked as soon as their last site is
// assigned, so inadmissible prefixes are pruned.
class PatternEnumerator {
 public:
  PatternEnumerator(const ShiftSpace& space, FiniteSubset window, const Limits& limits = {})
      : k_(space.alphabet()), window_(std::move(window)), limits_(limits) {
    if (window_.dim() != space.dim() && !window_.empty()) throw InputError("enumerator: window dimension mismatch");
    checks_.resize(window_.size());
    for (const auto& f : space.forbidden()) {
      const Point anchor = f.window[0];
      for (const auto& w : window_) {
        const FiniteSubset placed = translate(f.window, w - anchor);
        if (!placed.subset_of(window_)) continue;
        Check c{positions_in(window_, placed), f.pattern};
        const int last = *std::max_element(c.positions.begin(), c.positions.end());
        checks_[static_cast<std::size_t>(last)].push_back(std::move(c));
      }
    }
  }

  const FiniteSubset& window() const { return window_; }

  // visit(const Pattern&) for each admissible pattern, in lexicographic order.
  // Optionally restrict position i to the symbols in allowed[i].
  template <class Visit>
  std::size_t for_each(Visit&& visit, const std::vector<std::vector<Symbol>>* allowed = nullptr) const {
    std::size_t count = 0;
    Pattern x(window_.size(), 0);
    if (window_.empty()) {
      visit(static_cast<const Pattern&>(x));
      return 1;
    }
    recurse(0, x, count, visit, allowed);
    return count;
  }

  std::vector<Pattern> collect() const {
    std::vector<Pattern> out;
    for_each([&](const Pattern& x) {
      if (out.size() >= limits_.max_stored_patterns)
        throw BudgetError("pattern list on " + std::to_string(window_.size()) + " sites exceeds budget");
      out.push_back(x);
    });
    return out;
  }

 private:
  struct Check {
    std::vector<int> positions;
    Pattern pattern;
  };

  template <class Visit>
  void recurse(std::size_t i, Pattern& x, std::size_t& count, Visit& visit,
               const std::vector<std::vector<Symbol>>* allowed) const {
    auto try_symbol = [&](Symbol s) {
      x[i] = s;
      for (const auto& c : checks_[i]) {
        bool match = true;
        for (std::size_t j = 0; j < c.positions.size(); ++j)
          if (x[static_cast<std::size_t>(c.positions[j])] != c.pattern[j]) {
            match = false;
            break;
          }
        if (match) return;
      }
      if (i + 1 == x.size()) {
        if (++count > limits_.max_enumeration)
          throw BudgetError("pattern enumeration exceeds budget of " + std::to_string(limits_.max_enumeration));
        visit(static_cast<const Pattern&>(x));
      } else {
        recurse(i + 1, x, count, visit, allowed);
      }
    };
    if (allowed) {
      for (Symbol s : (*allowed)[i]) try_symbol(s);
    } else {
      for (int s = 0; s < k_; ++s) try_symbol(static_cast<Symbol>(s));
    }
  }

  int k_;
  FiniteSubset window_;
  Limits limits_;
  std::vector<std::vector<Check>> checks_;
};

inline bool ShiftSpace::locally_admissible(const FiniteSubset& window, const Pattern& x) const {
  if (x.size() != window.size()) throw InputError("pattern length differs from window size");
  for (Symbol s : x)
    if (s >= k_) return false;
  std::vector<std::vector<Symbol>> allowed;
  for (Symbol s : x) allowed.push_back({s});
  return PatternEnumerator(*this, window).for_each([](const Pattern&) {}, &allowed) == 1;
}

// Number of locally admissible patterns on a window.
inline std::size_t count_admissible(const ShiftSpace& space, const FiniteSubset& window, const Limits& limits = {}) {
  return PatternEnumerator(space, window, limits).for_each([](const Pattern&) {});
}

// A random locally admissible pattern on `window` (randomized depth-first
// search with backtracking). Throws if none exists.
inline Pattern random_admissible_pattern(const ShiftSpace& space, const FiniteSubset& window, std::mt19937_64& rng) {
  std::vector<std::vector<Symbol>> allowed(window.size());
  for (auto& a : allowed) {
    for (int s = 0; s < space.alphabet(); ++s) a.push_back(static_cast<Symbol>(s));
    std::shuffle(a.begin(), a.end(), rng);
  }
  PatternEnumerator en(space, window);
  Pattern out;
  struct Found {};
  try {
    en.for_each(
        [&](const Pattern& x) {
          out = x;
          throw Found{};
        },
        &allowed);
  } catch (const Found&) {
    return out;
  }
  throw InputError("no admissible pattern on window " + window.str());
}

// A clopen set: all configurations whose restriction to `window` is one of
// `patterns` (sorted, duplicate free).
class ClopenSet {
 public:
  ClopenSet() = default;
  ClopenSet(FiniteSubset window, std::vector<Pattern> patterns) : window_(std::move(window)), patterns_(std::move(patterns)) {
    for (const auto& p : patterns_)
      if (p.size() != window_.size()) throw InputError("clopen set: pattern length differs from window");
    std::sort(patterns_.begin(), patterns_.end());
    patterns_.erase(std::unique(patterns_.begin(), patterns_.end()), patterns_.end());
  }

  // All admissible patterns on `window` (the whole space X).
  static ClopenSet whole(const ShiftSpace& space, const FiniteSubset& window) {
    return ClopenSet(window, PatternEnumerator(space, window).collect());
  }

  // Product set {x : x(w_i) in symbols[i]}, intersected with admissibility.
  static ClopenSet product(const ShiftSpace& space, const FiniteSubset& window,
                           const std::vector<std::vector<Symbol>>& symbols) {
    if (symbols.size() != window.size()) throw InputError("clopen product: one symbol list per window site");
    std::vector<std::vector<Symbol>> allowed = symbols;
    for (auto& a : allowed) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
      for (Symbol s : a)
        if (s >= space.alphabet()) throw InputError("clopen product: symbol out of alphabet");
    }
    std::vector<Pattern> pats;
    PatternEnumerator(space, window).for_each([&](const Pattern& x) { pats.push_back(x); }, &allowed);
    return ClopenSet(window, std::move(pats));
  }

  const FiniteSubset& window() const { return window_; }
  const std::vector<Pattern>& patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }
  bool contains(const Pattern& x) const { return std::binary_search(patterns_.begin(), patterns_.end(), x); }
  bool operator==(const ClopenSet&) const = default;

 private:
  FiniteSubset window_;
  std::vector<Pattern> patterns_;
};

// The same set described on a larger window.
inline ClopenSet rewindow(const ClopenSet& A, const FiniteSubset& window, const ShiftSpace& space) {
  if (!A.window().subset_of(window)) throw InputError("rewindow: target window must contain the original");
  const auto pos = positions_in(window, A.window());
  std::vector<Pattern> pats;
  PatternEnumerator(space, window).for_each([&](const Pattern& x) {
    if (A.contains(restrict_pattern(x, pos))) pats.push_back(x);
  });
  return ClopenSet(window, std::move(pats));
}

inline ClopenSet pull_back(const ClopenSet& A, const Point& g) { return ClopenSet(translate(A.window(), g), A.patterns()); }

// A finite cover by clopen sets on a common window.
class Cover {
 public:
  Cover() = default;
  Cover(FiniteSubset window, std::vector<ClopenSet> elements) : window_(std::move(window)), elements_(std::move(elements)) {
    if (elements_.empty()) throw InputError("cover: needs at least one element");
    for (const auto& e : elements_)
      if (e.window() != window_) throw InputError("cover: elements must share the cover window");
  }

  // Cylinder partition of `window`: one element per admissible pattern.
  static Cover cylinder_partition(const ShiftSpace& space, const FiniteSubset& window) {
    std::vector<ClopenSet> els;
    PatternEnumerator(space, window).for_each([&](const Pattern& x) { els.emplace_back(window, std::vector<Pattern>{x}); });
    return Cover(window, std::move(els));
  }
  // Partition by the symbol at the origin.
  static Cover standard_partition(const ShiftSpace& space) {
    return cylinder_partition(space, FiniteSubset::singleton(Point::zero(space.dim())));
  }
  static Cover trivial(const ShiftSpace& space) {
    const auto w = FiniteSubset::singleton(Point::zero(space.dim()));
    return Cover(w, {ClopenSet::whole(space, w)});
  }
  // One-site cover {x_0 in S_1}, {x_0 in S_2}, ...
  static Cover from_symbol_sets(const ShiftSpace& space, const std::vector<std::vector<Symbol>>& sets) {
    const auto w = FiniteSubset::singleton(Point::zero(space.dim()));
    std::vector<ClopenSet> els;
    for (const auto& s : sets) els.push_back(ClopenSet::product(space, w, {s}));
    return Cover(w, std::move(els));
  }

  const FiniteSubset& window() const { return window_; }
  const std::vector<ClopenSet>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  bool operator==(const Cover&) const = default;

  // Bitmask of the elements containing each admissible window pattern, keyed
  // by pattern code.
  std::map<std::uint64_t, std::uint64_t> membership(const ShiftSpace& space) const {
    if (elements_.size() > 64) throw BudgetError("cover has more than 64 elements");
    std::map<std::uint64_t, std::uint64_t> m;
    PatternEnumerator(space, window_).for_each([&](const Pattern& x) { m[pattern_code(x, space.alphabet())] = 0; });
    for (std::size_t i = 0; i < elements_.size(); ++i)
      for (const auto& p : elements_[i].patterns()) {
        auto it = m.find(pattern_code(p, space.alphabet()));
        if (it != m.end()) it->second |= std::uint64_t{1} << i;
      }
    return m;
  }

  bool covers(const ShiftSpace& space) const {
    for (const auto& [code, mask] : membership(space))
      if (mask == 0) return false;
    return true;
  }

  bool is_partition(const ShiftSpace& space) const {
    for (const auto& [code, mask] : membership(space))
      if (mask == 0 || (mask & (mask - 1)) != 0) return false;
    return true;
  }

  void validate(const ShiftSpace& space, const std::string& where = "cover") const {
    if (window_.dim() != space.dim()) throw InputError(where + ": window dimension mismatch");
    PatternEnumerator en(space, window_);
    for (std::size_t i = 0; i < elements_.size(); ++i)
      for (const auto& p : elements_[i].patterns())
        for (Symbol s : p)
          if (s >= space.alphabet()) throw InputError(where + ".elements[" + std::to_string(i) + "]: symbol out of alphabet");
    if (!covers(space)) throw InputError(where + ": elements do not cover every admissible pattern on the window");
  }

 private:
  FiniteSubset window_;
  std::vector<ClopenSet> elements_;
};

inline Cover pull_back(const Cover& U, const Point& g) {
  std::vector<ClopenSet> els;
  for (const auto& e : U.elements()) els.push_back(pull_back(e, g));
  return Cover(translate(U.window(), g), std::move(els));
}

// Union of the translated windows W + g, g in F.
inline FiniteSubset joined_window(const FiniteSubset& W, const FiniteSubset& F) { return sumset(F, W); }

// U_F = join over g in F of g^{-1}U, with empty intersections pruned. Elements
// are ordered by their index tuple. F empty gives the trivial cover {X}.
inline Cover join_over(const Cover& U, const FiniteSubset& F, const ShiftSpace& space, const Limits& limits = {}) {
  if (F.empty()) return Cover(U.window(), {ClopenSet::whole(space, U.window())});
  const FiniteSubset Wj = joined_window(U.window(), F);
  const int k = space.alphabet();
  const auto mem = U.membership(space);
  std::vector<std::vector<int>> pos;
  for (const auto& g : F) pos.push_back(positions_in(Wj, translate(U.window(), g)));

  std::map<std::vector<std::uint8_t>, std::vector<Pattern>> cells;
  std::size_t stored = 0;
  std::vector<std::vector<std::uint8_t>> choices(F.size());
  PatternEnumerator(space, Wj, limits).for_each([&](const Pattern& x) {
    for (std::size_t j = 0; j < F.size(); ++j) {
      choices[j].clear();
      const std::uint64_t mask = mem.at(restricted_code(x, pos[j], k));
      for (std::size_t e = 0; e < U.size(); ++e)
        if (mask >> e & 1) choices[j].push_back(static_cast<std::uint8_t>(e));
    }
    std::vector<std::uint8_t> tuple(F.size());
    std::function<void(std::size_t)> expand = [&](std::size_t j) {
      if (j == F.size()) {
        if (++stored > limits.max_stored_patterns) throw BudgetError("join_over: output exceeds pattern budget");
        cells[tuple].push_back(x);
        return;
      }
      for (auto e : choices[j]) {
        tuple[j] = e;
        expand(j + 1);
      }
    };
    expand(0);
  });
  std::vector<ClopenSet> els;
  for (auto& [tuple, pats] : cells) els.emplace_back(Wj, std::move(pats));
  return Cover(Wj, std::move(els));
}

struct GeneratedPartition {
  Cover alpha;                          // atoms, ordered by first pattern
  std::vector<std::uint64_t> membership;  // per atom: bitmask of cover elements containing it
  // Atom index per admissible window pattern code.
  std::map<std::uint64_t, std::size_t> atom_of_code;
  // Whether each atom is a single pattern (then atoms of joins are patterns).
  bool cylinder = false;
};

// Atoms are the classes of admissible window patterns with equal membership
// vectors across the elements of V.
inline GeneratedPartition generated_partition(const Cover& V, const ShiftSpace& space) {
  const auto mem = V.membership(space);
  const int k = space.alphabet();
  std::map<std::uint64_t, std::size_t> atom_of_mask;
  std::vector<std::vector<Pattern>> atoms;
  GeneratedPartition gp;
  for (const auto& [code, mask] : mem) {  // codes ascend, so atoms are ordered by first pattern
    auto [it, fresh] = atom_of_mask.try_emplace(mask, atoms.size());
    if (fresh) {
      atoms.emplace_back();
      gp.membership.push_back(mask);
    }
    atoms[it->second].push_back(pattern_from_code(code, V.window().size(), k));
    gp.atom_of_code[code] = it->second;
  }
  std::vector<ClopenSet> els;
  gp.cylinder = true;
  for (auto& a : atoms) {
    if (a.size() != 1) gp.cylinder = false;
    els.emplace_back(V.window(), std::move(a));
  }
  gp.alpha = Cover(V.window(), std::move(els));
  return gp;
}

// U is finer than V: each element of U lies inside some element of V.
inline bool refines(const Cover& U, const Cover& V, const ShiftSpace& space) {
  const FiniteSubset W = set_union(U.window(), V.window());
  std::vector<ClopenSet> Ur, Vr;
  for (const auto& e : U.elements()) Ur.push_back(rewindow(e, W, space));
  for (const auto& e : V.elements()) Vr.push_back(rewindow(e, W, space));
  for (const auto& u : Ur) {
    bool inside = false;
    for (const auto& v : Vr)
      if (std::includes(v.patterns().begin(), v.patterns().end(), u.patterns().begin(), u.patterns().end())) {
        inside = true;
        break;
      }
    if (!inside) return false;
  }
  return true;
}

}  // namespace subpress
