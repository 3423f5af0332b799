#pragma once

// Cover-relative pressure terms
//
//   P_E(F; U) = min over partitions beta finer than U_E, built from atoms of
//               the partition generated by U_E, of sum_{B in beta} sup_B e^{f_E}
//
// and their normalized limits along boxes [0,n)^d.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subpress/atoms.hpp"
#include "subpress/errors.hpp"
#include "subpress/gibbs.hpp"
#include "subpress/lattice.hpp"
#include "subpress/measures.hpp"
#include "subpress/potentials.hpp"
#include "subpress/set_function.hpp"
#include "subpress/symbolic.hpp"

namespace subpress {

struct PressureTerm {
  FiniteSubset E;
  double log_value = 0;        // log of the best sum found
  double log_lower_bound = 0;  // equals log_value when certified
  bool certified = false;
  bool streamed = false;                // atoms were patterns, summed without storing them
  std::vector<std::size_t> assignment;  // block index per atom (atoms ordered by key)
  std::size_t atoms = 0;
  std::size_t blocks = 0;
  Mode mode = Mode::exact;
};

namespace detail {

struct BlockSolution {
  double value = 0;  // in units of e^{max log weight}
  double lower = 0;
  std::vector<std::size_t> assignment;
  std::size_t blocks = 0;
  bool certified = false;
};

// min over feasible block partitions of sum of block maxima, w already scaled.
inline BlockSolution minimize_block_max(const AtomSystem& sys, const std::vector<double>& w, Mode mode, const Limits& limits) {
  const std::size_t n = sys.atoms.size();
  BlockSolution out;
  out.assignment.assign(n, 0);
  std::vector<std::size_t> ord(n);
  for (std::size_t i = 0; i < n; ++i) ord[i] = i;
  std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });

  // First fit in descending weight: a block's maximum is its first member.
  std::vector<Block> blocks;
  for (std::size_t a : ord) {
    std::size_t b = 0;
    while (b < blocks.size() && !fits(sys, a, blocks[b])) ++b;
    if (b == blocks.size()) {
      blocks.push_back(open_block(sys, a));
      blocks.back().weight = w[a];
    }
    absorb(sys, a, blocks[b]);
    out.assignment[a] = b;
  }
  out.blocks = blocks.size();
  for (const auto& b : blocks) out.value += b.weight;
  if (mode == Mode::greedy) return out;

  // Pairwise incompatible atoms need separate blocks.
  std::vector<std::size_t> indep;
  for (std::size_t a : ord) {
    bool ok = true;
    for (std::size_t b : indep)
      if (sys.compatible(a, b)) {
        ok = false;
        break;
      }
    if (ok) {
      indep.push_back(a);
      out.lower += w[a];
    }
  }
  auto close = [](double ub, double lb) { return ub - lb <= 1e-12 * std::max(1.0, std::abs(ub)); };
  if (close(out.value, out.lower)) {
    out.lower = out.value;
    out.certified = true;
    return out;
  }
  std::size_t max_elems = 0;
  for (auto m : sys.slot_masks) max_elems = std::max<std::size_t>(max_elems, 64 - static_cast<std::size_t>(__builtin_clzll(m | 1)));
  if (n > limits.exact_atoms || max_elems > limits.max_cover_elements) return out;

  // Branch and bound over atoms in descending weight. Joining an existing
  // block is free; opening one costs the atom's weight.
  double best = out.value;
  std::vector<std::size_t> best_assign = out.assignment, cur_assign(n, 0);
  std::vector<Block> cur;
  double cost = 0;
  std::size_t nodes = 0;
  bool exhausted = false;
  std::function<void(std::size_t)> dfs = [&](std::size_t i) {
    if (++nodes > limits.exact_nodes) {
      exhausted = true;
      return;
    }
    if (i == n) {
      if (cost < best - 1e-15) {
        best = cost;
        best_assign = cur_assign;
      }
      return;
    }
    const std::size_t a = ord[i];
    bool any_fit = false;
    for (const auto& b : cur)
      if (fits(sys, a, b)) any_fit = true;
    if (cost + (any_fit ? 0.0 : w[a]) >= best - 1e-15) return;
    for (std::size_t b = 0; b < cur.size() && !exhausted; ++b) {
      if (!fits(sys, a, cur[b])) continue;
      const Block saved = cur[b];
      absorb(sys, a, cur[b]);
      cur_assign[a] = b;
      dfs(i + 1);
      cur[b] = saved;
    }
    if (exhausted || cost + w[a] >= best - 1e-15) return;
    cur.push_back(open_block(sys, a));
    cur.back().weight = w[a];
    cost += w[a];
    cur_assign[a] = cur.size() - 1;
    dfs(i + 1);
    cost -= w[a];
    cur.pop_back();
  };
  dfs(0);
  out.value = best;
  out.assignment = best_assign;
  out.blocks = 1 + *std::max_element(best_assign.begin(), best_assign.end());
  if (!exhausted) {
    out.lower = best;
    out.certified = true;
  }
  return out;
}

inline bool streamable(const ShiftSpace& space, const Potential& P, const Cover& U, const GeneratedPartition& gp,
                       const FiniteSubset& E) {
  return gp.cylinder && U.is_partition(space) && P.dependence(E).subset_of(joined_window(U.window(), E));
}

}  // namespace detail

// Atoms of the partition generated by U_E with log weights sup f_E, plus any
// per-pattern mass. Shared by pressure terms and the Step-1 margin.
template <class MassFn>
AtomSystem pressure_atoms(const ShiftSpace& space, const Potential& P, const Cover& U, const GeneratedPartition& gp,
                          const FiniteSubset& E, MassFn&& mass, bool keep_argmax = false, const Limits& limits = {}) {
  const FiniteSubset D = P.dependence(E);
  const FiniteSubset domain = set_union(joined_window(U.window(), E), D);
  const auto f = P.bind(E, domain, limits.matrix_nodes);
  AtomOptions opt;
  opt.extra_domain = &D;
  opt.keep_argmax = keep_argmax;
  return build_atoms(space, gp, E, [&](const Pattern& x) { return f(x); }, std::forward<MassFn>(mass), opt, limits);
}

inline PressureTerm pressure_term(const ShiftSpace& space, const Potential& P, const Cover& U, const FiniteSubset& E,
                                  Mode mode = Mode::exact, const Limits& limits = {}) {
  if (P.alphabet() != space.alphabet() || P.dim() != space.dim())
    throw InputError("pressure_term: potential does not match the shift space");
  U.validate(space);
  PressureTerm t;
  t.E = E;
  t.mode = mode;
  if (E.empty()) {
    t.certified = true;
    t.atoms = t.blocks = 1;
    t.assignment = {0};
    return t;
  }
  const auto gp = generated_partition(U, space);

  if (detail::streamable(space, P, U, gp, E)) {
    const FiniteSubset Wj = joined_window(U.window(), E);
    t.streamed = t.certified = true;
    if (P.is_zero()) {
      const double count = space.is_full_shift()
                               ? static_cast<double>(Wj.size()) * std::log(static_cast<double>(space.alphabet()))
                               : std::log(static_cast<double>(count_admissible(space, Wj, limits)));
      t.log_value = t.log_lower_bound = count;
      t.atoms = t.blocks = 0;
      return t;
    }
    const auto f = P.bind(E, Wj, limits.matrix_nodes);
    LogSumExp acc;
    std::size_t n = 0;
    PatternEnumerator(space, Wj, limits).for_each([&](const Pattern& x) {
      acc.add(f(x));
      ++n;
    });
    t.log_value = t.log_lower_bound = acc.value();
    t.atoms = t.blocks = n;
    return t;
  }

  const auto sys = pressure_atoms(space, P, U, gp, E, nullptr, false, limits);
  t.atoms = sys.atoms.size();
  double M = -std::numeric_limits<double>::infinity();
  for (const auto& a : sys.atoms) M = std::max(M, a.log_weight);
  if (sys.partition) {
    LogSumExp acc;
    for (const auto& a : sys.atoms) acc.add(a.log_weight);
    t.log_value = t.log_lower_bound = acc.value();
    t.certified = true;
    t.blocks = t.atoms;
    t.assignment.resize(t.atoms);
    for (std::size_t i = 0; i < t.atoms; ++i) t.assignment[i] = i;
    return t;
  }
  std::vector<double> w(sys.atoms.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(sys.atoms[i].log_weight - M);
  const auto sol = detail::minimize_block_max(sys, w, mode, limits);
  t.log_value = M + std::log(sol.value);
  t.log_lower_bound = mode == Mode::exact ? M + std::log(sol.lower) : -std::numeric_limits<double>::infinity();
  if (sol.certified) t.log_lower_bound = t.log_value;
  t.certified = sol.certified;
  t.assignment = sol.assignment;
  t.blocks = sol.blocks;
  return t;
}

inline nlohmann::ordered_json to_json(const PressureTerm& t) {
  nlohmann::ordered_json j;
  j["E"] = t.E.str();
  j["log_P"] = t.log_value;
  j["log_lower_bound"] = t.log_lower_bound;
  j["certified"] = t.certified;
  j["mode"] = to_string(t.mode);
  j["atoms"] = t.atoms;
  j["blocks"] = t.blocks;
  j["streamed"] = t.streamed;
  j["assignment"] = t.assignment;
  return j;
}

struct PressureReport {
  std::vector<Coord> ns;
  std::vector<std::size_t> box_sizes;
  std::vector<PressureTerm> terms;
  std::vector<double> normalized;
  std::vector<std::optional<double>> increments;
  double estimate = 0;
  bool all_certified() const {
    return std::all_of(terms.begin(), terms.end(), [](const PressureTerm& t) { return t.certified; });
  }
};

// Boxes n = 1..n_max. The estimate is the last increment for d = 1 and the
// last normalized value otherwise.
inline PressureReport pressure_limit(const ShiftSpace& space, const Potential& P, const Cover& U, Coord n_max,
                                     Mode mode = Mode::exact, const Limits& limits = {}) {
  if (n_max < 1) throw InputError("pressure_limit: n_max must be >= 1");
  PressureReport r;
  for (Coord n = 1; n <= n_max; ++n) {
    const FiniteSubset F = folner_box(space.dim(), n);
    r.terms.push_back(pressure_term(space, P, U, F, mode, limits));
    r.ns.push_back(n);
    r.box_sizes.push_back(F.size());
    r.normalized.push_back(r.terms.back().log_value / static_cast<double>(F.size()));
    if (n >= 2) {
      const double dv = r.terms.back().log_value - r.terms[r.terms.size() - 2].log_value;
      r.increments.push_back(dv / static_cast<double>(F.size() - r.box_sizes[r.box_sizes.size() - 2]));
    } else {
      r.increments.push_back(std::nullopt);
    }
  }
  r.estimate = (space.dim() == 1 && r.increments.back()) ? *r.increments.back() : r.normalized.back();
  return r;
}

inline PressureReport topological_entropy(const ShiftSpace& space, const Cover& U, Coord n_max, Mode mode = Mode::exact,
                                          const Limits& limits = {}) {
  return pressure_limit(space, Potential::zero(space.dim(), space.alphabet()), U, n_max, mode, limits);
}

struct NamedCover {
  std::string name;
  Cover cover;
};

struct CoverSupReport {
  std::vector<std::string> names;
  std::vector<PressureReport> reports;
  double estimate = -std::numeric_limits<double>::infinity();  // lower bound for the sup over all open covers
  std::size_t best = 0;
};

inline CoverSupReport pressure_sup_over_covers(const ShiftSpace& space, const Potential& P, const std::vector<NamedCover>& covers,
                                               Coord n_max, Mode mode = Mode::exact, const Limits& limits = {}) {
  if (covers.empty()) throw InputError("pressure_sup_over_covers: empty cover list");
  CoverSupReport r;
  for (const auto& c : covers) {
    r.names.push_back(c.name);
    r.reports.push_back(pressure_limit(space, P, c.cover, n_max, mode, limits));
    if (r.reports.back().estimate > r.estimate) {
      r.estimate = r.reports.back().estimate;
      r.best = r.reports.size() - 1;
    }
  }
  return r;
}

// E -> log P_E for the shifted family f_E + C|E|, C the certified C3 bound.
// This is monotone, non-negative, invariant and sub-additive.
inline SetFunction shifted_log_pressure(const ShiftSpace& space, const Potential& P, const Cover& U, Mode mode = Mode::exact,
                                        const Limits& limits = {}) {
  const auto c = compute_constants(P, space);
  if (!c.c3_certified) throw InputError("shifted_log_pressure: no certified C3 constant for this potential");
  const Potential G = P.shifted(c.C3_bound);
  PropertySet props = PropertySet::ow_ready();
  return SetFunction([=](const FiniteSubset& E) { return pressure_term(space, G, U, E, mode, limits).log_value; }, props,
                     "log P_E(shifted)");
}

}  // namespace subpress
