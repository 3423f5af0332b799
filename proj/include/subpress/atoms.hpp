#pragma once

// Atoms of the generated partition of a join U_E. An atom is labelled by the
// tuple of generated-partition atoms of U seen through each translate g in E;
// a set of atoms fits inside a single element of U_E exactly when, slot by
// slot, their element masks share a common bit.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "subpress/symbolic.hpp"

namespace subpress {

struct Atom {
  std::vector<std::uint32_t> key;  // generated-partition atom of U per slot g in E
  double log_weight = -std::numeric_limits<double>::infinity();  // sup of the weight function
  Pattern argmax;  // lexicographically first maximizer on the domain
  double mass = 0.0;
};

struct AtomSystem {
  FiniteSubset domain;
  std::size_t slots = 0;
  std::vector<Atom> atoms;                  // ordered by key
  std::vector<std::uint64_t> slot_masks;    // atoms.size() * slots cover-element masks
  bool partition = false;                   // no two atoms can share a block

  std::uint64_t mask(std::size_t atom, std::size_t slot) const { return slot_masks[atom * slots + slot]; }

  bool compatible(std::size_t a, std::size_t b) const {
    for (std::size_t s = 0; s < slots; ++s)
      if ((mask(a, s) & mask(b, s)) == 0) return false;
    return true;
  }
};

struct AtomOptions {
  const FiniteSubset* extra_domain = nullptr;  // sites needed by the weight function
  bool keep_argmax = false;
};

// Streams the admissible patterns on W_E (plus any extra sites) once and
// accumulates per-atom sup of `log_weight(x)` and sum of `mass(x)`.
// Either callable may be null (std::nullptr_t) to skip it.
template <class WeightFn, class MassFn>
AtomSystem build_atoms(const ShiftSpace& space, const GeneratedPartition& gp, const FiniteSubset& E, WeightFn&& log_weight,
                       MassFn&& mass, const AtomOptions& opt = {}, const Limits& limits = {}) {
  constexpr bool has_weight = !std::is_same_v<std::decay_t<WeightFn>, std::nullptr_t>;
  constexpr bool has_mass = !std::is_same_v<std::decay_t<MassFn>, std::nullptr_t>;
  const int k = space.alphabet();
  const FiniteSubset& W = gp.alpha.window();

  AtomSystem sys;
  sys.slots = E.size();
  FiniteSubset domain = E.empty() ? W : joined_window(W, E);
  if (opt.extra_domain) domain = set_union(domain, *opt.extra_domain);
  sys.domain = domain;

  std::vector<std::vector<int>> pos;
  for (const auto& g : E) pos.push_back(positions_in(domain, translate(W, g)));

  std::map<std::vector<std::uint32_t>, std::size_t> index;
  std::vector<std::uint32_t> key(E.size());
  PatternEnumerator(space, domain, limits).for_each([&](const Pattern& x) {
    for (std::size_t j = 0; j < E.size(); ++j)
      key[j] = static_cast<std::uint32_t>(gp.atom_of_code.at(restricted_code(x, pos[j], k)));
    auto [it, fresh] = index.try_emplace(key, sys.atoms.size());
    if (fresh) {
      if (sys.atoms.size() >= limits.max_atoms) throw BudgetError("atom count exceeds budget");
      sys.atoms.push_back(Atom{key, -std::numeric_limits<double>::infinity(), {}, 0.0});
    }
    Atom& a = sys.atoms[it->second];
    if constexpr (has_weight) {
      const double w = log_weight(x);
      if (w > a.log_weight) {
        a.log_weight = w;
        if (opt.keep_argmax) a.argmax = x;
      }
    } else {
      a.log_weight = 0.0;
    }
    if constexpr (has_mass) a.mass += mass(x);
  });

  // Reorder by key so the output does not depend on enumeration order.
  std::vector<Atom> sorted;
  sorted.reserve(sys.atoms.size());
  for (auto& [kk, i] : index) sorted.push_back(std::move(sys.atoms[i]));
  sys.atoms = std::move(sorted);

  sys.slot_masks.resize(sys.atoms.size() * sys.slots);
  sys.partition = true;
  for (std::size_t a = 0; a < sys.atoms.size(); ++a)
    for (std::size_t s = 0; s < sys.slots; ++s) {
      const std::uint64_t m = gp.membership[sys.atoms[a].key[s]];
      sys.slot_masks[a * sys.slots + s] = m;
      if (m & (m - 1)) sys.partition = false;
    }
  return sys;
}

}  // namespace subpress
