#pragma once

// Shift-invariant measures with exact cylinder probabilities (Bernoulli on
// Z^d, stationary Markov on Z), partition and cover entropies, entropy rates
// along boxes, and the two-sided estimate of the local entropy h_mu(G, U).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "subpress/atoms.hpp"
#include "subpress/errors.hpp"
#include "subpress/gibbs.hpp"
#include "subpress/lattice.hpp"
#include "subpress/set_function.hpp"
#include "subpress/symbolic.hpp"

namespace subpress {

using Matrix = std::vector<std::vector<double>>;

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size(), m = b.front().size(), l = b.size();
  Matrix r(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < l; ++t)
      for (std::size_t j = 0; j < m; ++j) r[i][j] += a[i][t] * b[t][j];
  return r;
}

// Solves pi P = pi, sum pi = 1 by Gaussian elimination with partial pivoting.
inline std::vector<double> stationary_vector(const Matrix& P) {
  const std::size_t k = P.size();
  // Rows 0..k-2: (P^T - I) pi = 0; last row: sum pi = 1.
  Matrix A(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i + 1 < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) A[i][j] = P[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < k; ++j) A[k - 1][j] = 1.0;
  A[k - 1][k] = 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-14) throw InputError("markov: stationary vector is not unique");
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j <= k; ++j) A[r][j] -= f * A[c][j];
    }
  }
  std::vector<double> pi(k);
  for (std::size_t i = 0; i < k; ++i) pi[i] = std::max(0.0, A[i][k] / A[i][i]);
  double s = 0;
  for (double v : pi) s += v;
  for (double& v : pi) v /= s;
  return pi;
}

class InvariantMeasure {
 public:
  enum class Kind { bernoulli, markov };

  static InvariantMeasure bernoulli(std::vector<double> p, const std::string& where = "measure") {
    if (p.empty()) throw InputError(where + ".p: empty probability vector");
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i] >= 0.0) || !std::isfinite(p[i])) throw InputError(where + ".p[" + std::to_string(i) + "]: must be >= 0");
      s += p[i];
    }
    if (std::abs(s - 1.0) > 1e-9) throw InputError(where + ".p: sums to " + std::to_string(s) + ", expected 1");
    InvariantMeasure m;
    m.kind_ = Kind::bernoulli;
    m.p_ = std::move(p);
    return m;
  }

  static InvariantMeasure markov(Matrix P, std::optional<std::vector<double>> pi = std::nullopt,
                                 const std::string& where = "measure") {
    const std::size_t k = P.size();
    if (k == 0) throw InputError(where + ".P: empty matrix");
    for (std::size_t i = 0; i < k; ++i) {
      if (P[i].size() != k) throw InputError(where + ".P[" + std::to_string(i) + "]: matrix must be square");
      double s = 0;
      for (double v : P[i]) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(where + ".P[" + std::to_string(i) + "]: negative entry");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-9)
        throw InputError(where + ".P[" + std::to_string(i) + "]: row sums to " + std::to_string(s) + ", expected 1");
    }
    std::vector<double> stat;
    if (pi) {
      stat = *pi;
      if (stat.size() != k) throw InputError(where + ".pi: length differs from P");
      double s = 0;
      for (double v : stat) s += v;
      if (std::abs(s - 1.0) > 1e-9) throw InputError(where + ".pi: does not sum to 1");
      for (std::size_t j = 0; j < k; ++j) {
        double v = 0;
        for (std::size_t i = 0; i < k; ++i) v += stat[i] * P[i][j];
        if (std::abs(v - stat[j]) > 1e-9) throw InputError(where + ".pi: not stationary for P");
      }
    } else {
      stat = stationary_vector(P);
    }
    InvariantMeasure m;
    m.kind_ = Kind::markov;
    m.P_ = std::move(P);
    m.p_ = std::move(stat);
    return m;
  }

  Kind kind() const { return kind_; }
  int alphabet() const { return static_cast<int>(p_.size()); }
  // Single-site marginal: p for Bernoulli, the stationary vector for Markov.
  const std::vector<double>& marginal() const { return p_; }
  const Matrix& transition() const { return P_; }

  void check_space(const ShiftSpace& space) const {
    if (alphabet() != space.alphabet()) throw InputError("measure alphabet differs from the shift space alphabet");
    if (kind_ == Kind::markov && space.dim() != 1) throw InputError("markov measures require dimension 1");
  }

  // Exact probability of the cylinder {x : x|_window = pattern}. Markov gaps
  // are summed out through powers of P.
  double cylinder(const FiniteSubset& window, const Pattern& x) const {
    if (window.size() != x.size()) throw InputError("cylinder: pattern length differs from window");
    if (window.empty()) return 1.0;
    if (kind_ == Kind::bernoulli) {
      double r = 1.0;
      for (Symbol s : x) r *= p_[s];
      return r;
    }
    if (window.dim() != 1) throw InputError("cylinder: markov measures require dimension 1");
    double r = p_[x[0]];
    for (std::size_t i = 1; i < x.size() && r > 0.0; ++i) {
      const Coord gap = window[i][0] - window[i - 1][0];
      r *= gap == 1 ? P_[x[i - 1]][x[i]] : step(gap)[x[i - 1]][x[i]];
    }
    return r;
  }

  double cylinder(const ClopenSet& B) const {
    double s = 0;
    for (const auto& x : B.patterns()) s += cylinder(B.window(), x);
    return s;
  }

  // Closed-form entropy rate: H(p) for Bernoulli, sum_i pi_i H(P_i.) for Markov.
  double entropy_rate_closed_form() const {
    double h = 0;
    if (kind_ == Kind::bernoulli) {
      for (double v : p_) h += eta(v);
      return h;
    }
    for (std::size_t i = 0; i < P_.size(); ++i)
      for (double v : P_[i]) h += p_[i] * eta(v);
    return h;
  }

  // A sample of x restricted to `window`.
  Pattern sample(const FiniteSubset& window, std::mt19937_64& rng) const {
    Pattern x(window.size());
    if (kind_ == Kind::bernoulli) {
      std::discrete_distribution<int> d(p_.begin(), p_.end());
      for (auto& s : x) s = static_cast<Symbol>(d(rng));
      return x;
    }
    if (window.empty()) return x;
    const Coord lo = window[0][0], hi = window[window.size() - 1][0];
    std::discrete_distribution<int> d0(p_.begin(), p_.end());
    int cur = d0(rng);
    std::size_t j = 0;
    for (Coord c = lo; c <= hi; ++c) {
      if (c > lo) {
        std::discrete_distribution<int> row(P_[static_cast<std::size_t>(cur)].begin(), P_[static_cast<std::size_t>(cur)].end());
        cur = row(rng);
      }
      if (window[j][0] == c) x[j++] = static_cast<Symbol>(cur);
    }
    return x;
  }

  bool operator==(const InvariantMeasure&) const = default;

 private:
  Matrix step(Coord gap) const {
    Matrix r = P_;
    for (Coord i = 1; i < gap; ++i) r = mat_mul(r, P_);
    return r;
  }

  Kind kind_ = Kind::bernoulli;
  std::vector<double> p_;
  Matrix P_;
};

// H_mu(alpha) = sum_A -mu(A) log mu(A).
inline double partition_entropy(const InvariantMeasure& mu, const Cover& alpha) {
  double h = 0;
  for (const auto& A : alpha.elements()) h += eta(mu.cylinder(A));
  return h;
}

// H_mu(alpha_F) for a partition alpha. Cylinder partitions stream pattern
// probabilities directly; otherwise atom masses are accumulated first.
inline double join_entropy(const InvariantMeasure& mu, const Cover& alpha, const FiniteSubset& F, const ShiftSpace& space,
                           const Limits& limits = {}) {
  if (F.empty()) return 0.0;
  const auto gp = generated_partition(alpha, space);
  const FiniteSubset Wj = joined_window(alpha.window(), F);
  if (gp.cylinder && alpha.is_partition(space)) {
    double h = 0;
    PatternEnumerator(space, Wj, limits).for_each([&](const Pattern& x) { h += eta(mu.cylinder(Wj, x)); });
    return h;
  }
  if (!alpha.is_partition(space)) throw InputError("join_entropy: alpha must be a partition");
  const auto sys = build_atoms(space, gp, F, nullptr, [&](const Pattern& x) { return mu.cylinder(Wj, x); }, {}, limits);
  double h = 0;
  for (const auto& a : sys.atoms) h += eta(a.mass);
  return h;
}

struct CoverEntropy {
  double value = 0;
  std::vector<std::size_t> assignment;  // block index per atom
  std::size_t blocks = 0;
  bool certified = false;
};

enum class Mode { exact, greedy };

inline const char* to_string(Mode m) { return m == Mode::exact ? "exact" : "greedy"; }

namespace detail {

// Blocks are feasible sets of atoms; each slot keeps the AND of its members'
// element masks.
struct Block {
  std::vector<std::uint64_t> masks;
  double mass = 0;
  double weight = -std::numeric_limits<double>::infinity();
};

inline bool fits(const AtomSystem& sys, std::size_t a, const Block& b) {
  for (std::size_t s = 0; s < sys.slots; ++s)
    if ((sys.mask(a, s) & b.masks[s]) == 0) return false;
  return true;
}

inline Block open_block(const AtomSystem& sys, std::size_t a) {
  Block b;
  b.masks.assign(sys.slot_masks.begin() + static_cast<long>(a * sys.slots),
                 sys.slot_masks.begin() + static_cast<long>((a + 1) * sys.slots));
  return b;
}

inline void absorb(const AtomSystem& sys, std::size_t a, Block& b) {
  for (std::size_t s = 0; s < sys.slots; ++s) b.masks[s] &= sys.mask(a, s);
}

inline std::vector<std::size_t> order_by(const AtomSystem& sys, bool by_mass) {
  std::vector<std::size_t> ord(sys.atoms.size());
  for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
  std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
    return by_mass ? sys.atoms[a].mass > sys.atoms[b].mass : sys.atoms[a].log_weight > sys.atoms[b].log_weight;
  });
  return ord;
}

}  // namespace detail

// min over beta in P*(U_E) of H_mu(beta), with atom masses already in `sys`.
inline CoverEntropy minimize_block_entropy(const AtomSystem& sys, Mode mode, const Limits& limits = {}) {
  CoverEntropy out;
  const std::size_t n = sys.atoms.size();
  out.assignment.assign(n, 0);
  if (sys.partition) {
    for (std::size_t i = 0; i < n; ++i) {
      out.value += eta(sys.atoms[i].mass);
      out.assignment[i] = i;
    }
    out.blocks = n;
    out.certified = true;
    return out;
  }
  const auto ord = detail::order_by(sys, true);

  // Greedy: join the compatible block holding the most mass.
  std::vector<detail::Block> blocks;
  for (std::size_t a : ord) {
    long best = -1;
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (detail::fits(sys, a, blocks[b]) && (best < 0 || blocks[b].mass > blocks[static_cast<std::size_t>(best)].mass))
        best = static_cast<long>(b);
    if (best < 0) {
      blocks.push_back(detail::open_block(sys, a));
      best = static_cast<long>(blocks.size() - 1);
    }
    detail::absorb(sys, a, blocks[static_cast<std::size_t>(best)]);
    blocks[static_cast<std::size_t>(best)].mass += sys.atoms[a].mass;
    out.assignment[a] = static_cast<std::size_t>(best);
  }
  out.blocks = blocks.size();
  for (const auto& b : blocks) out.value += eta(b.mass);
  if (mode == Mode::greedy) return out;

  std::size_t max_elems = 0;
  for (auto m : sys.slot_masks) max_elems = std::max<std::size_t>(max_elems, 64 - static_cast<std::size_t>(__builtin_clzll(m | 1)));
  if (n > limits.entropy_exact_atoms || max_elems > limits.entropy_exact_elements)
    throw BudgetError("cover_entropy: exact mode exceeds " + std::to_string(limits.entropy_exact_atoms) + " atoms x " +
                      std::to_string(limits.entropy_exact_elements) + " elements; use greedy mode");

  // Branch and bound. Lower bound: the final entropy is concave in how the
  // remaining mass is spread, so it is at least the best single-block dump.
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + sys.atoms[ord[i]].mass;
  double best = out.value;
  std::vector<std::size_t> best_assign = out.assignment, cur_assign(n, 0);
  std::vector<detail::Block> cur;
  std::size_t nodes = 0;
  std::function<void(std::size_t)> dfs = [&](std::size_t i) {
    if (++nodes > limits.exact_nodes) throw BudgetError("cover_entropy: branch-and-bound node budget exceeded");
    double h = 0;
    for (const auto& b : cur) h += eta(b.mass);
    if (i == n) {
      if (h < best - 1e-15) {
        best = h;
        best_assign = cur_assign;
      }
      return;
    }
    const double R = suffix[i];
    double dump = eta(R);
    for (const auto& b : cur) dump = std::min(dump, eta(b.mass + R) - eta(b.mass));
    if (h + dump >= best - 1e-15) return;
    const std::size_t a = ord[i];
    for (std::size_t b = 0; b < cur.size(); ++b) {
      if (!detail::fits(sys, a, cur[b])) continue;
      const detail::Block saved = cur[b];
      detail::absorb(sys, a, cur[b]);
      cur[b].mass += sys.atoms[a].mass;
      cur_assign[a] = b;
      dfs(i + 1);
      cur[b] = saved;
    }
    cur.push_back(detail::open_block(sys, a));
    cur.back().mass = sys.atoms[a].mass;
    cur_assign[a] = cur.size() - 1;
    dfs(i + 1);
    cur.pop_back();
  };
  dfs(0);
  out.value = best;
  out.assignment = best_assign;
  out.blocks = 1 + *std::max_element(best_assign.begin(), best_assign.end());
  out.certified = true;
  return out;
}

// H_mu(U) = inf over partitions finer than U, computed over U* (assignments
// of generated atoms to containing elements).
inline CoverEntropy cover_entropy(const InvariantMeasure& mu, const Cover& U, Mode mode, const ShiftSpace& space,
                                  const Limits& limits = {}) {
  const auto gp = generated_partition(U, space);
  const FiniteSubset origin = FiniteSubset::singleton(Point::zero(space.dim()));
  const FiniteSubset& W = U.window();
  const auto sys = build_atoms(space, gp, origin, nullptr, [&](const Pattern& x) { return mu.cylinder(W, x); }, {}, limits);
  return minimize_block_entropy(sys, mode, limits);
}

// H_mu(U_F) over P*(U_F).
inline CoverEntropy join_cover_entropy(const InvariantMeasure& mu, const Cover& U, const FiniteSubset& F, Mode mode,
                                       const ShiftSpace& space, const Limits& limits = {}) {
  const auto gp = generated_partition(U, space);
  const FiniteSubset Wj = joined_window(U.window(), F);
  const auto sys = build_atoms(space, gp, F, nullptr, [&](const Pattern& x) { return mu.cylinder(Wj, x); }, {}, limits);
  return minimize_block_entropy(sys, mode, limits);
}

struct EntropyReport {
  std::vector<Coord> ns;
  std::vector<std::size_t> box_sizes;
  std::vector<double> entropies;   // H_mu(alpha_{F_n})
  std::vector<double> normalized;  // H / |F_n|
  std::vector<double> inf_to_date;
  std::vector<std::optional<double>> increments;  // d = 1: H_n - H_{n-1}
  double estimate = 0;
  std::optional<double> closed_form;  // Markov or Bernoulli closed form, for comparison
};

// Normalized entropies along boxes. The estimate is an upper bound for
// h_mu(G, alpha): the infimum to date, and for d = 1 also the last
// increment, which is a conditional entropy and never below the rate.
inline EntropyReport entropy_rate(const InvariantMeasure& mu, const Cover& alpha, Coord n_max, const ShiftSpace& space,
                                  const Limits& limits = {}) {
  if (n_max < 1) throw InputError("entropy_rate: n_max must be >= 1");
  mu.check_space(space);
  EntropyReport r;
  double inf = std::numeric_limits<double>::infinity();
  for (Coord n = 1; n <= n_max; ++n) {
    const FiniteSubset F = folner_box(space.dim(), n);
    const double H = join_entropy(mu, alpha, F, space, limits);
    r.ns.push_back(n);
    r.box_sizes.push_back(F.size());
    r.entropies.push_back(H);
    r.normalized.push_back(H / static_cast<double>(F.size()));
    inf = std::min(inf, r.normalized.back());
    r.inf_to_date.push_back(inf);
    if (space.dim() == 1 && n >= 2)
      r.increments.push_back(H - r.entropies[r.entropies.size() - 2]);
    else
      r.increments.push_back(std::nullopt);
  }
  r.estimate = r.inf_to_date.back();
  if (r.increments.back()) r.estimate = std::min(r.estimate, *r.increments.back());
  if (alpha.is_partition(space) && generated_partition(alpha, space).cylinder && alpha.window().size() == 1)
    r.closed_form = mu.entropy_rate_closed_form();
  return r;
}

// Every partition in U*: generated atoms assigned to containing elements,
// grouped by element, empty groups dropped. Duplicates removed.
inline std::vector<Cover> default_candidates(const Cover& U, const ShiftSpace& space, std::size_t cap = 4096) {
  const auto gp = generated_partition(U, space);
  const std::size_t na = gp.alpha.size();
  std::vector<std::vector<std::size_t>> options(na);
  std::size_t total = 1;
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t e = 0; e < U.size(); ++e)
      if (gp.membership[a] >> e & 1) options[a].push_back(e);
    total *= options[a].size();
    if (total > cap) throw BudgetError("default_candidates: more than " + std::to_string(cap) + " assignments");
  }
  std::vector<Cover> out;
  std::vector<std::size_t> choice(na, 0);
  for (std::size_t t = 0; t < total; ++t) {
    std::vector<std::vector<Pattern>> groups(U.size());
    std::size_t r = t;
    for (std::size_t a = 0; a < na; ++a) {
      const std::size_t e = options[a][r % options[a].size()];
      r /= options[a].size();
      for (const auto& p : gp.alpha.elements()[a].patterns()) groups[e].push_back(p);
    }
    std::vector<ClopenSet> els;
    for (auto& g : groups)
      if (!g.empty()) els.emplace_back(U.window(), std::move(g));
    Cover c(U.window(), std::move(els));
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
  }
  return out;
}

struct LocalEntropy {
  double lower_estimate = 0;  // H_mu(U_{F_n})/|F_n| at n = lower_n
  Coord lower_n = 0;
  bool lower_certified = false;
  double upper = 0;           // min candidate entropy-rate bound
  std::size_t best_candidate = 0;
  std::size_t candidates = 0;
  bool squeezed = false;      // upper - lower_estimate <= tolerance
};

// Upper bound only: min over candidates of the entropy-rate estimate.
inline std::pair<double, std::size_t> local_entropy_upper(const InvariantMeasure& mu, const std::vector<Cover>& candidates,
                                                          Coord n_max, const ShiftSpace& space, const Limits& limits = {}) {
  if (candidates.empty()) throw InputError("local_entropy: no candidate partitions");
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double v = entropy_rate(mu, candidates[i], n_max, space, limits).estimate;
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  return {best, arg};
}

inline LocalEntropy local_entropy(const InvariantMeasure& mu, const Cover& U, Coord n_max, const ShiftSpace& space,
                                  std::vector<Cover> candidates = {}, double tolerance = 1e-6, const Limits& limits = {}) {
  mu.check_space(space);
  if (candidates.empty()) candidates = default_candidates(U, space);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidates[i].is_partition(space)) throw InputError("local_entropy: candidate " + std::to_string(i) + " is not a partition");
    if (!refines(candidates[i], U, space)) throw InputError("local_entropy: candidate " + std::to_string(i) + " does not refine U");
  }
  LocalEntropy r;
  r.candidates = candidates.size();
  std::tie(r.upper, r.best_candidate) = local_entropy_upper(mu, candidates, n_max, space, limits);

  const FiniteSubset F = folner_box(space.dim(), n_max);
  CoverEntropy ce;
  try {
    ce = join_cover_entropy(mu, U, F, Mode::exact, space, limits);
  } catch (const BudgetError&) {
    ce = join_cover_entropy(mu, U, F, Mode::greedy, space, limits);
  }
  r.lower_estimate = ce.value / static_cast<double>(F.size());
  r.lower_n = n_max;
  r.lower_certified = ce.certified;
  r.squeezed = r.upper - r.lower_estimate <= tolerance;
  return r;
}

// F -> H_mu(alpha_F) as a set function (monotone, non-negative, invariant,
// strongly sub-additive).
inline SetFunction entropy_set_function(const InvariantMeasure& mu, const Cover& alpha, const ShiftSpace& space,
                                        const Limits& limits = {}) {
  return SetFunction([=](const FiniteSubset& F) { return join_entropy(mu, alpha, F, space, limits); }, PropertySet::all(),
                     "H_mu(alpha_F)");
}

}  // namespace subpress
