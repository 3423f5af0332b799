#pragma once

// Variational harness: maximize h_mu(U) + F_*(mu) over Bernoulli and Markov
// families, compare with the pressure, build finite-n equilibrium candidates,
// and check the inequality P >= h_mu(U) + F_*(mu) measure by measure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subpress/errors.hpp"
#include "subpress/gibbs.hpp"
#include "subpress/measures.hpp"
#include "subpress/potentials.hpp"
#include "subpress/pressure.hpp"
#include "subpress/symbolic.hpp"

namespace subpress {

struct SearchOptions {
  Coord n_entropy = 4;   // box side for the entropy upper bound and F_*
  Coord n_pressure = 8;  // box side for the pressure estimate
  std::size_t restarts = 4;
  std::uint64_t seed = 1;
  double initial_step = 1.0;
  double final_step = 1e-9;
  std::size_t max_evaluations = 20000;
  Mode mode = Mode::exact;
};

struct TracePoint {
  std::size_t restart;
  std::size_t evaluation;
  double value;
};

struct VariationalResult {
  double pressure_estimate = 0;
  std::optional<InvariantMeasure> best_measure;
  std::vector<double> parameters;  // Bernoulli p, or row-major Markov P
  double best_value = -std::numeric_limits<double>::infinity();
  double entropy = 0;   // h_upper at the optimum
  double lyapunov = 0;  // F_* at the optimum
  double gap = 0;       // pressure_estimate - best_value
  std::vector<TracePoint> trace;
};

struct Objective {
  double value, entropy, lyapunov;
};

// h_upper(mu, U) + F_*(mu) at a fixed n.
inline Objective variational_objective(const InvariantMeasure& mu, const ShiftSpace& space, const Potential& P,
                                       const std::vector<Cover>& candidates, Coord n, const Limits& limits = {}) {
  const double h = local_entropy_upper(mu, candidates, n, space, limits).first;
  const double F = lyapunov(P, mu, space, n, 1'000'000, 4000, 1, limits).estimate;
  return {h + F, h, F};
}

namespace detail {

// Softmax over the free entries of each row; pinned entries stay 0.
struct SimplexChart {
  std::vector<std::vector<std::size_t>> free;  // per row: allowed columns
  std::size_t width = 0;

  std::size_t dims() const {
    std::size_t d = 0;
    for (const auto& r : free) d += r.size();
    return d;
  }
  std::vector<std::vector<double>> rows(const std::vector<double>& theta) const {
    std::vector<std::vector<double>> out;
    std::size_t off = 0;
    for (const auto& cols : free) {
      std::vector<double> row(width, 0.0);
      const std::vector<double> p = gibbs_distribution(std::span<const double>(theta.data() + off, cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j) row[cols[j]] = p[j];
      off += cols.size();
      out.push_back(std::move(row));
    }
    return out;
  }
};

// Coordinate search with step halving, one run per start.
inline void coordinate_search(const std::function<double(const std::vector<double>&)>& objective, std::vector<double> theta,
                              const SearchOptions& opt, std::size_t restart, std::vector<TracePoint>& trace,
                              std::vector<double>& best_theta, double& best_value) {
  std::size_t evals = 0;
  double cur = objective(theta);
  trace.push_back({restart, ++evals, cur});
  for (double step = opt.initial_step; step >= opt.final_step && evals < opt.max_evaluations;) {
    bool moved = false;
    for (std::size_t i = 0; i < theta.size() && evals < opt.max_evaluations; ++i)
      for (double dir : {1.0, -1.0}) {
        std::vector<double> t = theta;
        t[i] += dir * step;
        const double v = objective(t);
        ++evals;
        if (v > cur) {
          cur = v;
          theta = std::move(t);
          moved = true;
          trace.push_back({restart, evals, cur});
          break;
        }
      }
    if (!moved) step /= 2;
  }
  if (cur > best_value || (cur == best_value && theta < best_theta)) {
    best_value = cur;
    best_theta = theta;
  }
}

inline std::vector<double> depth_one_table(const Potential& P) {
  if (P.kind() == PotentialKind::additive && P.window().size() == 1) return P.table();
  return {};
}

}  // namespace detail

// Search over Bernoulli measures. Restarts: uniform, the Gibbs vector of a
// one-site additive potential when available, then random softmax points.
inline VariationalResult maximize_over_bernoulli(const ShiftSpace& space, const Potential& P, const Cover& U,
                                                 const SearchOptions& opt = {}, const Limits& limits = {}) {
  const int k = space.alphabet();
  const auto candidates = default_candidates(U, space);
  VariationalResult r;
  r.pressure_estimate = pressure_limit(space, P, U, opt.n_pressure, opt.mode, limits).estimate;
  auto measure_of = [&](const std::vector<double>& theta) { return InvariantMeasure::bernoulli(gibbs_distribution(theta)); };
  auto objective = [&](const std::vector<double>& theta) {
    return variational_objective(measure_of(theta), space, P, candidates, opt.n_entropy, limits).value;
  };
  std::vector<std::vector<double>> starts{std::vector<double>(static_cast<std::size_t>(k), 0.0)};
  if (auto a = detail::depth_one_table(P); !a.empty()) starts.push_back(a);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (starts.size() < std::max<std::size_t>(opt.restarts, 1)) {
    std::vector<double> t(static_cast<std::size_t>(k));
    for (auto& v : t) v = gauss(rng);
    starts.push_back(t);
  }
  std::vector<double> best_theta;
  for (std::size_t i = 0; i < starts.size(); ++i)
    detail::coordinate_search(objective, starts[i], opt, i, r.trace, best_theta, r.best_value);

  const auto mu = measure_of(best_theta);
  const auto obj = variational_objective(mu, space, P, candidates, opt.n_entropy, limits);
  r.best_measure = mu;
  r.parameters = mu.marginal();
  r.best_value = obj.value;
  r.entropy = obj.entropy;
  r.lyapunov = obj.lyapunov;
  r.gap = r.pressure_estimate - r.best_value;
  return r;
}

// Search over stationary Markov chains whose forbidden transitions are
// pinned to zero (d = 1, nearest-neighbour constraints).
inline VariationalResult maximize_over_markov(const ShiftSpace& space, const Potential& P, const Cover& U,
                                              const SearchOptions& opt = {}, const Limits& limits = {}) {
  if (space.dim() != 1) throw InputError("maximize_over_markov: requires dimension 1");
  const auto T = space.transfer_matrix();
  if (!T) throw InputError("maximize_over_markov: forbidden patterns must span at most two adjacent sites");
  const std::size_t k = static_cast<std::size_t>(space.alphabet());
  detail::SimplexChart chart;
  chart.width = k;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < k; ++j)
      if ((*T)[i][j]) cols.push_back(j);
    if (cols.empty()) throw InputError("maximize_over_markov: symbol " + std::to_string(i) + " has no allowed successor");
    chart.free.push_back(std::move(cols));
  }
  const auto candidates = default_candidates(U, space);
  VariationalResult r;
  r.pressure_estimate = pressure_limit(space, P, U, opt.n_pressure, opt.mode, limits).estimate;
  auto measure_of = [&](const std::vector<double>& theta) { return InvariantMeasure::markov(chart.rows(theta)); };
  auto objective = [&](const std::vector<double>& theta) {
    return variational_objective(measure_of(theta), space, P, candidates, opt.n_entropy, limits).value;
  };
  std::vector<std::vector<double>> starts{std::vector<double>(chart.dims(), 0.0)};
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (starts.size() < std::max<std::size_t>(opt.restarts, 1)) {
    std::vector<double> t(chart.dims());
    for (auto& v : t) v = gauss(rng);
    starts.push_back(t);
  }
  std::vector<double> best_theta;
  for (std::size_t i = 0; i < starts.size(); ++i)
    detail::coordinate_search(objective, starts[i], opt, i, r.trace, best_theta, r.best_value);

  const auto mu = measure_of(best_theta);
  const auto obj = variational_objective(mu, space, P, candidates, opt.n_entropy, limits);
  r.best_measure = mu;
  for (const auto& row : mu.transition()) r.parameters.insert(r.parameters.end(), row.begin(), row.end());
  r.best_value = obj.value;
  r.entropy = obj.entropy;
  r.lyapunov = obj.lyapunov;
  r.gap = r.pressure_estimate - r.best_value;
  return r;
}

struct EquilibriumCandidate {
  Coord n = 0;
  FiniteSubset domain;           // sites carried by the selected patterns
  std::vector<Pattern> points;   // one per atom of alpha_{F_n}, atoms in key order
  std::vector<double> values;    // f_{F_n} at each point
  std::vector<double> weights;   // lambda_n
  std::vector<double> marginal;  // single-site marginal of mu_n
  std::vector<std::vector<double>> pair_marginal;  // d = 1: law of (x_0, x_1) under mu_n
};

// One maximizing pattern per atom of alpha_{F_n}, Gibbs weights over their
// values, and the marginals of the translate average over F_n.
inline EquilibriumCandidate equilibrium_candidate(const ShiftSpace& space, const Potential& P, const Cover& alpha, Coord n,
                                                  const Limits& limits = {}) {
  if (!alpha.is_partition(space)) throw InputError("equilibrium_candidate: alpha must be a partition");
  const int d = space.dim();
  const std::size_t k = static_cast<std::size_t>(space.alphabet());
  const FiniteSubset F = folner_box(d, n);
  const FiniteSubset F1 = translate(F, Point::axis(d, 0));
  const FiniteSubset extra = set_union(set_union(F, F1), P.dependence(F));
  const FiniteSubset domain = set_union(joined_window(alpha.window(), F), extra);
  const auto f = P.bind(F, domain, limits.matrix_nodes);
  const auto gp = generated_partition(alpha, space);
  AtomOptions opt;
  opt.extra_domain = &extra;
  opt.keep_argmax = true;
  const auto sys = build_atoms(space, gp, F, [&](const Pattern& x) { return f(x); }, nullptr, opt, limits);

  EquilibriumCandidate c;
  c.n = n;
  c.domain = sys.domain;
  for (const auto& a : sys.atoms) {
    c.points.push_back(a.argmax);
    c.values.push_back(a.log_weight);
  }
  c.weights = gibbs_distribution(c.values);
  c.marginal.assign(k, 0.0);
  const auto fpos = positions_in(sys.domain, F);
  const auto f1pos = positions_in(sys.domain, F1);
  if (d == 1) c.pair_marginal.assign(k, std::vector<double>(k, 0.0));
  const double vol = static_cast<double>(F.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto& x = c.points[i];
    for (std::size_t j = 0; j < fpos.size(); ++j) {
      c.marginal[x[static_cast<std::size_t>(fpos[j])]] += c.weights[i];
      if (d == 1) c.pair_marginal[x[static_cast<std::size_t>(fpos[j])]][x[static_cast<std::size_t>(f1pos[j])]] += c.weights[i];
    }
  }
  for (auto& v : c.marginal) v /= vol;
  for (auto& row : c.pair_marginal)
    for (auto& v : row) v /= vol;
  return c;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw InputError("total_variation: length mismatch");
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / 2;
}

struct Step1Record {
  std::string measure;
  // min over n <= n_max of (1/|F_n|)(log P_{F_n} - H_mu(beta_n) - int f_{F_n} dmu),
  // beta_n the optimal block partition; never negative by the Gibbs inequality.
  double margin = 0;
  Coord worst_n = 0;
  // pressure estimate - (h_upper + F_*) with the limit-form estimates.
  double limit_margin = 0;
  double entropy_upper = 0;
  double lyapunov = 0;
  bool violated = false;
};

struct Step1Report {
  double pressure_estimate = 0;
  std::vector<Step1Record> records;
  bool violated() const {
    return std::any_of(records.begin(), records.end(), [](const Step1Record& r) { return r.violated; });
  }
};

// H_mu of the block partition chosen by a pressure term.
inline double block_entropy(const ShiftSpace& space, const Potential& P, const Cover& U, const PressureTerm& t,
                            const InvariantMeasure& mu, const Limits& limits = {}) {
  if (t.E.empty()) return 0.0;
  if (t.streamed) return join_entropy(mu, U, t.E, space, limits);
  const auto gp = generated_partition(U, space);
  const FiniteSubset domain = set_union(joined_window(U.window(), t.E), P.dependence(t.E));
  const auto sys = pressure_atoms(space, P, U, gp, t.E, [&](const Pattern& x) { return mu.cylinder(domain, x); }, false, limits);
  if (sys.atoms.size() != t.assignment.size()) throw InvariantViolation("block_entropy: atom count changed between passes");
  std::vector<double> mass(t.blocks, 0.0);
  for (std::size_t i = 0; i < sys.atoms.size(); ++i) mass[t.assignment[i]] += sys.atoms[i].mass;
  double h = 0;
  for (double m : mass) h += eta(m);
  return h;
}

inline Step1Report verify_step1(const ShiftSpace& space, const Potential& P, const Cover& U,
                                const std::vector<std::pair<std::string, InvariantMeasure>>& measures, Coord n_max,
                                Mode mode = Mode::exact, double tolerance = 1e-9, const Limits& limits = {}) {
  Step1Report rep;
  const auto pr = pressure_limit(space, P, U, n_max, mode, limits);
  rep.pressure_estimate = pr.estimate;
  const auto candidates = default_candidates(U, space);
  for (const auto& [name, mu] : measures) {
    mu.check_space(space);
    Step1Record rec;
    rec.measure = name;
    rec.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pr.terms.size(); ++i) {
      const auto& t = pr.terms[i];
      const double H = block_entropy(space, P, U, t, mu, limits);
      const double I = exact_integral(P, mu, space, t.E, limits);
      const double m = (t.log_value - H - I) / static_cast<double>(t.E.size());
      if (m < rec.margin) {
        rec.margin = m;
        rec.worst_n = pr.ns[i];
      }
    }
    const auto obj = variational_objective(mu, space, P, candidates, n_max, limits);
    rec.entropy_upper = obj.entropy;
    rec.lyapunov = obj.lyapunov;
    rec.limit_margin = pr.estimate - obj.value;
    rec.violated = rec.margin < -tolerance;
    rep.records.push_back(rec);
  }
  return rep;
}

inline nlohmann::ordered_json to_json(const VariationalResult& r) {
  nlohmann::ordered_json j;
  j["pressure_estimate"] = r.pressure_estimate;
  j["best_value"] = r.best_value;
  j["entropy"] = r.entropy;
  j["lyapunov"] = r.lyapunov;
  j["gap"] = r.gap;
  j["parameters"] = r.parameters;
  j["evaluations"] = r.trace.size();
  return j;
}

inline nlohmann::ordered_json to_json(const Step1Record& r) {
  nlohmann::ordered_json j;
  j["measure"] = r.measure;
  j["margin"] = r.margin;
  j["worst_n"] = r.worst_n;
  j["limit_margin"] = r.limit_margin;
  j["entropy_upper"] = r.entropy_upper;
  j["lyapunov"] = r.lyapunov;
  j["violated"] = r.violated;
  return j;
}

inline nlohmann::ordered_json to_json(const EquilibriumCandidate& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["points"] = c.points.size();
  j["marginal"] = c.marginal;
  if (!c.pair_marginal.empty()) j["pair_marginal"] = c.pair_marginal;
  return j;
}

}  // namespace subpress
