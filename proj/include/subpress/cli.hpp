#pragma once

// Job runner behind the subpress command-line tool. Every artifact is written
// in a fixed order with fixed number formatting, so equal jobs produce equal
// bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subpress/errors.hpp"
#include "subpress/measures.hpp"
#include "subpress/potentials.hpp"
#include "subpress/pressure.hpp"
#include "subpress/set_function.hpp"
#include "subpress/system_io.hpp"
#include "subpress/varprin.hpp"

namespace subpress {

enum class ExitCode : int { ok = 0, input_error = 1, invariant_violation = 2 };

struct JobSpec {
  std::string system;
  std::string command;
  Coord n_max = 8;
  std::uint64_t seed = 1;
  Mode mode = Mode::exact;
  std::string out = ".";
  double tolerance = 1e-9;
  std::size_t samples = 500;   // check-potential
  std::size_t restarts = 4;    // vp
  Coord n_entropy = 4;         // vp

  static const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"pressure", "entropy", "vp", "check-potential", "ow", "equilibrium"};
    return c;
  }

  void validate() const {
    if (system.empty()) throw InputError("--system: required");
    if (std::find(commands().begin(), commands().end(), command) == commands().end())
      throw InputError("--command: unknown command '" + command + "'");
    if (n_max < 1) throw InputError("--n-max: must be >= 1");
    if (!(tolerance > 0.0)) throw InputError("--tolerance: must be positive");
    if (samples < 1) throw InputError("--samples: must be >= 1");
    if (restarts < 1) throw InputError("--restarts: must be >= 1");
    if (n_entropy < 1) throw InputError("--n-entropy: must be >= 1");
  }
};

inline std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// A CSV table with a header row and 12 significant digits.
class ConvergenceTable {
 public:
  explicit ConvergenceTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw InvariantViolation("convergence table: row width differs from header");
    rows_.push_back(cells);
  }
  bool empty() const { return rows_.empty(); }

  std::string str() const {
    std::ostringstream o;
    for (std::size_t i = 0; i < columns_.size(); ++i) o << (i ? "," : "") << columns_[i];
    o << '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
      o << '\n';
    }
    return o.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline ConvergenceTable convergence_table(const PressureReport& r) {
  if (r.ns.empty()) throw InputError("convergence table: empty report");
  ConvergenceTable t({"n", "box_size", "log_P", "normalized", "increment", "certified"});
  for (std::size_t i = 0; i < r.ns.size(); ++i)
    t.row({std::to_string(r.ns[i]), std::to_string(r.box_sizes[i]), fmt12(r.terms[i].log_value), fmt12(r.normalized[i]),
           r.increments[i] ? fmt12(*r.increments[i]) : "", r.terms[i].certified ? "true" : "false"});
  return t;
}

inline ConvergenceTable convergence_table(const EntropyReport& r) {
  if (r.ns.empty()) throw InputError("convergence table: empty report");
  ConvergenceTable t({"n", "box_size", "H", "normalized", "increment", "inf_to_date"});
  for (std::size_t i = 0; i < r.ns.size(); ++i)
    t.row({std::to_string(r.ns[i]), std::to_string(r.box_sizes[i]), fmt12(r.entropies[i]), fmt12(r.normalized[i]),
           r.increments[i] ? fmt12(*r.increments[i]) : "", fmt12(r.inf_to_date[i])});
  return t;
}

inline ConvergenceTable convergence_table(const OwEstimate& r) {
  if (r.samples.empty()) throw InputError("convergence table: empty report");
  ConvergenceTable t({"n", "normalized"});
  for (const auto& [n, v] : r.samples) t.row({std::to_string(n), fmt12(v)});
  return t;
}

template <class Report>
void emit_convergence_table(const Report& r, const std::filesystem::path& path) {
  const std::string body = convergence_table(r).str();
  std::ofstream o(path, std::ios::binary);
  if (!o) throw std::runtime_error(path.string() + ": cannot open for writing");
  o << body;
  if (!o) throw std::runtime_error(path.string() + ": write failed");
}

namespace detail {

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& body) const {
    std::ofstream o(dir_ / name, std::ios::binary);
    if (!o) throw std::runtime_error((dir_ / name).string() + ": cannot open for writing");
    o << body;
  }
  void jsonl(const std::string& name, const std::vector<nlohmann::ordered_json>& records) const {
    std::string body;
    for (const auto& r : records) body += r.dump() + "\n";
    write(name, body);
  }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline std::vector<NamedCover> analysis_covers(const SystemDescription& sys) {
  if (!sys.covers.empty()) return sys.covers;
  return {{"standard", Cover::standard_partition(sys.space)}};
}

inline int run_pressure(const JobSpec& job, const SystemDescription& sys, const Artifacts& out, std::ostream& log) {
  const auto covers = analysis_covers(sys);
  const auto rep = pressure_sup_over_covers(sys.space, sys.potential_or_zero(), covers, job.n_max, job.mode);
  nlohmann::ordered_json summary;
  summary["command"] = "pressure";
  summary["estimate"] = rep.estimate;
  summary["best_cover"] = rep.names[rep.best];
  auto per = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.reports.size(); ++i) {
    emit_convergence_table(rep.reports[i], out.dir() / ("pressure_" + rep.names[i] + ".csv"));
    std::vector<nlohmann::ordered_json> terms;
    for (const auto& t : rep.reports[i].terms) terms.push_back(to_json(t));
    out.jsonl("pressure_" + rep.names[i] + ".jsonl", terms);
    per.push_back({{"cover", rep.names[i]}, {"estimate", rep.reports[i].estimate}, {"certified", rep.reports[i].all_certified()}});
    log << rep.names[i] << ": " << fmt12(rep.reports[i].estimate) << '\n';
  }
  summary["covers"] = per;
  out.write("pressure.json", summary.dump(2) + "\n");
  return 0;
}

inline int run_entropy(const JobSpec& job, const SystemDescription& sys, const Artifacts& out, std::ostream& log) {
  if (sys.measures.empty()) throw InputError(job.system + ": $.measures: entropy needs at least one measure");
  const Cover alpha = sys.alpha();
  std::vector<nlohmann::ordered_json> records;
  for (const auto& m : sys.measures) {
    const auto rep = entropy_rate(m.measure, alpha, job.n_max, sys.space);
    emit_convergence_table(rep, out.dir() / ("entropy_" + m.name + ".csv"));
    nlohmann::ordered_json r;
    r["measure"] = m.name;
    r["estimate"] = rep.estimate;
    if (rep.closed_form) r["closed_form"] = *rep.closed_form;
    for (const auto& c : analysis_covers(sys)) {
      const auto le = local_entropy(m.measure, c.cover, std::min<Coord>(job.n_max, 4), sys.space, {}, job.tolerance);
      r["local"][c.name] = {{"lower_estimate", le.lower_estimate}, {"upper", le.upper}, {"certified", le.lower_certified}};
    }
    records.push_back(r);
    log << m.name << ": " << fmt12(rep.estimate) << '\n';
  }
  out.jsonl("entropy.jsonl", records);
  return 0;
}

inline int run_vp(const JobSpec& job, const SystemDescription& sys, const Artifacts& out, std::ostream& log) {
  const Potential P = sys.potential_or_zero();
  const auto covers = analysis_covers(sys);
  const Cover& U = covers.front().cover;
  SearchOptions opt;
  opt.n_entropy = job.n_entropy;
  opt.n_pressure = job.n_max;
  opt.restarts = job.restarts;
  opt.seed = job.seed;
  opt.mode = job.mode;
  VariationalResult res = sys.space.is_full_shift() ? maximize_over_bernoulli(sys.space, P, U, opt)
                                                    : maximize_over_markov(sys.space, P, U, opt);
  std::vector<std::pair<std::string, InvariantMeasure>> ms;
  for (const auto& m : sys.measures) ms.emplace_back(m.name, m.measure);
  ms.emplace_back("optimum", *res.best_measure);
  const auto step1 = verify_step1(sys.space, P, U, ms, std::min<Coord>(job.n_max, 8), job.mode, job.tolerance);

  nlohmann::ordered_json j;
  j["command"] = "vp";
  j["cover"] = covers.front().name;
  j["family"] = sys.space.is_full_shift() ? "bernoulli" : "markov";
  j["result"] = to_json(res);
  auto recs = nlohmann::ordered_json::array();
  for (const auto& r : step1.records) recs.push_back(to_json(r));
  j["step1"] = recs;
  j["violated"] = step1.violated();
  out.write("vp.json", j.dump(2) + "\n");
  log << "pressure " << fmt12(res.pressure_estimate) << " best " << fmt12(res.best_value) << " gap " << fmt12(res.gap) << '\n';
  if (step1.violated()) {
    log << "step-1 inequality violated\n";
    return 2;
  }
  return 0;
}

inline int run_check_potential(const JobSpec& job, const SystemDescription& sys, const Artifacts& out, std::ostream& log) {
  if (!sys.potential) throw InputError(job.system + ": $.potential: check-potential needs a potential");
  const auto r = check_conditions(*sys.potential, sys.space, job.samples, job.seed);
  std::vector<nlohmann::ordered_json> recs;
  auto add = [&](const char* name, const ConditionCheck& c) {
    nlohmann::ordered_json j{{"condition", name}, {"verdict", c.passed ? "pass" : "fail"}, {"worst", c.worst}, {"seed", job.seed}};
    if (!c.witness.empty()) j["witness"] = c.witness;
    recs.push_back(j);
    log << name << ": " << (c.passed ? "pass" : "fail") << '\n';
  };
  add("C1", r.c1);
  add("C2", r.c2);
  add("C3", r.c3);
  if (r.strong) add("strong_subadditivity", *r.strong);
  if (r.shifted_monotone) add("shifted_monotone", *r.shifted_monotone);
  recs.push_back({{"C3_bound", r.constants.C3_bound},
                  {"C3_empirical_sup", r.c3_empirical_sup},
                  {"K_bound", r.constants.K_bound},
                  {"K1", r.constants.K1},
                  {"K2", r.constants.K2}});
  out.jsonl("conditions.jsonl", recs);
  return r.passed() ? 0 : 2;
}

inline int run_ow(const JobSpec& job, const SystemDescription& sys, const Artifacts& out, std::ostream& log) {
  const Cover alpha = sys.alpha();
  std::vector<nlohmann::ordered_json> recs;
  bool ok = true;
  auto one = [&](const std::string& name, const SetFunction& f) {
    const auto props = check_properties(f, sys.space.dim(), 50, 3, job.seed);
    for (auto rec : props.records()) {
      rec["function"] = name;
      recs.push_back(rec);
    }
    ok = ok && props.all_passed();
    const auto est = ow_limit(f, sys.space.dim(), job.n_max);
    emit_convergence_table(est, out.dir() / ("ow_" + name + ".csv"));
    recs.push_back({{"function", name}, {"limit_estimate", est.limit_estimate}, {"inf_estimate", est.inf_estimate}});
    log << name << ": " << fmt12(est.limit_estimate) << '\n';
  };
  for (const auto& m : sys.measures) one("entropy_" + m.name, entropy_set_function(m.measure, alpha, sys.space));
  const Potential P = sys.potential_or_zero();
  if (compute_constants(P, sys.space).c3_certified)
    for (const auto& c : analysis_covers(sys)) one("log_pressure_" + c.name, shifted_log_pressure(sys.space, P, c.cover, job.mode));
  out.jsonl("ow.jsonl", recs);
  return ok ? 0 : 2;
}

inline int run_equilibrium(const JobSpec& job, const SystemDescription& sys, const Artifacts& out, std::ostream& log) {
  const Cover alpha = sys.alpha();
  const Potential P = sys.potential_or_zero();
  const std::size_t k = static_cast<std::size_t>(sys.space.alphabet());
  std::vector<std::string> cols{"n"};
  for (std::size_t s = 0; s < k; ++s) cols.push_back("p" + std::to_string(s));
  ConvergenceTable t(cols);
  std::vector<nlohmann::ordered_json> recs;
  for (Coord n = 1; n <= job.n_max; ++n) {
    const auto c = equilibrium_candidate(sys.space, P, alpha, n);
    std::vector<std::string> row{std::to_string(n)};
    for (double v : c.marginal) row.push_back(fmt12(v));
    t.row(row);
    recs.push_back(to_json(c));
  }
  out.write("equilibrium.csv", t.str());
  out.jsonl("equilibrium.jsonl", recs);
  log << "equilibrium marginals written for n <= " << job.n_max << '\n';
  return 0;
}

}  // namespace detail

// 0 on success, 1 on input errors, 2 on a violated mathematical invariant.
inline int run(const JobSpec& job, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    job.validate();
    const SystemDescription sys = load_system(job.system);
    const detail::Artifacts out(job.out);
    if (job.command == "pressure") return detail::run_pressure(job, sys, out, log);
    if (job.command == "entropy") return detail::run_entropy(job, sys, out, log);
    if (job.command == "vp") return detail::run_vp(job, sys, out, log);
    if (job.command == "check-potential") return detail::run_check_potential(job, sys, out, log);
    if (job.command == "ow") return detail::run_ow(job, sys, out, log);
    return detail::run_equilibrium(job, sys, out, log);
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return static_cast<int>(ExitCode::invariant_violation);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::input_error);
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return static_cast<int>(ExitCode::input_error);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::input_error);
  }
}

}  // namespace subpress
