#pragma once

// JSON system descriptions: shift space, covers, potential and measures in a
// single file.
//
// {
//   "dimension": 1, "alphabet": 2,
//   "forbidden": [{"window": [0, 1], "pattern": [1, 1]}],
//   "covers": [{"name": "std", "window": [0], "elements": [{"symbols": [[0]]}, {"patterns": [[1]]}]}],
//   "partition": "std",
//   "potential": {"kind": "additive", "window": [0], "table": [1.0986, 0.0], "shift": 0.0},
//   "measures": [{"name": "m", "kind": "markov", "P": [[0.5, 0.5], [1, 0]]}]
// }
//
// Window points are integers when d = 1 and coordinate arrays otherwise.
// A cover may be given as {"name": ..., "standard": true} for the partition by
// the symbol at the origin.

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subpress/errors.hpp"
#include "subpress/lattice.hpp"
#include "subpress/measures.hpp"
#include "subpress/potentials.hpp"
#include "subpress/pressure.hpp"
#include "subpress/symbolic.hpp"

namespace subpress {

struct MeasureSpec {
  std::string name;
  InvariantMeasure measure;
  bool operator==(const MeasureSpec&) const = default;
};

struct SystemDescription {
  ShiftSpace space;
  std::vector<NamedCover> covers;
  std::string partition;  // name of the cover used as alpha
  std::optional<Potential> potential;
  std::vector<MeasureSpec> measures;

  const Cover& cover(const std::string& name) const {
    for (const auto& c : covers)
      if (c.name == name) return c.cover;
    throw InputError("no cover named '" + name + "'");
  }
  Cover alpha() const { return partition.empty() ? Cover::standard_partition(space) : cover(partition); }
  Potential potential_or_zero() const { return potential ? *potential : Potential::zero(space.dim(), space.alphabet()); }
};

inline bool same_potential(const Potential& a, const Potential& b) {
  return a.kind() == b.kind() && a.kind() != PotentialKind::custom && a.window() == b.window() && a.alphabet() == b.alphabet() &&
         a.site_shift() == b.site_shift() && a.table() == b.table() && a.matrices() == b.matrices();
}

inline bool operator==(const NamedCover& a, const NamedCover& b) { return a.name == b.name && a.cover == b.cover; }

inline bool operator==(const SystemDescription& a, const SystemDescription& b) {
  if (a.potential.has_value() != b.potential.has_value()) return false;
  if (a.potential && !same_potential(*a.potential, *b.potential)) return false;
  return a.space == b.space && a.covers == b.covers && a.partition == b.partition && a.measures == b.measures;
}

namespace detail {

using json = nlohmann::json;

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw InputError(origin_ + ": " + path + ": " + what);
  }

  const json& field(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing");
    return *it;
  }

  long long integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "not finite");
    return x;
  }

  std::vector<double> numbers(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  Point point(const json& v, int d, const std::string& path) const {
    if (v.is_number_integer()) {
      if (d != 1) fail(path, "expected a coordinate array of length " + std::to_string(d));
      return Point({v.get<Coord>()});
    }
    if (!v.is_array() || v.size() != static_cast<std::size_t>(d)) fail(path, "expected a coordinate array of length " + std::to_string(d));
    std::vector<Coord> c;
    for (std::size_t i = 0; i < v.size(); ++i) c.push_back(integer(v[i], path + "[" + std::to_string(i) + "]"));
    return Point(std::move(c));
  }

  FiniteSubset window(const json& v, int d, const std::string& path) const {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of points");
    std::vector<Point> pts;
    for (std::size_t i = 0; i < v.size(); ++i) pts.push_back(point(v[i], d, path + "[" + std::to_string(i) + "]"));
    FiniteSubset W(d, pts);
    if (W.size() != pts.size()) fail(path, "duplicate points");
    return W;
  }

  Pattern pattern(const json& v, std::size_t len, int k, const std::string& path) const {
    if (!v.is_array() || v.size() != len) fail(path, "expected " + std::to_string(len) + " symbols");
    Pattern p;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto s = integer(v[i], path + "[" + std::to_string(i) + "]");
      if (s < 0 || s >= k) fail(path + "[" + std::to_string(i) + "]", "symbol out of alphabet");
      p.push_back(static_cast<Symbol>(s));
    }
    return p;
  }

 private:
  std::string origin_;
};

// Window points in the order given map to sorted window positions.
inline Pattern reorder(const json& window, const Pattern& given, const FiniteSubset& W, int d, const Reader& rd,
                       const std::string& path) {
  Pattern out(given.size());
  for (std::size_t i = 0; i < given.size(); ++i)
    out[static_cast<std::size_t>(W.index_of(rd.point(window[i], d, path)))] = given[i];
  return out;
}

inline json point_json(const Point& p) {
  if (p.dim() == 1) return p[0];
  json a = json::array();
  for (int i = 0; i < p.dim(); ++i) a.push_back(p[i]);
  return a;
}

inline json window_json(const FiniteSubset& W) {
  json a = json::array();
  for (const auto& p : W) a.push_back(point_json(p));
  return a;
}

}  // namespace detail

inline SystemDescription parse_system(const nlohmann::json& j, const std::string& origin = "system") {
  using detail::json;
  const detail::Reader rd(origin);
  SystemDescription sys;
  const int d = static_cast<int>(rd.integer(rd.field(j, "dimension", "$"), "$.dimension"));
  if (d < 1) rd.fail("$.dimension", "must be >= 1");
  const int k = static_cast<int>(rd.integer(rd.field(j, "alphabet", "$"), "$.alphabet"));
  if (k < 1 || k > 255) rd.fail("$.alphabet", "must be in [1, 255]");

  std::vector<ForbiddenPattern> forbidden;
  if (j.contains("forbidden")) {
    const auto& fs = j["forbidden"];
    if (!fs.is_array()) rd.fail("$.forbidden", "expected an array");
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const std::string path = "$.forbidden[" + std::to_string(i) + "]";
      const auto& wj = rd.field(fs[i], "window", path);
      const FiniteSubset W = rd.window(wj, d, path + ".window");
      const Pattern given = rd.pattern(rd.field(fs[i], "pattern", path), W.size(), k, path + ".pattern");
      forbidden.push_back({W, detail::reorder(wj, given, W, d, rd, path + ".window")});
    }
  }
  try {
    sys.space = ShiftSpace(d, k, forbidden);
  } catch (const InputError& e) {
    rd.fail("$", e.what());
  }

  if (j.contains("covers")) {
    const auto& cs = j["covers"];
    if (!cs.is_array()) rd.fail("$.covers", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string path = "$.covers[" + std::to_string(i) + "]";
      const auto& name = rd.field(cs[i], "name", path);
      if (!name.is_string()) rd.fail(path + ".name", "expected a string");
      for (const auto& c : sys.covers)
        if (c.name == name.get<std::string>()) rd.fail(path + ".name", "duplicate cover name");
      if (cs[i].value("standard", false)) {
        sys.covers.push_back({name.get<std::string>(), Cover::standard_partition(sys.space)});
        continue;
      }
      const auto& wj = rd.field(cs[i], "window", path);
      const FiniteSubset W = rd.window(wj, d, path + ".window");
      const auto& es = rd.field(cs[i], "elements", path);
      if (!es.is_array() || es.empty()) rd.fail(path + ".elements", "expected a non-empty array");
      std::vector<ClopenSet> els;
      for (std::size_t e = 0; e < es.size(); ++e) {
        const std::string ep = path + ".elements[" + std::to_string(e) + "]";
        if (es[e].contains("symbols")) {
          const auto& sj = es[e]["symbols"];
          if (!sj.is_array() || sj.size() != W.size()) rd.fail(ep + ".symbols", "expected one symbol list per window point");
          std::vector<std::vector<Symbol>> lists(W.size());
          for (std::size_t s = 0; s < sj.size(); ++s) {
            const auto pos = static_cast<std::size_t>(W.index_of(rd.point(wj[s], d, path + ".window")));
            if (!sj[s].is_array()) rd.fail(ep + ".symbols[" + std::to_string(s) + "]", "expected an array");
            lists[pos] = rd.pattern(sj[s], sj[s].size(), k, ep + ".symbols[" + std::to_string(s) + "]");
          }
          els.push_back(ClopenSet::product(sys.space, W, lists));
        } else if (es[e].contains("patterns")) {
          const auto& pj = es[e]["patterns"];
          if (!pj.is_array()) rd.fail(ep + ".patterns", "expected an array");
          std::vector<Pattern> pats;
          for (std::size_t q = 0; q < pj.size(); ++q) {
            const std::string qp = ep + ".patterns[" + std::to_string(q) + "]";
            pats.push_back(detail::reorder(wj, rd.pattern(pj[q], W.size(), k, qp), W, d, rd, path + ".window"));
          }
          els.emplace_back(W, std::move(pats));
        } else {
          rd.fail(ep, "expected 'symbols' or 'patterns'");
        }
      }
      Cover U(W, std::move(els));
      try {
        U.validate(sys.space, path);
      } catch (const InputError& e) {
        throw InputError(origin + ": " + e.what());
      }
      sys.covers.push_back({name.get<std::string>(), std::move(U)});
    }
  }
  if (j.contains("partition")) {
    if (!j["partition"].is_string()) rd.fail("$.partition", "expected a cover name");
    sys.partition = j["partition"].get<std::string>();
    bool found = false;
    for (const auto& c : sys.covers) found = found || c.name == sys.partition;
    if (!found) rd.fail("$.partition", "no cover named '" + sys.partition + "'");
    if (!sys.cover(sys.partition).is_partition(sys.space)) rd.fail("$.partition", "cover is not a partition");
  }

  if (j.contains("potential")) {
    const auto& pj = j["potential"];
    const std::string path = "$.potential";
    const auto& kind = rd.field(pj, "kind", path);
    if (!kind.is_string()) rd.fail(path + ".kind", "expected a string");
    const std::string kd = kind.get<std::string>();
    try {
      if (kd == "zero") {
        sys.potential = Potential::zero(d, k);
      } else {
        const auto& wj = rd.field(pj, "window", path);
        const FiniteSubset W = rd.window(wj, d, path + ".window");
        for (std::size_t i = 0; i < wj.size(); ++i)
          if (W[i] != rd.point(wj[i], d, path + ".window")) rd.fail(path + ".window", "points must be listed in ascending order");
        if (kd == "additive") {
          sys.potential = Potential::additive(W, rd.numbers(rd.field(pj, "table", path), path + ".table"), k);
        } else if (kd == "matrix") {
          const auto n = rd.integer(rd.field(pj, "size", path), path + ".size");
          if (n < 1) rd.fail(path + ".size", "must be >= 1");
          const auto& ms = rd.field(pj, "matrices", path);
          if (!ms.is_array()) rd.fail(path + ".matrices", "expected an array");
          std::vector<SquareMatrix> mats;
          for (std::size_t i = 0; i < ms.size(); ++i) {
            const std::string mp = path + ".matrices[" + std::to_string(i) + "]";
            auto a = rd.numbers(ms[i], mp);
            if (a.size() != static_cast<std::size_t>(n * n)) rd.fail(mp, "expected size*size entries, row-major");
            mats.push_back({static_cast<int>(n), std::move(a)});
          }
          sys.potential = Potential::matrix(W, std::move(mats), k);
        } else {
          rd.fail(path + ".kind", "expected 'zero', 'additive' or 'matrix'");
        }
      }
    } catch (const InputError& e) {
      const std::string msg = e.what();
      if (msg.rfind(origin + ":", 0) == 0) throw;
      throw InputError(origin + ": $." + msg);
    }
    if (pj.contains("shift")) sys.potential = sys.potential->shifted(rd.number(pj["shift"], path + ".shift"));
  }

  if (j.contains("measures")) {
    const auto& ms = j["measures"];
    if (!ms.is_array()) rd.fail("$.measures", "expected an array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string path = "$.measures[" + std::to_string(i) + "]";
      const auto& name = rd.field(ms[i], "name", path);
      if (!name.is_string()) rd.fail(path + ".name", "expected a string");
      const auto& kind = rd.field(ms[i], "kind", path);
      const std::string kd = kind.is_string() ? kind.get<std::string>() : "";
      std::optional<InvariantMeasure> mu;
      try {
        if (kd == "bernoulli") {
          mu = InvariantMeasure::bernoulli(rd.numbers(rd.field(ms[i], "p", path), path + ".p"), path);
        } else if (kd == "markov") {
          const auto& Pj = rd.field(ms[i], "P", path);
          if (!Pj.is_array()) rd.fail(path + ".P", "expected an array of rows");
          Matrix P;
          for (std::size_t r = 0; r < Pj.size(); ++r) P.push_back(rd.numbers(Pj[r], path + ".P[" + std::to_string(r) + "]"));
          std::optional<std::vector<double>> pi;
          if (ms[i].contains("pi")) pi = rd.numbers(ms[i]["pi"], path + ".pi");
          mu = InvariantMeasure::markov(std::move(P), pi, path);
        } else {
          rd.fail(path + ".kind", "expected 'bernoulli' or 'markov'");
        }
        mu->check_space(sys.space);
      } catch (const InputError& e) {
        const std::string msg = e.what();
        if (msg.rfind(origin + ":", 0) == 0) throw;
        throw InputError(origin + ": " + (msg.find(path) == std::string::npos ? path + ": " : "") + msg);
      }
      sys.measures.push_back({name.get<std::string>(), *mu});
    }
  }
  return sys;
}

inline SystemDescription load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open system file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  return parse_system(j, path);
}

// Explicit form: covers as pattern lists, measures with their stationary
// vectors.
inline nlohmann::ordered_json emit_system(const SystemDescription& sys) {
  using detail::window_json;
  nlohmann::ordered_json j;
  j["dimension"] = sys.space.dim();
  j["alphabet"] = sys.space.alphabet();
  if (!sys.space.forbidden().empty()) {
    auto fs = nlohmann::ordered_json::array();
    for (const auto& f : sys.space.forbidden())
      fs.push_back({{"window", window_json(f.window)}, {"pattern", std::vector<int>(f.pattern.begin(), f.pattern.end())}});
    j["forbidden"] = fs;
  }
  if (!sys.covers.empty()) {
    auto cs = nlohmann::ordered_json::array();
    for (const auto& c : sys.covers) {
      nlohmann::ordered_json cj;
      cj["name"] = c.name;
      cj["window"] = window_json(c.cover.window());
      auto es = nlohmann::ordered_json::array();
      for (const auto& e : c.cover.elements()) {
        auto ps = nlohmann::ordered_json::array();
        for (const auto& p : e.patterns()) ps.push_back(std::vector<int>(p.begin(), p.end()));
        es.push_back({{"patterns", ps}});
      }
      cj["elements"] = es;
      cs.push_back(cj);
    }
    j["covers"] = cs;
  }
  if (!sys.partition.empty()) j["partition"] = sys.partition;
  if (sys.potential) {
    const auto& P = *sys.potential;
    nlohmann::ordered_json pj;
    pj["kind"] = to_string(P.kind());
    pj["window"] = window_json(P.window());
    if (P.kind() == PotentialKind::additive) {
      pj["table"] = P.table();
    } else if (P.kind() == PotentialKind::matrix) {
      pj["size"] = P.matrices().front().n;
      auto ms = nlohmann::ordered_json::array();
      for (const auto& m : P.matrices()) ms.push_back(m.a);
      pj["matrices"] = ms;
    } else {
      throw InputError("emit_system: custom potentials cannot be serialized");
    }
    if (P.site_shift() != 0.0) pj["shift"] = P.site_shift();
    j["potential"] = pj;
  }
  if (!sys.measures.empty()) {
    auto ms = nlohmann::ordered_json::array();
    for (const auto& m : sys.measures) {
      nlohmann::ordered_json mj;
      mj["name"] = m.name;
      if (m.measure.kind() == InvariantMeasure::Kind::bernoulli) {
        mj["kind"] = "bernoulli";
        mj["p"] = m.measure.marginal();
      } else {
        mj["kind"] = "markov";
        mj["P"] = m.measure.transition();
        mj["pi"] = m.measure.marginal();
      }
      ms.push_back(mj);
    }
    j["measures"] = ms;
  }
  return j;
}

}  // namespace subpress
