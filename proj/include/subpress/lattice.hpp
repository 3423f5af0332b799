#pragma once

// Finite-subset combinatorics on the lattice Z^d: points, canonical finite
// sets, Folner boxes, invariance defects and tiling centers. The group is
// written additively, so a right translate Fg is F + g.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "subpress/errors.hpp"

namespace subpress {

using Coord = std::int64_t;

class Point {
 public:
  Point() = default;
  explicit Point(std::vector<Coord> coords) : coords_(std::move(coords)) {}
  Point(std::initializer_list<Coord> coords) : coords_(coords) {}

  static Point zero(int dim) { return Point(std::vector<Coord>(static_cast<std::size_t>(dim), 0)); }
  static Point axis(int dim, int i, Coord length = 1) {
    Point p = zero(dim);
    p.coords_[static_cast<std::size_t>(i)] = length;
    return p;
  }

  int dim() const { return static_cast<int>(coords_.size()); }
  Coord operator[](int i) const { return coords_[static_cast<std::size_t>(i)]; }
  Coord& operator[](int i) { return coords_[static_cast<std::size_t>(i)]; }
  const std::vector<Coord>& coords() const { return coords_; }

  Point operator+(const Point& o) const {
    check_dim(o);
    Point r = *this;
    for (std::size_t i = 0; i < coords_.size(); ++i) r.coords_[i] += o.coords_[i];
    return r;
  }
  Point operator-(const Point& o) const {
    check_dim(o);
    Point r = *this;
    for (std::size_t i = 0; i < coords_.size(); ++i) r.coords_[i] -= o.coords_[i];
    return r;
  }
  Point operator-() const {
    Point r = *this;
    for (auto& c : r.coords_) c = -c;
    return r;
  }

  auto operator<=>(const Point&) const = default;
  bool operator==(const Point&) const = default;

  std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? "," : "") << coords_[i];
    os << ')';
    return os.str();
  }

 private:
  void check_dim(const Point& o) const {
    if (o.coords_.size() != coords_.size()) throw InputError("point dimension mismatch");
  }

  std::vector<Coord> coords_;
};

// A finite subset of Z^d stored sorted and duplicate free. All elements share
// the set's dimension. Translation preserves the sorted order, which the
// pattern code relies on.
class FiniteSubset {
 public:
  FiniteSubset() = default;
  explicit FiniteSubset(int dim) : dim_(dim) {}
  FiniteSubset(int dim, std::vector<Point> pts) : dim_(dim), elems_(std::move(pts)) {
    for (const auto& p : elems_)
      if (p.dim() != dim_) throw InputError("point " + p.str() + " has wrong dimension");
    std::sort(elems_.begin(), elems_.end());
    elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
  }

  // One-dimensional convenience: {c0, c1, ...}.
  static FiniteSubset line(std::initializer_list<Coord> cs) {
    std::vector<Point> pts;
    for (Coord c : cs) pts.push_back(Point{c});
    return FiniteSubset(1, std::move(pts));
  }
  static FiniteSubset interval(Coord lo, Coord hi) {
    std::vector<Point> pts;
    for (Coord c = lo; c < hi; ++c) pts.push_back(Point{c});
    return FiniteSubset(1, std::move(pts));
  }
  static FiniteSubset singleton(const Point& p) { return FiniteSubset(p.dim(), {p}); }

  int dim() const { return dim_; }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const std::vector<Point>& elements() const { return elems_; }
  const Point& operator[](std::size_t i) const { return elems_[i]; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }

  bool contains(const Point& p) const { return std::binary_search(elems_.begin(), elems_.end(), p); }

  // Position of p in sorted order, or -1.
  long index_of(const Point& p) const {
    auto it = std::lower_bound(elems_.begin(), elems_.end(), p);
    if (it == elems_.end() || *it != p) return -1;
    return static_cast<long>(it - elems_.begin());
  }

  bool operator==(const FiniteSubset& o) const { return dim_ == o.dim_ && elems_ == o.elems_; }
  auto operator<=>(const FiniteSubset& o) const {
    if (auto c = dim_ <=> o.dim_; c != 0) return c;
    return elems_ <=> o.elems_;
  }

  bool subset_of(const FiniteSubset& o) const {
    return std::includes(o.elems_.begin(), o.elems_.end(), elems_.begin(), elems_.end());
  }

  // Componentwise minimum and maximum; requires non-empty.
  Point lower_corner() const {
    require_nonempty("lower_corner");
    Point lo = elems_.front();
    for (const auto& p : elems_)
      for (int i = 0; i < dim_; ++i) lo[i] = std::min(lo[i], p[i]);
    return lo;
  }
  Point upper_corner() const {
    require_nonempty("upper_corner");
    Point hi = elems_.front();
    for (const auto& p : elems_)
      for (int i = 0; i < dim_; ++i) hi[i] = std::max(hi[i], p[i]);
    return hi;
  }

  // True when the set fills its bounding box.
  bool is_box() const {
    if (elems_.empty()) return false;
    Point lo = lower_corner(), hi = upper_corner();
    std::size_t vol = 1;
    for (int i = 0; i < dim_; ++i) vol *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
    return vol == elems_.size();
  }

  std::string str() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < elems_.size(); ++i) os << (i ? "," : "") << elems_[i].str();
    os << '}';
    return os.str();
  }

  void require_nonempty(const char* what) const {
    if (elems_.empty()) throw InputError(std::string(what) + ": empty set");
  }

 private:
  int dim_ = 0;
  std::vector<Point> elems_;
};

namespace detail {
inline void require_same_dim(const FiniteSubset& a, const FiniteSubset& b, const char* what) {
  if (a.dim() != b.dim())
    throw InputError(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()) + ")");
}
}  // namespace detail

inline FiniteSubset translate(const FiniteSubset& F, const Point& g) {
  if (g.dim() != F.dim()) throw InputError("translate: dimension mismatch");
  std::vector<Point> pts;
  pts.reserve(F.size());
  for (const auto& p : F) pts.push_back(p + g);
  return FiniteSubset(F.dim(), std::move(pts));
}

inline FiniteSubset set_union(const FiniteSubset& a, const FiniteSubset& b) {
  detail::require_same_dim(a, b, "set_union");
  std::vector<Point> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteSubset(a.dim(), std::move(out));
}

inline FiniteSubset set_intersection(const FiniteSubset& a, const FiniteSubset& b) {
  detail::require_same_dim(a, b, "set_intersection");
  std::vector<Point> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteSubset(a.dim(), std::move(out));
}

inline FiniteSubset set_difference(const FiniteSubset& a, const FiniteSubset& b) {
  detail::require_same_dim(a, b, "set_difference");
  std::vector<Point> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteSubset(a.dim(), std::move(out));
}

inline FiniteSubset symmetric_difference(const FiniteSubset& a, const FiniteSubset& b) {
  detail::require_same_dim(a, b, "symmetric_difference");
  std::vector<Point> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return FiniteSubset(a.dim(), std::move(out));
}

// KF = {k + f : k in K, f in F}.
inline FiniteSubset sumset(const FiniteSubset& K, const FiniteSubset& F) {
  detail::require_same_dim(K, F, "sumset");
  std::vector<Point> out;
  out.reserve(K.size() * F.size());
  for (const auto& k : K)
    for (const auto& f : F) out.push_back(k + f);
  return FiniteSubset(F.dim(), std::move(out));
}

// The box prod [lo_i, lo_i + side_i).
inline FiniteSubset box(const Point& lo, const std::vector<Coord>& sides) {
  const int d = lo.dim();
  if (static_cast<int>(sides.size()) != d) throw InputError("box: sides/dimension mismatch");
  std::size_t vol = 1;
  for (Coord s : sides) {
    if (s <= 0) throw InputError("box: side lengths must be positive");
    vol *= static_cast<std::size_t>(s);
  }
  std::vector<Point> pts;
  pts.reserve(vol);
  std::vector<Coord> off(static_cast<std::size_t>(d), 0);
  for (std::size_t n = 0; n < vol; ++n) {
    Point p = lo;
    for (int i = 0; i < d; ++i) p[i] += off[static_cast<std::size_t>(i)];
    pts.push_back(std::move(p));
    for (int i = d - 1; i >= 0; --i) {
      auto& o = off[static_cast<std::size_t>(i)];
      if (++o < sides[static_cast<std::size_t>(i)]) break;
      o = 0;
    }
  }
  return FiniteSubset(d, std::move(pts));
}

// [0, n)^d, the n-th member of the box Folner sequence.
inline FiniteSubset folner_box(int d, Coord n) {
  if (d < 1) throw InputError("folner_box: dimension must be >= 1");
  if (n < 1) throw InputError("folner_box: side must be >= 1");
  return box(Point::zero(d), std::vector<Coord>(static_cast<std::size_t>(d), n));
}

// |KF symmetric-difference F| / |F|.
inline double invariance_defect(const FiniteSubset& F, const FiniteSubset& K) {
  detail::require_same_dim(F, K, "invariance_defect");
  F.require_nonempty("invariance_defect(F)");
  K.require_nonempty("invariance_defect(K)");
  return static_cast<double>(symmetric_difference(sumset(K, F), F).size()) / static_cast<double>(F.size());
}

struct TileCover {
  FiniteSubset centers;   // C_n, a subset of the tile's period lattice
  FiniteSubset covering;  // T + C_n
};

// Canonical grid-aligned tiling centers of a box F relative to a box tile T
// with lower corner at the origin: every translate T + c with c on the
// period lattice that meets F. The translates are disjoint, cover F and each
// meets F.
inline TileCover tile_centers(const FiniteSubset& F, const FiniteSubset& T) {
  detail::require_same_dim(F, T, "tile_centers");
  F.require_nonempty("tile_centers(F)");
  if (!T.is_box() || T.lower_corner() != Point::zero(T.dim()))
    throw InputError("tile_centers: tile must be a box with lower corner at the origin");
  if (!F.is_box()) throw InputError("tile_centers: F must be a box");
  const int d = F.dim();
  const Point t = T.upper_corner();
  const Point lo = F.lower_corner(), hi = F.upper_corner();
  auto floor_div = [](Coord a, Coord b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };

  Point first = Point::zero(d);
  std::vector<Coord> counts(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const Coord side = t[i] + 1;
    const Coord c0 = floor_div(lo[i], side) * side;
    const Coord c1 = floor_div(hi[i], side) * side;
    first[i] = c0;
    counts[static_cast<std::size_t>(i)] = (c1 - c0) / side + 1;
  }
  FiniteSubset grid = box(Point::zero(d), counts);
  std::vector<Point> centers;
  centers.reserve(grid.size());
  for (const auto& p : grid) {
    Point c = first;
    for (int i = 0; i < d; ++i) c[i] += p[i] * (t[i] + 1);
    centers.push_back(std::move(c));
  }
  FiniteSubset C(d, std::move(centers));
  return TileCover{C, sumset(T, C)};
}

// A_{F,B} = {g : g - b in F for all b in B}.
inline FiniteSubset interior_core(const FiniteSubset& F, const FiniteSubset& B) {
  detail::require_same_dim(F, B, "interior_core");
  F.require_nonempty("interior_core(F)");
  B.require_nonempty("interior_core(B)");
  // Any g in A satisfies g = f + b for every b, so candidates come from F + B[0].
  std::vector<Point> out;
  for (const auto& f : F) {
    Point g = f + B[0];
    bool ok = true;
    for (const auto& b : B)
      if (!F.contains(g - b)) {
        ok = false;
        break;
      }
    if (ok) out.push_back(std::move(g));
  }
  return FiniteSubset(F.dim(), std::move(out));
}

}  // namespace subpress
