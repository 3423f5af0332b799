#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "subpress/errors.hpp"

namespace subpress {

// log sum_i exp(a_i), stabilized by the maximum. Returns -inf for an empty
// input or when every term is -inf.
inline double log_sum_exp(std::span<const double> a) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : a) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

// Streaming log-sum-exp accumulator. Deterministic for a fixed insertion order.
class LogSumExp {
 public:
  void add(double v) {
    if (v == -std::numeric_limits<double>::infinity()) return;
    if (v <= max_) {
      sum_ += std::exp(v - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - v) + 1.0;
      max_ = v;
    }
  }
  double value() const { return sum_ == 0.0 ? -std::numeric_limits<double>::infinity() : max_ + std::log(sum_); }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

// p_i = exp(a_i) / sum_j exp(a_j), computed after subtracting max(a).
inline std::vector<double> gibbs_distribution(std::span<const double> a) {
  if (a.empty()) throw InputError("gibbs_distribution: empty weight list");
  const double m = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(m)) throw InputError("gibbs_distribution: non-finite weights");
  std::vector<double> p(a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (p[i] = std::exp(a[i] - m));
  for (double& v : p) v /= s;
  return p;
}

struct GibbsInequality {
  double lhs;     // sum p_i (a_i - log p_i)
  double rhs;     // log sum exp(a_i)
  bool equality;  // p matches the Gibbs vector within the tolerance
};

// sum p_i (a_i - log p_i) <= log sum e^{a_i}, with equality exactly at the
// Gibbs vector. Terms with p_i = 0 contribute nothing.
inline GibbsInequality gibbs_inequality(std::span<const double> a, std::span<const double> p,
                                        double tolerance = 1e-12) {
  if (a.size() != p.size() || a.empty()) throw InputError("gibbs_inequality: length mismatch");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InputError("gibbs_inequality: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("gibbs_inequality: probabilities do not sum to 1");

  const double m = *std::max_element(a.begin(), a.end());
  double lhs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (p[i] > 0.0) lhs += p[i] * (a[i] - m - std::log(p[i]));
  lhs += m;
  const double rhs = log_sum_exp(a);

  const auto g = gibbs_distribution(a);
  bool eq = true;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(g[i] - p[i]) > tolerance) eq = false;
  if (lhs > rhs + 1e-12 * (1.0 + std::abs(rhs)))
    throw InvariantViolation("gibbs_inequality: lhs exceeds rhs");
  return {lhs, rhs, eq};
}

// -x log x with 0 log 0 = 0.
inline double eta(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

}  // namespace subpress
