// prob.hpp — classical distributions, weight vectors and divergences (bits).

#pragma once

#include "qre/core.hpp"
#include "qre/random.hpp"

#include <vector>

namespace qre {

class ProbabilityVector {
 public:
  explicit ProbabilityVector(RealVector w) : w_(std::move(w)) {
    detail::require(w_.size() >= 1, "ProbabilityVector: empty alphabet");
    detail::require(w_.minCoeff() >= 0.0, "ProbabilityVector: negative weight");
    detail::require(std::abs(w_.sum() - 1.0) <= 1e-12, "ProbabilityVector: weights must sum to one");
  }
  static ProbabilityVector uniform(Index d) {
    return ProbabilityVector(RealVector::Constant(d, 1.0 / static_cast<double>(d)));
  }
  Index size() const { return w_.size(); }
  double operator[](Index i) const { return w_(i); }
  const RealVector& weights() const { return w_; }
  bool strictly_positive() const { return w_.minCoeff() > 0.0; }

 private:
  RealVector w_;
};

// Nonnegative weights, not necessarily normalised.
class WeightVector {
 public:
  explicit WeightVector(RealVector w) : w_(std::move(w)) {
    detail::require(w_.size() >= 1, "WeightVector: empty alphabet");
    detail::require(w_.minCoeff() >= 0.0, "WeightVector: negative weight");
  }
  WeightVector(const ProbabilityVector& p) : w_(p.weights()) {}  // NOLINT: intended conversion
  Index size() const { return w_.size(); }
  double operator[](Index i) const { return w_(i); }
  const RealVector& weights() const { return w_; }

 private:
  RealVector w_;
};

inline double shannon_entropy(const ProbabilityVector& p) {
  double h = 0.0;
  for (Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log2(p[i]);
  return h;
}

inline double binary_entropy(double e) {
  double h = 0.0;
  if (e > 0.0) h -= e * std::log2(e);
  if (e < 1.0) h -= (1.0 - e) * std::log2(1.0 - e);
  return h;
}

// Kullback-Leibler divergence in bits; +inf when p charges a q-null symbol.
inline double kl_divergence(const RealVector& p, const RealVector& q) {
  detail::require(p.size() == q.size(), "kl_divergence: alphabet mismatch");
  double d = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    if (q(i) <= 0.0) return kInfinity;
    d += p(i) * std::log2(p(i) / q(i));
  }
  return std::max(0.0, d);
}

inline double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q) {
  return kl_divergence(p.weights(), q.weights());
}

// Auxiliary continuity function g(x) = (1+x) log2(1+x) - x log2 x, g(0) = 0.
inline double continuity_g(double x) {
  detail::require(x >= 0.0, "continuity_g: negative argument");
  if (x == 0.0) return 0.0;
  return (1.0 + x) * std::log2(1.0 + x) - x * std::log2(x);
}

// Euclidean projection onto the probability simplex (sort-based).
inline RealVector project_to_simplex(const RealVector& y) {
  const Index d = y.size();
  std::vector<double> u(y.data(), y.data() + d);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  Index k = 0;
  for (Index i = 0; i < d; ++i) {
    css += u[static_cast<std::size_t>(i)];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0.0) {
      theta = t;
      k = i + 1;
    }
  }
  (void)k;
  RealVector x(d);
  for (Index i = 0; i < d; ++i) x(i) = std::max(0.0, y(i) - theta);
  return x;
}

}  // namespace qre
