// counterexample.hpp — the varentropy-based refutation of the claimed
// per-letter bound on the weighted log-likelihood variance.
//
// The weighted varentropy V_T(P) with i.i.d. inputs T = P = Q^{x N} equals
// N V(Q) exactly, so g = V_T(P)/n grows to V(Q); a distribution with
// V(Q) > 1 on four symbols therefore breaks both the "g <= 1" and the
// "g = o(1)" assertions.

#pragma once

#include "qre/prob.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qre {

// Variance of the log-likelihood, in bits^2. Zero-probability symbols are
// excluded (0 log^2 0 = 0).
inline double varentropy(const ProbabilityVector& p) {
  double m1 = 0.0, m2 = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    const double l = std::log2(p[i]);
    m1 += p[i] * l;
    m2 += p[i] * l * l;
  }
  return std::max(0.0, m2 - m1 * m1);
}

// sum_x t_x (log2 p_x)^2 - (sum_x t_x log2 p_x)^2. Reduces to varentropy(P)
// when T = P. Symbols with t_x = 0 are excluded; a positive weight on a
// zero-probability symbol is rejected.
inline double weighted_varentropy(const WeightVector& t, const ProbabilityVector& p) {
  detail::require(t.size() == p.size(), "weighted_varentropy: alphabet mismatch");
  double m1 = 0.0, m2 = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    if (t[i] <= 0.0) continue;
    detail::require(p[i] > 0.0, "weighted_varentropy: positive weight on zero-probability symbol");
    const double l = std::log2(p[i]);
    m1 += t[i] * l;
    m2 += t[i] * l * l;
  }
  return m2 - m1 * m1;
}

// The per-letter weighted varentropy g = V_T(P) / n.
inline double g_function(const WeightVector& t, const ProbabilityVector& p, int n) {
  detail::require(n >= 1, "g_function: n must be >= 1");
  return weighted_varentropy(t, p) / static_cast<double>(n);
}

// Explicit i.i.d. product distribution Q^{x N} (d^N entries).
inline ProbabilityVector iid_product(const ProbabilityVector& q, int copies) {
  detail::require(copies >= 1, "iid_product: need at least one copy");
  RealVector out = q.weights();
  for (int c = 1; c < copies; ++c) {
    RealVector next(out.size() * q.size());
    for (Index i = 0; i < out.size(); ++i)
      for (Index j = 0; j < q.size(); ++j) next(i * q.size() + j) = out(i) * q[j];
    out.swap(next);
  }
  return ProbabilityVector(out);
}

// Tilted distribution q_x^{1+s} / sum q^{1+s}.
inline ProbabilityVector tilted_distribution(const ProbabilityVector& q, double s) {
  if (s == 0.0) return q;
  if (s < 0.0)
    detail::require(q.strictly_positive(), "tilted_distribution: zero entry with negative tilt");
  RealVector w(q.size());
  for (Index i = 0; i < q.size(); ++i) w(i) = q[i] > 0.0 ? std::pow(q[i], 1.0 + s) : 0.0;
  const double z = w.sum();
  detail::require(z > 0.0, "tilted_distribution: degenerate tilt");
  return ProbabilityVector(w / z);
}

namespace detail {

inline double varentropy_of(const RealVector& q) {
  return varentropy(ProbabilityVector(q / q.sum()));
}

// One projected-gradient ascent run on the simplex.
inline std::pair<RealVector, double> ascend_varentropy(RealVector q, int max_iters) {
  const double floor_p = 1e-13;
  double step = 0.25;
  double best = varentropy_of(q);
  RealVector best_q = q;
  for (int it = 0; it < max_iters; ++it) {
    RealVector qc = q.cwiseMax(floor_p);
    qc /= qc.sum();
    double m1 = 0.0;
    for (Index i = 0; i < qc.size(); ++i) m1 += qc(i) * std::log2(qc(i));
    RealVector grad(q.size());
    for (Index i = 0; i < q.size(); ++i) {
      const double l = std::log2(qc(i));
      grad(i) = l * l + 2.0 * l / kLn2 - 2.0 * m1 * (l + 1.0 / kLn2);
    }
    const double gn = grad.cwiseAbs().maxCoeff();
    if (gn <= 1e-14) break;
    const RealVector trial = project_to_simplex(qc + (step / gn) * grad);
    const double val = varentropy_of(trial);
    if (val > best + 1e-15) {
      best = val;
      best_q = trial;
      q = trial;
      step = std::min(1.0, step * 1.25);
    } else {
      step *= 0.5;
      if (step < 1e-12) break;
    }
  }
  return {best_q, best};
}

}  // namespace detail

struct VarentropySearchResult {
  ProbabilityVector maximiser;
  double value;  // bits^2
  int restarts;
  double success_fraction;  // fraction of restarts ending above 1 bit^2
};

// Multi-start projected-gradient ascent of V over the d-simplex.
inline VarentropySearchResult max_varentropy_search(Index d, int restarts, std::uint64_t seed) {
  detail::require(d >= 2, "max_varentropy_search: alphabet size must be >= 2");
  detail::require(restarts >= 1, "max_varentropy_search: need at least one restart");
  double best = -1.0;
  RealVector best_q;
  int above_one = 0;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(r)));
    RealVector q0;
    if (r == 0) {
      // structured start: one heavy symbol, the rest equal
      q0 = RealVector::Constant(d, 0.15 / static_cast<double>(d - 1));
      q0(0) = 0.85;
    } else {
      q0 = random_simplex_point(d, rng);
    }
    auto [q, val] = detail::ascend_varentropy(q0, 4000);
    if (val > 1.0) ++above_one;
    if (val > best) {
      best = val;
      best_q = q;
    }
  }
  return {ProbabilityVector(best_q), best, restarts,
          static_cast<double>(above_one) / static_cast<double>(restarts)};
}

struct CounterexampleRow {
  int n;
  double g;                  // bits^2 per letter
  bool violates_g_le_1;
  double explicit_check_dev;  // |closed form - explicit product|, negative if skipped
};

struct CounterexampleReport {
  Index d = 0;
  int m = 0;
  int r = 0;
  ProbabilityVector q_star{RealVector::Constant(1, 1.0)};
  double v_q = 0.0;           // bits^2
  double search_success_fraction = 0.0;
  std::vector<CounterexampleRow> rows;
  bool any_g_above_1 = false;
  bool g_nondecreasing = false;
  bool o1_claim_violated = false;
  double log2_min_prob_last = 0.0;  // log2 of the smallest probability of the constructed P
};

// Reproduces the i.i.d. violation: find Q maximising V on d symbols, set
// T = P = Q^{x(n-m-r)} and evaluate g = V_T(P)/n per requested n. The value
// uses the exact additivity V_{Q^N}(Q^N) = N V(Q); for alphabets small
// enough the explicit product construction is built and compared.
inline CounterexampleReport counterexample_report(Index d, int m, int r,
                                                  const std::vector<int>& n_list, int restarts,
                                                  std::uint64_t seed) {
  detail::require(m >= 0 && r >= 0, "counterexample_report: m, r must be nonnegative");
  detail::require(!n_list.empty(), "counterexample_report: empty n list");
  for (int n : n_list)
    detail::require(n > m + r, "counterexample_report: every n must exceed m + r");

  auto search = max_varentropy_search(d, restarts, seed);
  CounterexampleReport rep;
  rep.d = d;
  rep.m = m;
  rep.r = r;
  rep.q_star = search.maximiser;
  rep.v_q = search.value;
  rep.search_success_fraction = search.success_fraction;

  double prev_g = -kInfinity;
  rep.g_nondecreasing = true;
  for (int n : n_list) {
    const int copies = n - m - r;
    const double g = static_cast<double>(copies) * rep.v_q / static_cast<double>(n);
    CounterexampleRow row{n, g, g > 1.0, -1.0};
    // Explicit cross-check where the product vector is materialisable.
    double cells = std::pow(static_cast<double>(d), copies);
    if (cells <= (1 << 20)) {
      const ProbabilityVector p = iid_product(rep.q_star, copies);
      const double g_explicit = g_function(WeightVector(p), p, n);
      row.explicit_check_dev = std::abs(g_explicit - g);
    }
    rep.any_g_above_1 = rep.any_g_above_1 || row.violates_g_le_1;
    if (g < prev_g - 1e-12) rep.g_nondecreasing = false;
    prev_g = g;
    rep.rows.push_back(row);
  }

  // A sequence that never decreases and ends above half its limiting value
  // is incompatible with g = o(1).
  rep.o1_claim_violated = rep.g_nondecreasing && !rep.rows.empty() &&
                          rep.rows.back().g > 0.5 * rep.v_q && rep.rows.back().g > 0.0;

  const int last_copies = n_list.back() - m - r;
  rep.log2_min_prob_last =
      static_cast<double>(last_copies) * std::log2(rep.q_star.weights().minCoeff());
  return rep;
}

}  // namespace qre
