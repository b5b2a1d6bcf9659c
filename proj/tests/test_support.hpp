// Shared helpers and independent oracles for the test suite. Everything in
// here recomputes expectations by routes separate from the library paths it
// checks (grids, brute force, finite differences).

#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "qre/linalg.hpp"
#include "qre/prob.hpp"
#include "qre/random.hpp"

#include <cmath>
#include <vector>

namespace qt {

using namespace qre;

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Binary varentropy in bits^2 via its closed form.
inline double binary_varentropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  const double d = std::log2(p / (1.0 - p));
  return p * (1.0 - p) * d * d;
}

// Grid-with-refinement maximiser of the binary varentropy over p in (0,1).
inline double binary_varentropy_grid_max() {
  double lo = 1e-6, hi = 1.0 - 1e-6, best_p = 0.5, best = 0.0;
  for (int round = 0; round < 6; ++round) {
    const int steps = 2000;
    for (int i = 0; i <= steps; ++i) {
      const double p = lo + (hi - lo) * i / steps;
      const double v = binary_varentropy(p);
      if (v > best) {
        best = v;
        best_p = p;
      }
    }
    const double w = (hi - lo) / steps * 8;
    lo = std::max(1e-9, best_p - w);
    hi = std::min(1.0 - 1e-9, best_p + w);
  }
  return best;
}

// Best product-state overlap max |<psi x phi| G |psi x phi>| for a two-qubit
// Hermitian G, by a zooming grid over the Bloch angles of psi with the phi
// factor solved exactly (top eigenvector of the conditional operator).
inline double best_product_overlap_grid(const Matrix& g) {
  REQUIRE(g.rows() == 4);
  auto value_for = [&](double theta, double phase) {
    Vector psi(2);
    psi << Complex(std::cos(theta / 2), 0),
        std::polar(std::sin(theta / 2), phase);
    // conditional operator on the second factor
    Matrix m = Matrix::Zero(2, 2);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j)
        for (Index k = 0; k < 2; ++k)
          for (Index l = 0; l < 2; ++l)
            m(j, l) += std::conj(psi(i)) * psi(k) * g(2 * i + j, 2 * k + l);
    return eigh(m).eigenvalues.maxCoeff();
  };
  double t_lo = 0, t_hi = M_PI, p_lo = 0, p_hi = 2 * M_PI;
  double best = -1e300, bt = 0, bp = 0;
  for (int round = 0; round < 5; ++round) {
    const int nt = 48, np = 96;
    for (int i = 0; i <= nt; ++i)
      for (int j = 0; j <= np; ++j) {
        const double th = t_lo + (t_hi - t_lo) * i / nt;
        const double ph = p_lo + (p_hi - p_lo) * j / np;
        const double v = value_for(th, ph);
        if (v > best) {
          best = v;
          bt = th;
          bp = ph;
        }
      }
    const double wt = (t_hi - t_lo) / nt * 4, wp = (p_hi - p_lo) / np * 4;
    t_lo = std::max(0.0, bt - wt);
    t_hi = std::min(M_PI, bt + wt);
    p_lo = bp - wp;
    p_hi = bp + wp;
  }
  return best;
}

// Classical Neyman-Pearson optimum over diagonal tests: minimise sum m_i q_i
// subject to sum m_i p_i >= 1 - eps, 0 <= m_i <= 1 (greedy on likelihood
// ratios with a fractional boundary coefficient).
inline double classical_np_beta(const RealVector& p, const RealVector& q, double eps) {
  const Index d = p.size();
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ra = q(a) > 0 ? p(a) / q(a) : (p(a) > 0 ? 1e300 : 0.0);
    const double rb = q(b) > 0 ? p(b) / q(b) : (p(b) > 0 ? 1e300 : 0.0);
    return ra > rb;
  });
  double need = 1.0 - eps, beta = 0.0;
  for (Index idx : order) {
    if (need <= 1e-15) break;
    if (p(idx) <= need + 1e-18) {
      need -= p(idx);
      beta += q(idx);
    } else {
      const double frac = p(idx) > 0 ? need / p(idx) : 0.0;
      beta += frac * q(idx);
      need = 0.0;
    }
  }
  return beta;
}

}  // namespace qt
