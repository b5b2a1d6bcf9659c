// divergences.hpp — relative entropy quantities between density operators:
// Umegaki, measured (variational ascent), max-relative entropy, hypothesis
// testing (exact Neyman-Pearson), smoothed max-relative entropy, pinching.
// All values in bits; the divergent branch is IEEE +infinity, never a large
// finite float.

#pragma once

#include "qre/linalg.hpp"
#include "qre/prob.hpp"

#include <optional>

namespace qre {

struct DivergenceValue {
  double value = 0.0;                 // bits (+infinity on the divergent branch)
  std::optional<Matrix> certificate;  // optimal test / observable / smoothing state
  double gap = 0.0;                   // primal-dual or last-step residual, bits
  bool is_infinite() const { return std::isinf(value); }

  static DivergenceValue infinite() { return DivergenceValue{kInfinity, std::nullopt, 0.0}; }
};

namespace detail {

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), std::string(who) + ": shape mismatch");
}

// Frechet derivative of X -> Tr[rho ln X] at sigma (given its eigensystem),
// i.e. the divided-difference transform of rho in sigma's eigenbasis. Nats.
inline Matrix log_gradient_transform(const EighResult& es, const Matrix& rho) {
  const Index n = es.eigenvalues.size();
  const double floor_ev = std::max(1e-300, 1e-18 * es.eigenvalues.cwiseAbs().maxCoeff());
  Matrix r = es.eigenvectors.adjoint() * rho * es.eigenvectors;
  for (Index i = 0; i < n; ++i) {
    const double wi = std::max(es.eigenvalues(i), floor_ev);
    for (Index j = 0; j < n; ++j) {
      const double wj = std::max(es.eigenvalues(j), floor_ev);
      double f;
      if (std::abs(wi - wj) <= 1e-12 * std::max(wi, wj)) {
        f = 2.0 / (wi + wj);
      } else {
        f = (std::log(wi) - std::log(wj)) / (wi - wj);
      }
      r(i, j) *= f;
    }
  }
  return es.eigenvectors * r * es.eigenvectors.adjoint();
}

// Compress a Hermitian operator to the support of sigma. Returns the support
// basis U (columns) and eigenvalues of sigma on it.
struct SupportBasis {
  Matrix u;          // dim x s
  RealVector evals;  // s entries, ascending, all > cutoff
};

inline SupportBasis support_basis(const Matrix& sigma) {
  const auto e = eigh(sigma);
  const double cut = support_cutoff(e.eigenvalues);
  std::vector<Index> idx;
  for (Index i = 0; i < e.eigenvalues.size(); ++i)
    if (e.eigenvalues(i) > cut) idx.push_back(i);
  SupportBasis b;
  b.u.resize(sigma.rows(), static_cast<Index>(idx.size()));
  b.evals.resize(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    b.u.col(static_cast<Index>(k)) = e.eigenvectors.col(idx[k]);
    b.evals(static_cast<Index>(k)) = e.eigenvalues(idx[k]);
  }
  return b;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Umegaki relative entropy
// ---------------------------------------------------------------------------

inline DivergenceValue umegaki(const Matrix& rho, const Matrix& sigma) {
  detail::check_same_shape(rho, sigma, "umegaki");
  if (!support_contained(rho, sigma)) return DivergenceValue::infinite();
  const auto er = eigh(rho);
  double s_rho = 0.0;  // Tr rho log2 rho
  const double cut = detail::support_cutoff(er.eigenvalues);
  for (Index i = 0; i < er.eigenvalues.size(); ++i)
    if (er.eigenvalues(i) > cut) s_rho += er.eigenvalues(i) * std::log2(er.eigenvalues(i));
  const double cross = std::real((rho * matrix_log2_on_support(sigma)).trace());
  return DivergenceValue{std::max(0.0, s_rho - cross), std::nullopt, 0.0};
}

// ---------------------------------------------------------------------------
// Max-relative entropy
// ---------------------------------------------------------------------------

inline DivergenceValue dmax(const Matrix& rho, const Matrix& sigma) {
  detail::check_same_shape(rho, sigma, "dmax");
  if (!support_contained(rho, sigma)) return DivergenceValue::infinite();
  const auto b = detail::support_basis(sigma);
  const Matrix rc = b.u.adjoint() * rho * b.u;
  const RealVector si = b.evals.cwiseSqrt().cwiseInverse();
  const Matrix w = si.asDiagonal() * rc * si.asDiagonal();
  const auto ew = eigh(0.5 * (w + w.adjoint()));
  const Index top = ew.eigenvalues.size() - 1;
  const double lmax = ew.eigenvalues(top);
  Vector v = b.u * (si.asDiagonal() * ew.eigenvectors.col(top));
  v /= v.norm();
  DivergenceValue out;
  out.value = lmax > 0 ? std::max(0.0, std::log2(lmax)) : 0.0;
  out.certificate = projector(v);
  return out;
}

// ---------------------------------------------------------------------------
// Hypothesis testing relative entropy (exact Neyman-Pearson)
// ---------------------------------------------------------------------------

struct NeymanPearsonResult {
  double beta = 0.0;        // least type-II error at type-I error <= eps
  double beta_dual = 0.0;   // concave-dual value (lower bound on beta)
  Matrix test;              // optimal M, 0 <= M <= 1
  double type_one = 0.0;    // Tr M rho of the returned test
};

// Solves min{ Tr M sigma : 0 <= M <= 1, Tr M rho >= 1 - eps } exactly via the
// concave dual max_{t>=0} [ t(1-eps) - Tr(t rho - sigma)_+ ] with a
// fractionally weighted boundary eigenspace on the primal side.
inline NeymanPearsonResult neyman_pearson(const Matrix& rho, const Matrix& sigma, double eps) {
  detail::check_same_shape(rho, sigma, "neyman_pearson");
  detail::require(eps >= 0.0 && eps <= 1.0, "neyman_pearson: eps must lie in [0, 1]");
  const Index d = rho.rows();

  NeymanPearsonResult res;
  if (eps >= 1.0) {
    res.test = Matrix::Zero(d, d);
    return res;  // beta = 0
  }

  // Directions outside supp sigma cost nothing and absorb type-I budget.
  const auto b = detail::support_basis(sigma);
  const Matrix kernel_proj = Matrix::Identity(d, d) - b.u * b.u.adjoint();
  const double a = std::max(0.0, std::real((kernel_proj * rho).trace()));
  const double need = 1.0 - eps - a;
  if (need <= 1e-14) {
    res.test = kernel_proj;
    res.type_one = a;
    return res;  // beta = 0: disjoint enough supports
  }

  const Matrix rc = b.u.adjoint() * rho * b.u;  // trace 1 - a
  const RealVector sv = b.evals;
  const Index s = sv.size();

  auto alpha_plus = [&](double t) {
    Matrix m = t * rc;
    for (Index i = 0; i < s; ++i) m(i, i) -= sv(i);
    const auto e = eigh(0.5 * (m + m.adjoint()));
    double al = 0.0;
    for (Index i = 0; i < s; ++i) {
      if (e.eigenvalues(i) > 0.0) {
        const Vector v = e.eigenvectors.col(i);
        al += std::real((v.adjoint() * rc * v)(0, 0));
      }
    }
    return al;
  };

  double t_lo = 0.0, t_hi = 1.0;
  for (int grow = 0; grow < 200 && alpha_plus(t_hi) < need; ++grow) t_hi *= 2.0;
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    if (alpha_plus(mid) >= need)
      t_hi = mid;
    else
      t_lo = mid;
    if (t_hi - t_lo <= 1e-15 * std::max(1.0, t_hi)) break;
  }
  const double t_star = 0.5 * (t_lo + t_hi);

  Matrix pencil = t_star * rc;
  for (Index i = 0; i < s; ++i) pencil(i, i) -= sv(i);
  const auto ep = eigh(0.5 * (pencil + pencil.adjoint()));
  // Boundary detection scale: eigenvalues move at rate ~||rho|| in t, so the
  // crossing eigenspace sits within bracket_width * ||rho|| of zero.
  const double scale =
      std::max({1e-300, rc.cwiseAbs().maxCoeff() * std::max(1.0, t_star), sv.maxCoeff()});

  // dual value at t_star
  double dual = t_star * need;
  for (Index i = 0; i < s; ++i) dual -= std::max(0.0, ep.eigenvalues(i));

  // primal: strict positive part plus a fractional weight on the boundary
  Matrix m_supp;
  double alpha_supp = 0.0;
  bool built = false;
  for (double kappa = 1e-14 * scale; kappa <= 1e-5 * scale; kappa *= 10.0) {
    Matrix p_pos = Matrix::Zero(s, s), p_zero = Matrix::Zero(s, s);
    for (Index i = 0; i < s; ++i) {
      if (ep.eigenvalues(i) > kappa)
        p_pos += projector(ep.eigenvectors.col(i));
      else if (ep.eigenvalues(i) >= -kappa)
        p_zero += projector(ep.eigenvectors.col(i));
    }
    const double a_pos = std::real((p_pos * rc).trace());
    const double a_zero = std::real((p_zero * rc).trace());
    if (a_pos <= need + 1e-12 && a_pos + a_zero >= need - 1e-12) {
      const double c = a_zero > 0.0 ? std::clamp((need - a_pos) / a_zero, 0.0, 1.0) : 0.0;
      m_supp = p_pos + c * p_zero;
      alpha_supp = a_pos + c * a_zero;
      built = true;
      break;
    }
  }
  if (built && a + alpha_supp < 1.0 - eps - 1e-10) built = false;
  if (!built) {
    // fall back to the feasible side of the bracket
    Matrix m2 = t_hi * rc;
    for (Index i = 0; i < s; ++i) m2(i, i) -= sv(i);
    const auto e2 = eigh(0.5 * (m2 + m2.adjoint()));
    m_supp = Matrix::Zero(s, s);
    for (Index i = 0; i < s; ++i)
      if (e2.eigenvalues(i) > 0.0) m_supp += projector(e2.eigenvectors.col(i));
    alpha_supp = std::real((m_supp * rc).trace());
  }

  double beta = 0.0;
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j)
      if (i == j) beta += std::real(m_supp(i, i)) * sv(i);

  res.beta = std::max(beta, 0.0);
  res.beta_dual = std::max(dual, 0.0);
  res.test = kernel_proj + b.u * m_supp * b.u.adjoint();
  res.type_one = a + alpha_supp;
  return res;
}

inline DivergenceValue hypothesis_testing(const Matrix& rho, const Matrix& sigma, double eps) {
  const auto np = neyman_pearson(rho, sigma, eps);
  DivergenceValue out;
  out.certificate = np.test;
  if (np.beta <= 0.0) {
    out.value = kInfinity;
    return out;
  }
  out.value = -std::log2(np.beta);
  if (np.beta_dual > 0.0) out.gap = std::max(0.0, std::log2(np.beta / np.beta_dual));
  return out;
}

// ---------------------------------------------------------------------------
// Measured relative entropy over all POVMs (variational ascent)
// ---------------------------------------------------------------------------

struct MeasuredOptions {
  int max_iters = 100000;
  double improve_tol = 1e-12;  // consecutive-improvement stop, relative
  bool throw_on_nonconvergence = false;
};

// D^ALL via the concave variational form sup_{w > 0} Tr rho ln w + 1 - Tr sigma w
// (gradient ascent with backtracking). Any feasible w certifies a lower bound,
// which is what the returned value reports.
inline DivergenceValue measured_all(const Matrix& rho, const Matrix& sigma,
                                    const MeasuredOptions& opts = {}) {
  detail::check_same_shape(rho, sigma, "measured_all");
  if (!support_contained(rho, sigma)) return DivergenceValue::infinite();

  const auto b = detail::support_basis(sigma);
  const Index s = b.evals.size();
  const Matrix rc = b.u.adjoint() * rho * b.u;
  Matrix sc = Matrix::Zero(s, s);
  for (Index i = 0; i < s; ++i) sc(i, i) = b.evals(i);

  auto objective = [&](const Matrix& w) {
    const auto ew = eigh(w);
    if (ew.eigenvalues.minCoeff() <= 0.0) return -kInfinity;
    double tr_rho_ln = 0.0;
    Matrix lnw = ew.eigenvectors *
                 ew.eigenvalues.array().log().matrix().asDiagonal() *
                 ew.eigenvectors.adjoint();
    tr_rho_ln = std::real((rc * lnw).trace());
    return tr_rho_ln + 1.0 - std::real((sc * w).trace());
  };

  // Start from the commuting-case optimum exp(ln(rho + delta) - ln(sigma)).
  Matrix w0;
  {
    Matrix reg = rc + 1e-12 * Matrix::Identity(s, s);
    Matrix h = apply_hermitian(reg, [](double x) { return std::log(std::max(x, 1e-300)); }) -
               apply_hermitian(sc, [](double x) { return std::log(std::max(x, 1e-300)); });
    w0 = apply_hermitian(h, [](double x) { return std::exp(std::min(x, 700.0)); });
    if (objective(w0) < objective(Matrix::Identity(s, s))) w0 = Matrix::Identity(s, s);
  }

  Matrix w = w0;
  double f = objective(w);
  double step = 1.0;
  int flat = 0;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    const auto ew = eigh(w);
    Matrix grad = detail::log_gradient_transform(ew, rc) - sc;
    const double gn = grad.cwiseAbs().maxCoeff();
    if (gn <= 1e-14) break;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Matrix trial = w + step * grad;
      // clip to the positive-definite cone
      const auto et = eigh(0.5 * (trial + trial.adjoint()));
      const double fl = std::max(1e-18 * std::max(1.0, et.eigenvalues.maxCoeff()), 1e-300);
      trial = et.eigenvectors * et.eigenvalues.cwiseMax(fl).asDiagonal() * et.eigenvectors.adjoint();
      const double ft = objective(trial);
      if (ft > f) {
        const double improve = ft - f;
        w = trial;
        f = ft;
        step = std::min(step * 1.25, 1e6);
        accepted = true;
        flat = improve <= opts.improve_tol * std::max(1.0, std::abs(f)) ? flat + 1 : 0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || flat >= 3) break;
  }

  if (opts.throw_on_nonconvergence && it >= opts.max_iters)
    throw NumericalError("measured_all: ascent did not converge", to_bits(f));

  // Optimal rescaling turns the value into Tr rho ln w - ln Tr sigma w.
  const double tsw = std::real((sc * w).trace());
  double f1 = f;
  if (tsw > 0.0) f1 = f - 1.0 + tsw - std::log(tsw);
  DivergenceValue out;
  out.value = std::max(0.0, to_bits(std::max(f, f1)));
  out.certificate = b.u * (w / tsw) * b.u.adjoint();
  out.gap = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Measured relative entropy over an explicit measurement family (lower bound)
// ---------------------------------------------------------------------------

inline DivergenceValue measured_restricted(
    const Matrix& rho, const Matrix& sigma, const std::vector<Povm>& measurements,
    const std::function<bool(const Matrix&)>& cone_predicate = {}) {
  detail::check_same_shape(rho, sigma, "measured_restricted");
  detail::require(!measurements.empty(), "measured_restricted: empty measurement family");
  double best = 0.0;
  for (const auto& m : measurements) {
    if (cone_predicate)
      for (const auto& e : m.effects())
        detail::require(cone_predicate(e), "measured_restricted: effect outside the allowed cone");
    const double kl = kl_divergence(m.outcome_distribution(rho), m.outcome_distribution(sigma));
    best = std::max(best, kl);
  }
  DivergenceValue out;
  out.value = best;
  return out;
}

// ---------------------------------------------------------------------------
// Smoothed max-relative entropy (upper bound via a feasible smoothing state)
// ---------------------------------------------------------------------------

namespace detail {

// Projection of delta's spectrum onto the trace-norm ball of radius 2*eps.
inline Matrix project_trace_ball(const Matrix& delta, double radius) {
  const auto e = eigh(delta);
  const double l1 = e.eigenvalues.cwiseAbs().sum();
  if (l1 <= radius) return delta;
  // water-filling shrinkage of |eigenvalues| onto the l1 ball
  RealVector mag = e.eigenvalues.cwiseAbs();
  std::vector<double> u(mag.data(), mag.data() + mag.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double acc = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += u[i];
    const double t = (acc - radius) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  RealVector shrunk(mag.size());
  for (Index i = 0; i < mag.size(); ++i) {
    const double m = std::max(0.0, mag(i) - theta);
    shrunk(i) = e.eigenvalues(i) >= 0 ? m : -m;
  }
  return e.eigenvectors * shrunk.asDiagonal() * e.eigenvectors.adjoint();
}

inline Matrix project_to_states(const Matrix& x) {
  const auto e = eigh(0.5 * (x + x.adjoint()));
  const RealVector w = project_to_simplex(e.eigenvalues);
  return e.eigenvectors * w.asDiagonal() * e.eigenvectors.adjoint();
}

// Alternating projection onto {states} intersect {trace-ball around rho}.
inline Matrix project_feasible_smoothing(Matrix x, const Matrix& rho, double eps) {
  for (int round = 0; round < 80; ++round) {
    x = rho + project_trace_ball(x - rho, 2.0 * eps);
    x = project_to_states(x);
    if (0.5 * trace_norm(x - rho) <= eps + 1e-12) break;
  }
  // final tightening toward rho if the ball constraint is still slightly off
  const double td = 0.5 * trace_norm(x - rho);
  if (td > eps && td > 0.0) {
    const double lam = eps / td;
    x = rho + lam * (x - rho);
  }
  return 0.5 * (x + x.adjoint());
}

}  // namespace detail

struct SmoothedDmaxOptions {
  int max_iters = 300;
  double step0 = 0.25;
};

// min over states rho' with (1/2)||rho' - rho||_1 <= eps of Dmax(rho'||sigma),
// by projected subgradient descent. Returns the exact Dmax at the best
// feasible point found, so the value is a certified upper bound.
inline DivergenceValue smoothed_dmax(const Matrix& rho, const Matrix& sigma, double eps,
                                     const SmoothedDmaxOptions& opts = {}) {
  detail::check_same_shape(rho, sigma, "smoothed_dmax");
  detail::require(eps >= 0.0 && eps < 1.0, "smoothed_dmax: eps must lie in [0, 1)");
  if (eps == 0.0) return dmax(rho, sigma);

  const double leak = support_leak(rho, sigma);
  if (leak > eps + 1e-9) return DivergenceValue::infinite();

  const Index d = rho.rows();
  auto value_of = [&](const Matrix& x) { return dmax(x, sigma).value; };

  // feasible starting candidates
  std::vector<Matrix> starts;
  starts.push_back(detail::project_feasible_smoothing(rho, rho, eps));
  starts.push_back(
      detail::project_feasible_smoothing((1.0 - eps) * rho + eps * sigma, rho, eps));
  starts.push_back(detail::project_feasible_smoothing(
      (1.0 - eps) * rho + eps * maximally_mixed(d), rho, eps));

  Matrix best;
  double best_val = kInfinity;
  for (const auto& s0 : starts) {
    const double v = value_of(s0);
    if (v < best_val) {
      best_val = v;
      best = s0;
    }
  }

  Matrix x = best;
  double prev_val = best_val;
  const auto sb = detail::support_basis(sigma);
  const RealVector si = sb.evals.cwiseSqrt().cwiseInverse();
  for (int it = 0; it < opts.max_iters; ++it) {
    // subgradient of log2 lambda_max(S^-1/2 x S^-1/2)
    const Matrix xc = sb.u.adjoint() * x * sb.u;
    const Matrix w = si.asDiagonal() * xc * si.asDiagonal();
    const auto ew = eigh(0.5 * (w + w.adjoint()));
    const Index top = ew.eigenvalues.size() - 1;
    const double lmax = ew.eigenvalues(top);
    if (lmax <= 0.0) break;
    const Vector u = sb.u * (si.asDiagonal() * ew.eigenvectors.col(top));
    Matrix sub = projector(u) / (lmax * kLn2);
    const double step = opts.step0 / std::sqrt(static_cast<double>(it + 1));
    x = detail::project_feasible_smoothing(x - step * sub, rho, eps);
    const double v = value_of(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }

  DivergenceValue out;
  out.value = best_val;
  out.certificate = best;
  out.gap = std::max(0.0, prev_val - best_val);
  return out;
}

// ---------------------------------------------------------------------------
// Pinching
// ---------------------------------------------------------------------------

class PinchingMap {
 public:
  explicit PinchingMap(const Matrix& sigma) : dim_(sigma.rows()) {
    const auto e = eigh(sigma);
    const double scale = e.eigenvalues.cwiseAbs().maxCoeff();
    const double tol = std::max(1e-12, 1e-10 * scale);
    Index i = 0;
    while (i < e.eigenvalues.size()) {
      Index j = i;
      Matrix p = Matrix::Zero(dim_, dim_);
      while (j < e.eigenvalues.size() &&
             (j == i || e.eigenvalues(j) - e.eigenvalues(j - 1) <= tol)) {
        p += projector(e.eigenvectors.col(j));
        ++j;
      }
      projectors_.push_back(std::move(p));
      eigenvalues_.push_back(e.eigenvalues(i));
      i = j;
    }
    sigma_ = sigma;
  }

  int distinct_eigenvalues() const { return static_cast<int>(projectors_.size()); }
  const std::vector<Matrix>& projectors() const { return projectors_; }
  const Matrix& conditioning_state() const { return sigma_; }

  Matrix operator()(const Matrix& x) const {
    detail::require(x.rows() == dim_ && x.cols() == dim_, "pinch: shape mismatch");
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const auto& p : projectors_) out += p * x * p;
    return out;
  }

 private:
  Index dim_;
  Matrix sigma_;
  std::vector<Matrix> projectors_;
  std::vector<double> eigenvalues_;
};

inline Matrix pinch(const PinchingMap& map, const Matrix& x) { return map(x); }

// Convenience overloads on the domain types.
inline DivergenceValue umegaki(const DensityOperator& r, const DensityOperator& s) {
  return umegaki(r.matrix(), s.matrix());
}
inline DivergenceValue dmax(const DensityOperator& r, const DensityOperator& s) {
  return dmax(r.matrix(), s.matrix());
}
inline DivergenceValue hypothesis_testing(const DensityOperator& r, const DensityOperator& s,
                                          double eps) {
  return hypothesis_testing(r.matrix(), s.matrix(), eps);
}
inline DivergenceValue measured_all(const DensityOperator& r, const DensityOperator& s) {
  return measured_all(r.matrix(), s.matrix());
}

}  // namespace qre
