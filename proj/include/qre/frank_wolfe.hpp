// frank_wolfe.hpp — conditional-gradient minimisation over a convex set of
// Hermitian operators reached through a linear-optimisation oracle.
//
// Supports away steps over the collected atom decomposition, several line
// searches, and (for quadratic objectives) periodic fully-corrective
// reoptimisation of the atom weights. The reported gap is the standard
// Frank-Wolfe certificate max_s <grad, x - s>, an upper bound on f(x) - f*.

#pragma once

#include "qre/linalg.hpp"
#include "qre/prob.hpp"
#include "qre/random.hpp"

#include <deque>
#include <functional>
#include <optional>

namespace qre {

enum class LineSearch { derivative_bisection, golden_section, quadratic_exact, fixed_schedule };

struct FwObjective {
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> gradient;
};

// The oracle maximises Re Tr(direction * s) over the feasible set.
using FwOracle = std::function<Matrix(const Matrix& direction, std::uint64_t seed)>;

struct FwOptions {
  int max_iters = 10000;
  double gap_tol = 1e-6;
  bool away_steps = true;
  LineSearch line_search = LineSearch::derivative_bisection;
  int line_search_evals = 40;
  int corrective_period = 0;  // > 0 enables weight reoptimisation (quadratic only)
  std::optional<double> stop_below_value;  // early exit once f(x) drops this low
  std::uint64_t seed = 1;
  std::size_t max_atoms = 512;
};

struct FwResult {
  Matrix x;
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<Matrix> atoms;
  std::vector<double> weights;
};

namespace detail {

// Re Tr(a b) without forming the product.
inline double hs_inner(const Matrix& a, const Matrix& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

// min over the simplex of 0.5 w^T G w - b^T w by accelerated projected gradient.
inline RealVector simplex_quadratic(const Eigen::MatrixXd& gram, const RealVector& b,
                                    RealVector w, int iters) {
  const Index k = w.size();
  if (k == 1) return RealVector::Ones(1);
  double lip = 0.0;
  for (Index i = 0; i < k; ++i) lip = std::max(lip, gram.row(i).cwiseAbs().sum());
  lip = std::max(lip, 1e-12);
  RealVector y = w, w_prev = w;
  double t_prev = 1.0;
  for (int it = 0; it < iters; ++it) {
    RealVector grad = gram * y - b;
    RealVector w_new = project_to_simplex(y - grad / lip);
    const double move = (w_new - w_prev).cwiseAbs().maxCoeff();
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    y = w_new + ((t_prev - 1.0) / t_new) * (w_new - w_prev);
    w_prev = w_new;
    t_prev = t_new;
    if (move <= 1e-15) break;
  }
  return w_prev;
}

}  // namespace detail

class FrankWolfe {
 public:
  FrankWolfe(FwObjective obj, FwOracle oracle, FwOptions opts)
      : obj_(std::move(obj)), oracle_(std::move(oracle)), opts_(std::move(opts)) {}

  // Quadratic objective 0.5 || x - target ||_F^2 with exact line search and
  // fully-corrective steps available.
  static FrankWolfe distance_to(const Matrix& target, FwOracle oracle, FwOptions opts) {
    opts.line_search = LineSearch::quadratic_exact;
    if (opts.corrective_period == 0) opts.corrective_period = 8;
    FwObjective obj;
    obj.value = [target](const Matrix& x) {
      return 0.5 * (x - target).squaredNorm();
    };
    obj.gradient = [target](const Matrix& x) { return Matrix(x - target); };
    FrankWolfe fw(std::move(obj), std::move(oracle), std::move(opts));
    fw.quadratic_target_ = target;
    return fw;
  }

  FwResult run(const Matrix& x0) { return run_with_atoms({x0}, {1.0}); }

  FwResult run_with_atoms(const std::vector<Matrix>& atoms0, const std::vector<double>& weights0) {
    atoms_.clear();
    weights_.clear();
    gram_.resize(0, 0);
    bvec_.resize(0);
    for (std::size_t i = 0; i < atoms0.size(); ++i) push_atom(atoms0[i], weights0[i]);
    Matrix x = combine();
    double fx = obj_.value(x);
    double gap = kInfinity;
    int it = 0;
    bool converged = false;

    for (; it < opts_.max_iters; ++it) {
      if (opts_.stop_below_value && fx <= *opts_.stop_below_value) {
        converged = true;
        break;
      }
      const Matrix grad = obj_.gradient(x);
      const Matrix s = oracle_(-grad, split_seed(opts_.seed, static_cast<std::uint64_t>(it)));
      const double gx = detail::hs_inner(grad, x);
      gap = gx - detail::hs_inner(grad, s);
      if (gap <= opts_.gap_tol) {
        converged = true;
        break;
      }

      // pick between the forward and the away direction
      bool away = false;
      std::size_t away_idx = 0;
      if (opts_.away_steps && atoms_.size() > 1) {
        double best = -kInfinity;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
          const double v = detail::hs_inner(grad, atoms_[i]);
          if (v > best) {
            best = v;
            away_idx = i;
          }
        }
        if (best - gx > gap && weights_[away_idx] < 1.0 - 1e-14) away = true;
      }

      Matrix d;
      double gamma_max;
      if (away) {
        d = x - atoms_[away_idx];
        gamma_max = weights_[away_idx] / (1.0 - weights_[away_idx]);
      } else {
        d = s - x;
        gamma_max = 1.0;
      }
      const double dd = detail::hs_inner(d, d);
      if (dd <= 1e-30) {
        converged = true;
        break;
      }

      const double gamma = line_search(x, d, gamma_max, fx, it);
      if (gamma <= 0.0) {
        if (away) continue;  // blocked away step; try a plain step next round
        converged = true;
        break;
      }

      // update the decomposition
      if (away) {
        for (auto& w : weights_) w *= (1.0 + gamma);
        weights_[away_idx] -= gamma;
      } else {
        for (auto& w : weights_) w *= (1.0 - gamma);
        const std::size_t idx = push_atom(s, 0.0);
        weights_[idx] += gamma;
      }
      prune_atoms();

      x = combine();
      fx = obj_.value(x);

      // reoptimising the weights costs O(atoms^2) per inner step; throttle as
      // the atom set grows
      const int period =
          opts_.corrective_period * (1 + static_cast<int>(atoms_.size()) / 100);
      if (quadratic_target_ && opts_.corrective_period > 0 && (it + 1) % period == 0) {
        corrective_step();
        x = combine();
        fx = obj_.value(x);
      }
    }

    FwResult res;
    res.x = combine();
    res.value = obj_.value(res.x);
    res.gap = gap;
    res.iterations = it;
    res.converged = converged;
    res.atoms = atoms_;
    res.weights = weights_;
    return res;
  }

 private:
  std::size_t push_atom(const Matrix& a, double w) {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if ((atoms_[i] - a).cwiseAbs().maxCoeff() <= 1e-12) {
        weights_[i] += w;
        return i;
      }
    }
    atoms_.push_back(a);
    weights_.push_back(w);
    if (quadratic_target_) {
      const Index k = static_cast<Index>(atoms_.size());
      Eigen::MatrixXd g2(k, k);
      g2.topLeftCorner(k - 1, k - 1) = gram_;
      for (Index i = 0; i < k; ++i) {
        const double v = detail::hs_inner(atoms_[static_cast<std::size_t>(i)], a);
        g2(i, k - 1) = v;
        g2(k - 1, i) = v;
      }
      gram_ = std::move(g2);
      bvec_.conservativeResize(k);
      bvec_(k - 1) = detail::hs_inner(a, *quadratic_target_);
    }
    return atoms_.size() - 1;
  }

  void prune_atoms() {
    for (std::size_t i = atoms_.size(); i-- > 0;) {
      const bool too_many = atoms_.size() > opts_.max_atoms && weights_[i] <= 1e-8;
      if (weights_[i] <= 1e-15 || too_many) {
        atoms_.erase(atoms_.begin() + static_cast<std::ptrdiff_t>(i));
        weights_.erase(weights_.begin() + static_cast<std::ptrdiff_t>(i));
        if (quadratic_target_) {
          const Index k = static_cast<Index>(atoms_.size()) + 1;
          Eigen::MatrixXd g2(k - 1, k - 1);
          Index r2 = 0;
          for (Index r = 0; r < k; ++r) {
            if (r == static_cast<Index>(i)) continue;
            Index c2 = 0;
            for (Index c = 0; c < k; ++c) {
              if (c == static_cast<Index>(i)) continue;
              g2(r2, c2++) = gram_(r, c);
            }
            ++r2;
          }
          gram_ = std::move(g2);
          RealVector b2(k - 1);
          Index j2 = 0;
          for (Index j = 0; j < k; ++j)
            if (j != static_cast<Index>(i)) b2(j2++) = bvec_(j);
          bvec_ = std::move(b2);
        }
      }
    }
    double total = 0.0;
    for (double w : weights_) total += w;
    if (total > 0) {
      for (auto& w : weights_) w /= total;
    }
  }

  Matrix combine() const {
    Matrix x = Matrix::Zero(atoms_.front().rows(), atoms_.front().cols());
    for (std::size_t i = 0; i < atoms_.size(); ++i) x += weights_[i] * atoms_[i];
    return x;
  }

  void corrective_step() {
    RealVector w(static_cast<Index>(weights_.size()));
    for (Index i = 0; i < w.size(); ++i) w(i) = weights_[static_cast<std::size_t>(i)];
    const int iters = std::min(2500, 300 + 8 * static_cast<int>(w.size()));
    w = detail::simplex_quadratic(gram_, bvec_, w, iters);
    for (Index i = 0; i < w.size(); ++i) weights_[static_cast<std::size_t>(i)] = w(i);
    prune_atoms();
  }

  double line_search(const Matrix& x, const Matrix& d, double gamma_max, double fx, int iter) {
    switch (opts_.line_search) {
      case LineSearch::quadratic_exact: {
        const double num = detail::hs_inner(*quadratic_target_ - x, d);
        const double den = detail::hs_inner(d, d);
        return std::clamp(num / den, 0.0, gamma_max);
      }
      case LineSearch::fixed_schedule:
        return std::min(gamma_max, 2.0 / (iter + 2.0));
      case LineSearch::derivative_bisection: {
        auto dphi = [&](double g) {
          return detail::hs_inner(obj_.gradient(x + g * d), d);
        };
        if (dphi(0.0) >= 0.0) return 0.0;
        if (dphi(gamma_max) <= 0.0) return gamma_max;
        double lo = 0.0, hi = gamma_max;
        for (int i = 0; i < opts_.line_search_evals; ++i) {
          const double mid = 0.5 * (lo + hi);
          if (dphi(mid) <= 0.0)
            lo = mid;
          else
            hi = mid;
        }
        return 0.5 * (lo + hi);
      }
      case LineSearch::golden_section: {
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = 0.0, b = gamma_max;
        double c = b - invphi * (b - a), dpt = a + invphi * (b - a);
        double fc = obj_.value(x + c * d), fd = obj_.value(x + dpt * d);
        for (int i = 0; i < opts_.line_search_evals; ++i) {
          if (fc < fd) {
            b = dpt;
            dpt = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = obj_.value(x + c * d);
          } else {
            a = c;
            c = dpt;
            fc = fd;
            dpt = a + invphi * (b - a);
            fd = obj_.value(x + dpt * d);
          }
        }
        const double g = 0.5 * (a + b);
        return obj_.value(x + g * d) < fx ? g : 0.0;
      }
    }
    return 0.0;
  }

  FwObjective obj_;
  FwOracle oracle_;
  FwOptions opts_;
  std::optional<Matrix> quadratic_target_;
  std::vector<Matrix> atoms_;
  std::vector<double> weights_;
  Eigen::MatrixXd gram_;
  RealVector bvec_;
};

inline FwResult frank_wolfe_minimize(const FwObjective& obj, const FwOracle& oracle,
                                     const Matrix& x0, const FwOptions& opts) {
  FrankWolfe fw(obj, oracle, opts);
  return fw.run(x0);
}

inline FwResult frank_wolfe_distance(const Matrix& target, const FwOracle& oracle,
                                     const Matrix& x0, FwOptions opts) {
  auto fw = FrankWolfe::distance_to(target, oracle, std::move(opts));
  return fw.run(x0);
}

}  // namespace qre
