// free_sets.hpp — axiomatised families of free states exposed through
// membership predicates and linear-optimisation oracles.
//
// Concrete families: coherence (diagonal states), two-qubit separable
// states, the fully-product family over n copies of a bipartite system, and
// its blocked variant. Oracles optimise over grouped product states by
// alternating leading-eigenvector updates with deterministic seeded
// restarts.

#pragma once

#include "qre/divergences.hpp"
#include "qre/frank_wolfe.hpp"

#include <cstdint>
#include <memory>
#include <sstream>
#include <string>

namespace qre {

// ---------------------------------------------------------------------------
// Grouped product-state optimisation
// ---------------------------------------------------------------------------

// A partition of the tensor factors; product states factorise across groups
// (entanglement is allowed inside a group, never between groups).
struct GroupedProduct {
  SystemShape shape;
  std::vector<std::vector<int>> groups;
  std::vector<Index> group_dim;
  std::vector<std::vector<Index>> sub_index;  // [group][global index] -> subindex

  static GroupedProduct make(const SystemShape& shape, std::vector<std::vector<int>> groups) {
    GroupedProduct gp;
    gp.shape = shape;
    gp.groups = std::move(groups);
    const auto strides = detail::strides_of(shape.dims());
    const Index total = shape.total();
    for (const auto& g : gp.groups) {
      Index dim = 1;
      for (int f : g) dim *= shape.dim(f);
      gp.group_dim.push_back(dim);
    }
    gp.sub_index.assign(gp.groups.size(), std::vector<Index>(static_cast<std::size_t>(total), 0));
    std::vector<Index> val(static_cast<std::size_t>(shape.factors()), 0);
    for (Index idx = 0; idx < total; ++idx) {
      Index rem = idx;
      for (int f = 0; f < shape.factors(); ++f) {
        val[static_cast<std::size_t>(f)] = rem / strides[static_cast<std::size_t>(f)];
        rem %= strides[static_cast<std::size_t>(f)];
      }
      for (std::size_t g = 0; g < gp.groups.size(); ++g) {
        Index sub = 0;
        for (int f : gp.groups[g]) sub = sub * shape.dim(f) + val[static_cast<std::size_t>(f)];
        gp.sub_index[g][static_cast<std::size_t>(idx)] = sub;
      }
    }
    return gp;
  }

  Vector assemble(const std::vector<Vector>& factors) const {
    const Index total = shape.total();
    Vector out(total);
    for (Index idx = 0; idx < total; ++idx) {
      Complex amp(1, 0);
      for (std::size_t g = 0; g < groups.size(); ++g)
        amp *= factors[g](sub_index[g][static_cast<std::size_t>(idx)]);
      out(idx) = amp;
    }
    return out;
  }
};

namespace detail {

inline Vector dominant_eigenvector(const Matrix& g, std::uint64_t seed) {
  const Index d = g.rows();
  double shift = 0.0;
  for (Index i = 0; i < d; ++i) shift = std::max(shift, g.row(i).cwiseAbs().sum());
  Matrix m = g + shift * Matrix::Identity(d, d);
  Rng rng(seed);
  Vector v = random_ket(d, rng);
  for (int it = 0; it < 80; ++it) {
    Vector w = m * v;
    const double n = w.norm();
    if (n <= 1e-300) return v;
    w /= n;
    if ((w - v).norm() <= 1e-13) return w;
    v = w;
  }
  return v;
}

}  // namespace detail

struct GroupedProductResult {
  Vector ket;
  double value;  // <ket| G |ket>
  std::vector<Vector> factors;
};

// Maximise <psi|G|psi> over states product across the given groups by
// alternating per-group eigenvector updates with seeded restarts. An
// optional warm start is tried as an extra initialisation.
inline GroupedProductResult best_grouped_product_state(
    const Matrix& g, const GroupedProduct& gp, int restarts, std::uint64_t seed,
    const std::vector<Vector>& warm_start = {}) {
  const Index total = gp.shape.total();
  detail::require(g.rows() == total && g.cols() == total,
                  "best_grouped_product_state: shape mismatch");
  const std::size_t ngroups = gp.groups.size();

  auto sweep_to_convergence = [&](std::vector<Vector> factors) {
    Vector full = gp.assemble(factors);
    double obj = std::real((full.adjoint() * g * full)(0, 0));
    for (int sweep = 0; sweep < 500; ++sweep) {
      for (std::size_t gi = 0; gi < ngroups; ++gi) {
        const Index k = gp.group_dim[gi];
        if (k == 1) continue;
        // W(idx, sub_g) = product of all other groups' amplitudes
        Matrix w = Matrix::Zero(total, k);
        for (Index idx = 0; idx < total; ++idx) {
          Complex amp(1, 0);
          for (std::size_t oj = 0; oj < ngroups; ++oj) {
            if (oj == gi) continue;
            amp *= factors[oj](gp.sub_index[oj][static_cast<std::size_t>(idx)]);
          }
          w(idx, gp.sub_index[gi][static_cast<std::size_t>(idx)]) = amp;
        }
        Matrix eff = w.adjoint() * (g * w);
        const auto ev = eigh(0.5 * (eff + eff.adjoint()));
        factors[gi] = ev.eigenvectors.col(ev.eigenvalues.size() - 1);
      }
      Vector cur = gp.assemble(factors);
      const double val = std::real((cur.adjoint() * g * cur)(0, 0));
      if (val <= obj + 1e-14 * std::max(1.0, std::abs(obj))) {
        obj = std::max(obj, val);
        full = cur;
        break;
      }
      obj = val;
      full = cur;
    }
    return std::tuple<Vector, double, std::vector<Vector>>{full, obj, factors};
  };

  GroupedProductResult best;
  best.value = -kInfinity;
  const int extra = warm_start.size() == ngroups ? 1 : 0;
  for (int r = 0; r < std::max(1, restarts) + extra; ++r) {
    std::vector<Vector> factors(ngroups);
    if (extra && r == 0) {
      factors = warm_start;
    } else if (r == extra) {
      // marginals of the dominant eigenvector of G
      const Vector u = detail::dominant_eigenvector(g, split_seed(seed, 7777));
      for (std::size_t gi = 0; gi < ngroups; ++gi) {
        const Index k = gp.group_dim[gi];
        Matrix u2 = Matrix::Zero(total / k, k);
        Index next_row = 0;
        std::vector<Index> rk_map(static_cast<std::size_t>(total), -1);
        for (Index idx = 0; idx < total; ++idx) {
          const Index a = gp.sub_index[gi][static_cast<std::size_t>(idx)];
          // rest key: global index with this group's contribution removed
          Index rk = 0;
          for (std::size_t oj = 0; oj < ngroups; ++oj) {
            if (oj == gi) continue;
            rk = rk * gp.group_dim[oj] + gp.sub_index[oj][static_cast<std::size_t>(idx)];
          }
          if (rk_map[static_cast<std::size_t>(rk)] < 0)
            rk_map[static_cast<std::size_t>(rk)] = next_row++;
          u2(rk_map[static_cast<std::size_t>(rk)], a) = u(idx);
        }
        Matrix red = u2.adjoint() * u2;
        const auto ev = eigh(0.5 * (red + red.adjoint()));
        factors[gi] = ev.eigenvectors.col(ev.eigenvalues.size() - 1);
      }
    } else if (r == extra + 1) {
      for (std::size_t gi = 0; gi < ngroups; ++gi)
        factors[gi] = Vector::Constant(gp.group_dim[gi],
                                       Complex(1.0 / std::sqrt(static_cast<double>(gp.group_dim[gi])), 0));
    } else {
      Rng rng(split_seed(seed, static_cast<std::uint64_t>(r)));
      for (std::size_t gi = 0; gi < ngroups; ++gi) factors[gi] = random_ket(gp.group_dim[gi], rng);
    }
    auto [ket, val, fac] = sweep_to_convergence(std::move(factors));
    if (val > best.value) {
      best.value = val;
      best.ket = ket;
      best.factors = std::move(fac);
    }
  }
  return best;
}

// Oracle over grouped product states that warm-starts every call from the
// previous optimiser (state local to the returned closure).
inline FwOracle warm_grouped_oracle(const GroupedProduct& gp, int restarts) {
  auto memory = std::make_shared<std::vector<Vector>>();
  return [gp, restarts, memory](const Matrix& dir, std::uint64_t s) {
    auto res = best_grouped_product_state(dir, gp, restarts, s, *memory);
    *memory = res.factors;
    return projector(res.ket);
  };
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

enum class MembershipVerdict { inside, outside, undecided };

struct Membership {
  MembershipVerdict verdict = MembershipVerdict::undecided;
  double distance = 0.0;             // Frobenius distance estimate when computed
  std::optional<Matrix> witness;     // violating object for `outside`
};

class FreeStateFamily {
 public:
  std::string name;
  SystemShape copy_shape;  // tensor factors of a single copy
  std::function<Matrix(const Matrix&, int, std::uint64_t)> oracle_fn;
  std::function<Membership(const Matrix&, int, double)> membership_fn;
  // Always reports an explicit distance to the set (no shortcut criteria);
  // falls back to membership_fn when a family does not provide it.
  std::function<Membership(const Matrix&, int, double)> distance_fn;
  std::function<Matrix(int)> canonical_fn;

  Index level_dim(int n) const {
    Index d = 1;
    for (int i = 0; i < n; ++i) d *= copy_shape.total();
    return d;
  }

  // Free state maximising Re Tr(G sigma) over the level-n set.
  Matrix linear_oracle(const Matrix& g, int n, std::uint64_t seed) const {
    detail::require(n >= 1, "linear_oracle: level must be >= 1");
    detail::require(g.rows() == level_dim(n) && g.cols() == level_dim(n),
                    "linear_oracle: objective shape does not match the level");
    return oracle_fn(g, n, seed);
  }

  Membership membership(const Matrix& sigma, int n, double tol = 1e-6) const {
    detail::require(sigma.rows() == level_dim(n) && sigma.cols() == level_dim(n),
                    "membership: state shape does not match the level");
    return membership_fn(sigma, n, tol);
  }

  Membership distance(const Matrix& sigma, int n, double tol = 1e-6) const {
    detail::require(sigma.rows() == level_dim(n) && sigma.cols() == level_dim(n),
                    "distance: state shape does not match the level");
    return distance_fn ? distance_fn(sigma, n, tol) : membership_fn(sigma, n, tol);
  }

  // The i.i.d. full-rank free state tau^{x n}.
  Matrix canonical_full_rank(int n) const { return canonical_fn(n); }
};

namespace detail {

// A:B cut at level n: even global factors belong to Alice, odd to Bob.
inline std::vector<int> odd_factors(int total_factors) {
  std::vector<int> out;
  for (int f = 1; f < total_factors; f += 2) out.push_back(f);
  return out;
}

inline double ppt_min_eigenvalue(const Matrix& sigma, const SystemShape& shape,
                                 Matrix* witness = nullptr) {
  const Matrix pt = partial_transpose(sigma, shape, odd_factors(shape.factors()));
  const auto e = eigh(pt);
  if (witness) {
    const Matrix v = projector(e.eigenvectors.col(0));
    *witness = partial_transpose(v, shape, odd_factors(shape.factors()));
  }
  return e.eigenvalues.minCoeff();
}

// Membership by Frank-Wolfe distance minimisation against the family oracle.
// The atom set is seeded with the computational product basis (an exact
// decomposition of the maximally mixed member), so the corrective step can
// resolve the diagonal part immediately.
inline Membership membership_by_distance(const Matrix& sigma, const FwOracle& oracle,
                                         double tol, int max_iters) {
  FwOptions opts;
  opts.max_iters = max_iters;
  opts.gap_tol = 0.05 * tol * tol;
  opts.corrective_period = 5;
  opts.stop_below_value = 0.45 * tol * tol;  // distance <= 0.95 tol
  opts.seed = 1234;
  const Index d = sigma.rows();
  std::vector<Matrix> atoms;
  std::vector<double> weights;
  for (Index i = 0; i < d; ++i) {
    atoms.push_back(basis_projector(d, i));
    weights.push_back(1.0 / static_cast<double>(d));
  }
  auto fw = FrankWolfe::distance_to(sigma, oracle, opts);
  auto res = fw.run_with_atoms(atoms, weights);
  Membership m;
  m.distance = std::sqrt(2.0 * res.value);
  // A heuristic oracle can only under-estimate the gap, so a positive
  // residual never certifies exclusion; only a witness settles `outside`.
  m.verdict = m.distance <= tol ? MembershipVerdict::inside : MembershipVerdict::undecided;
  return m;
}

inline GroupedProduct bipartite_groups(const SystemShape& shape) {
  std::vector<int> alice, bob;
  for (int f = 0; f < shape.factors(); ++f) (f % 2 == 0 ? alice : bob).push_back(f);
  return GroupedProduct::make(shape, {alice, bob});
}

inline GroupedProduct fully_product_groups(const SystemShape& shape) {
  std::vector<std::vector<int>> groups;
  for (int f = 0; f < shape.factors(); ++f) groups.push_back({f});
  return GroupedProduct::make(shape, groups);
}

// Blocked grouping: copies of 2k factors; inside copy j, the A factors form
// one group and the B factors another.
inline GroupedProduct blocked_groups(const SystemShape& shape, int k) {
  std::vector<std::vector<int>> groups;
  const int per_copy = 2 * k;
  const int copies = shape.factors() / per_copy;
  for (int j = 0; j < copies; ++j) {
    std::vector<int> a, b;
    for (int i = 0; i < k; ++i) {
      a.push_back(j * per_copy + 2 * i);
      b.push_back(j * per_copy + 2 * i + 1);
    }
    groups.push_back(a);
    groups.push_back(b);
  }
  return GroupedProduct::make(shape, groups);
}

}  // namespace detail

struct FamilyOptions {
  int oracle_restarts = 32;       // restarts of the public linear oracle
  int membership_restarts = 4;    // restarts used inside membership checks
  int membership_iters = 5000;    // Frank-Wolfe budget for membership
};

// Free states diagonal in the computational basis.
inline FreeStateFamily coherence_family(Index dim) {
  detail::require(dim >= 2, "coherence_family: dimension must be >= 2");
  FreeStateFamily fam;
  fam.name = "coherence:" + std::to_string(dim);
  fam.copy_shape = SystemShape({dim});
  fam.oracle_fn = [](const Matrix& g, int, std::uint64_t) {
    Index best = 0;
    for (Index i = 1; i < g.rows(); ++i)
      if (g(i, i).real() > g(best, best).real()) best = i;
    return basis_projector(g.rows(), best);
  };
  fam.membership_fn = [](const Matrix& sigma, int, double tol) {
    Membership m;
    Matrix off = sigma;
    off.diagonal().setZero();
    const double worst = off.cwiseAbs().maxCoeff();
    m.distance = worst;
    if (worst <= tol) {
      m.verdict = MembershipVerdict::inside;
    } else {
      m.verdict = MembershipVerdict::outside;
      m.witness = off;
    }
    return m;
  };
  fam.distance_fn = [](const Matrix& sigma, int, double tol) {
    Matrix off = sigma;
    off.diagonal().setZero();
    RealVector diag(sigma.rows());
    for (Index i = 0; i < sigma.rows(); ++i) diag(i) = sigma(i, i).real();
    const RealVector q = project_to_simplex(diag);
    Membership m;
    m.distance = std::sqrt(off.squaredNorm() + (q - diag).squaredNorm());
    m.verdict = m.distance <= tol ? MembershipVerdict::inside : MembershipVerdict::undecided;
    return m;
  };
  const Index d = dim;
  fam.canonical_fn = [d](int n) {
    Index total = 1;
    for (int i = 0; i < n; ++i) total *= d;
    return maximally_mixed(total);
  };
  return fam;
}

// Separable states of a 2x2 system; at level n the cut is A^n : B^n.
inline FreeStateFamily separable_two_qubit_family(const FamilyOptions& opts = {}) {
  FreeStateFamily fam;
  fam.name = "sep2x2";
  fam.copy_shape = SystemShape({2, 2});

  auto oracle = [opts](const Matrix& g, int n, std::uint64_t seed, int restarts) {
    const auto gp = detail::bipartite_groups(SystemShape({2, 2}).repeated(n));
    auto res = best_grouped_product_state(g, gp, restarts > 0 ? restarts : opts.oracle_restarts,
                                          seed);
    return projector(res.ket);
  };
  fam.oracle_fn = [oracle, opts](const Matrix& g, int n, std::uint64_t seed) {
    return oracle(g, n, seed, opts.oracle_restarts);
  };
  fam.membership_fn = [opts](const Matrix& sigma, int n, double tol) {
    const SystemShape shape = SystemShape({2, 2}).repeated(n);
    Matrix witness;
    const double pt_min = detail::ppt_min_eigenvalue(sigma, shape, &witness);
    if (pt_min < -std::max(tol, Tolerances::psd)) {
      Membership m;
      m.verdict = MembershipVerdict::outside;
      m.distance = -pt_min;
      m.witness = witness;
      return m;
    }
    if (n == 1) {
      // the positive partial transpose criterion is exact in 2x2
      Membership m;
      m.verdict = MembershipVerdict::inside;
      m.distance = 0.0;
      return m;
    }
    const auto gp = detail::bipartite_groups(shape);
    return detail::membership_by_distance(sigma, warm_grouped_oracle(gp, opts.membership_restarts),
                                          tol, opts.membership_iters);
  };
  fam.distance_fn = [opts](const Matrix& sigma, int n, double tol) {
    const auto gp = detail::bipartite_groups(SystemShape({2, 2}).repeated(n));
    return detail::membership_by_distance(sigma, warm_grouped_oracle(gp, opts.membership_restarts),
                                          tol, opts.membership_iters);
  };
  fam.canonical_fn = [](int n) {
    Index total = 1;
    for (int i = 0; i < n; ++i) total *= 4;
    return maximally_mixed(total);
  };
  return fam;
}

// Fully product family: level-n free states are mixtures of pure states
// product across all 2n local parties.
inline FreeStateFamily pseudo_entanglement_family(Index dim_a, Index dim_b,
                                                  const FamilyOptions& opts = {}) {
  detail::require(dim_a >= 2 && dim_b >= 2, "pseudo_entanglement_family: local dims must be >= 2");
  FreeStateFamily fam;
  fam.name = "product:" + std::to_string(dim_a) + "," + std::to_string(dim_b);
  fam.copy_shape = SystemShape({dim_a, dim_b});

  auto oracle = [dim_a, dim_b](const Matrix& g, int n, std::uint64_t seed, int restarts) {
    const auto gp = detail::fully_product_groups(SystemShape({dim_a, dim_b}).repeated(n));
    return projector(best_grouped_product_state(g, gp, restarts, seed).ket);
  };
  fam.oracle_fn = [oracle, opts](const Matrix& g, int n, std::uint64_t seed) {
    return oracle(g, n, seed, opts.oracle_restarts);
  };
  fam.membership_fn = [opts, dim_a, dim_b](const Matrix& sigma, int n, double tol) {
    const SystemShape shape = SystemShape({dim_a, dim_b}).repeated(n);
    Matrix witness;
    const double pt_min = detail::ppt_min_eigenvalue(sigma, shape, &witness);
    if (pt_min < -std::max(tol, Tolerances::psd)) {
      Membership m;  // the family sits inside the separable cone
      m.verdict = MembershipVerdict::outside;
      m.distance = -pt_min;
      m.witness = witness;
      return m;
    }
    if (n == 1 && dim_a == 2 && dim_b == 2) {
      // at one copy the set is exactly the two-qubit separable states,
      // where the positive partial transpose test is conclusive
      Membership m;
      m.verdict = MembershipVerdict::inside;
      m.distance = 0.0;
      return m;
    }
    const auto gp = detail::fully_product_groups(shape);
    return detail::membership_by_distance(sigma, warm_grouped_oracle(gp, opts.membership_restarts),
                                          tol, opts.membership_iters);
  };
  fam.distance_fn = [opts, dim_a, dim_b](const Matrix& sigma, int n, double tol) {
    const auto gp = detail::fully_product_groups(SystemShape({dim_a, dim_b}).repeated(n));
    return detail::membership_by_distance(sigma, warm_grouped_oracle(gp, opts.membership_restarts),
                                          tol, opts.membership_iters);
  };
  const Index copy_total = dim_a * dim_b;
  fam.canonical_fn = [copy_total](int n) {
    Index total = 1;
    for (int i = 0; i < n; ++i) total *= copy_total;
    return maximally_mixed(total);
  };
  return fam;
}

// Blocked variant: one copy consists of k elementary pairs; free states are
// product across blocks of k Alices and k Bobs. k = 1 reproduces the fully
// product family.
inline FreeStateFamily block_family(Index dim_a, Index dim_b, int k,
                                    const FamilyOptions& opts = {}) {
  detail::require(k >= 1, "block_family: k must be >= 1");
  FreeStateFamily fam;
  fam.name = "product-block:" + std::to_string(dim_a) + "," + std::to_string(dim_b) + "," +
             std::to_string(k);
  std::vector<Index> copy_dims;
  for (int i = 0; i < k; ++i) {
    copy_dims.push_back(dim_a);
    copy_dims.push_back(dim_b);
  }
  fam.copy_shape = SystemShape(copy_dims);

  auto oracle = [dim_a, dim_b, k](const Matrix& g, int n, std::uint64_t seed, int restarts) {
    std::vector<Index> dims;
    for (int c = 0; c < n * k; ++c) {
      dims.push_back(dim_a);
      dims.push_back(dim_b);
    }
    const auto gp = detail::blocked_groups(SystemShape(dims), k);
    return projector(best_grouped_product_state(g, gp, restarts, seed).ket);
  };
  fam.oracle_fn = [oracle, opts](const Matrix& g, int n, std::uint64_t seed) {
    return oracle(g, n, seed, opts.oracle_restarts);
  };
  fam.membership_fn = [opts, dim_a, dim_b, k](const Matrix& sigma, int n, double tol) {
    std::vector<Index> dims;
    for (int c = 0; c < n * k; ++c) {
      dims.push_back(dim_a);
      dims.push_back(dim_b);
    }
    const SystemShape shape(dims);
    Matrix witness;
    const double pt_min = detail::ppt_min_eigenvalue(sigma, shape, &witness);
    if (pt_min < -std::max(tol, Tolerances::psd)) {
      Membership m;
      m.verdict = MembershipVerdict::outside;
      m.distance = -pt_min;
      m.witness = witness;
      return m;
    }
    const auto gp = detail::blocked_groups(shape, k);
    return detail::membership_by_distance(sigma, warm_grouped_oracle(gp, opts.membership_restarts),
                                          tol, opts.membership_iters);
  };
  fam.distance_fn = [opts, dim_a, dim_b, k](const Matrix& sigma, int n, double tol) {
    std::vector<Index> dims;
    for (int c = 0; c < n * k; ++c) {
      dims.push_back(dim_a);
      dims.push_back(dim_b);
    }
    const auto gp = detail::blocked_groups(SystemShape(dims), k);
    return detail::membership_by_distance(sigma, warm_grouped_oracle(gp, opts.membership_restarts),
                                          tol, opts.membership_iters);
  };
  const Index copy_total = fam.copy_shape.total();
  fam.canonical_fn = [copy_total](int n) {
    Index total = 1;
    for (int i = 0; i < n; ++i) total *= copy_total;
    return maximally_mixed(total);
  };
  return fam;
}

// Degenerate i.i.d. family {sigma^{x n}} (useful as a composite-testing
// baseline; requires a full-rank sigma to satisfy the axioms).
inline FreeStateFamily singleton_family(const Matrix& sigma) {
  const auto e = eigh(sigma);
  detail::require(e.eigenvalues.minCoeff() > 0.0, "singleton_family: state must be full rank");
  FreeStateFamily fam;
  fam.name = "singleton";
  fam.copy_shape = SystemShape({sigma.rows()});
  const Matrix s = sigma;
  fam.oracle_fn = [s](const Matrix&, int n, std::uint64_t) { return tensor_pow(s, n); };
  fam.membership_fn = [s](const Matrix& x, int n, double tol) {
    Membership m;
    const double dev = (x - tensor_pow(s, n)).cwiseAbs().maxCoeff();
    m.distance = dev;
    m.verdict = dev <= tol ? MembershipVerdict::inside : MembershipVerdict::outside;
    return m;
  };
  fam.canonical_fn = [s](int n) { return tensor_pow(s, n); };
  return fam;
}

// Negative control: diagonal states with the full-rank element removed from
// the advertised canonical state. Fails the full-rank axiom by construction.
inline FreeStateFamily negative_control_family(Index dim) {
  FreeStateFamily fam = coherence_family(dim);
  fam.name = "negative-control:" + std::to_string(dim);
  const Index d = dim;
  fam.canonical_fn = [d](int n) {
    Index total = 1;
    for (int i = 0; i < n; ++i) total *= d;
    return basis_projector(total, 0);
  };
  return fam;
}

// CLI family selector: "coherence:d", "sep2x2", "product:dA,dB",
// "product-block:dA,dB,k".
inline FreeStateFamily family_from_name(const std::string& spec) {
  auto parse_ints = [](const std::string& s) {
    std::vector<Index> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.push_back(static_cast<Index>(std::stoll(tok)));
      } catch (const std::exception&) {
        throw ValidationError("family_from_name: bad integer '" + tok + "'");
      }
    }
    return out;
  };
  if (spec == "sep2x2") return separable_two_qubit_family();
  const auto colon = spec.find(':');
  detail::require(colon != std::string::npos, "family_from_name: unknown family '" + spec + "'");
  const std::string head = spec.substr(0, colon);
  const auto args = parse_ints(spec.substr(colon + 1));
  if (head == "coherence") {
    detail::require(args.size() == 1, "family_from_name: coherence takes one dimension");
    return coherence_family(args[0]);
  }
  if (head == "product") {
    detail::require(args.size() == 2, "family_from_name: product takes two dimensions");
    return pseudo_entanglement_family(args[0], args[1]);
  }
  if (head == "product-block") {
    detail::require(args.size() == 3, "family_from_name: product-block takes dA,dB,k");
    return block_family(args[0], args[1], static_cast<int>(args[2]));
  }
  throw ValidationError("family_from_name: unknown family '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Axiom and compatibility checking
// ---------------------------------------------------------------------------

// A random mixture of oracle outputs (optionally blended with the canonical
// full-rank state); a member by construction.
inline Matrix sample_free_state(const FreeStateFamily& fam, int n, Rng& rng) {
  const Index d = fam.level_dim(n);
  std::uniform_int_distribution<int> katoms(1, 4);
  const int k = katoms(rng);
  Matrix acc = Matrix::Zero(d, d);
  RealVector w = random_simplex_point(k + 1, rng);
  for (int i = 0; i < k; ++i) {
    const Matrix g = random_hermitian(d, rng);
    acc += w(i) * fam.linear_oracle(g, n, rng());
  }
  acc += w(k) * fam.canonical_full_rank(n);
  return acc;
}

struct AxiomResult {
  int axiom = 0;
  std::string statement;
  bool pass = false;
  bool tested = false;
  int checks = 0;
  int failures = 0;
  std::optional<Matrix> witness;
};

struct AxiomReport {
  std::vector<AxiomResult> results;
  bool all_pass = false;
  int n_max = 0;
  int samples = 0;
};

inline AxiomReport axiom_check(const FreeStateFamily& fam, int n_max, int samples,
                               std::uint64_t seed, double tol = 1e-6) {
  detail::require(n_max >= 2, "axiom_check: n_max must be >= 2");
  detail::require(samples >= 5, "axiom_check: need at least five samples");
  Rng rng(seed);
  AxiomReport rep;
  rep.n_max = n_max;
  rep.samples = samples;
  const int per_axiom = samples / 5;

  auto member_ok = [&](const Matrix& x, int n) {
    return fam.membership(x, n, tol).verdict == MembershipVerdict::inside;
  };

  {  // Axiom 1: convexity (mixtures of members stay members)
    AxiomResult r{1, "convex and closed", true, true, 0, 0, std::nullopt};
    for (int t = 0; t < per_axiom; ++t) {
      std::uniform_int_distribution<int> nn(1, n_max);
      const int n = nn(rng);
      const Matrix a = sample_free_state(fam, n, rng);
      const Matrix b = sample_free_state(fam, n, rng);
      std::uniform_real_distribution<double> uu(0.0, 1.0);
      const double lam = uu(rng);
      const Matrix mix = lam * a + (1.0 - lam) * b;
      ++r.checks;
      if (!member_ok(mix, n)) {
        ++r.failures;
        r.pass = false;
        if (!r.witness) r.witness = mix;
      }
    }
    rep.results.push_back(std::move(r));
  }

  {  // Axiom 2: contains an i.i.d. full-rank state
    AxiomResult r{2, "contains an i.i.d. full-rank state", true, true, 0, 0, std::nullopt};
    const Matrix tau1 = fam.canonical_full_rank(1);
    for (int n = 1; n <= n_max; ++n) {
      const Matrix tau = fam.canonical_full_rank(n);
      ++r.checks;
      const bool full_rank = eigh(tau).eigenvalues.minCoeff() > 0.0;
      const bool iid = (tau - tensor_pow(tau1, n)).cwiseAbs().maxCoeff() <= 1e-12;
      const bool member = fam.membership(tau, n, tol).verdict != MembershipVerdict::outside;
      if (!full_rank || !iid || !member) {
        ++r.failures;
        r.pass = false;
        if (!r.witness) r.witness = tau;
      }
    }
    rep.results.push_back(std::move(r));
  }

  {  // Axiom 3: closed under partial trace of the last copy
    AxiomResult r{3, "closed under partial traces", true, true, 0, 0, std::nullopt};
    for (int t = 0; t < per_axiom; ++t) {
      std::uniform_int_distribution<int> nn(2, n_max);
      const int n = nn(rng);
      const Matrix x = sample_free_state(fam, n, rng);
      const SystemShape shape = fam.copy_shape.repeated(n);
      std::vector<int> keep;
      for (int f = 0; f < fam.copy_shape.factors() * (n - 1); ++f) keep.push_back(f);
      const Matrix red = partial_trace(x, shape, keep);
      ++r.checks;
      if (!member_ok(red, n - 1)) {
        ++r.failures;
        r.pass = false;
        if (!r.witness) r.witness = red;
      }
    }
    rep.results.push_back(std::move(r));
  }

  {  // Axiom 4: closed under tensor products
    AxiomResult r{4, "closed under tensor products", true, true, 0, 0, std::nullopt};
    for (int t = 0; t < per_axiom; ++t) {
      std::uniform_int_distribution<int> nn(1, n_max - 1);
      const int n = nn(rng);
      std::uniform_int_distribution<int> mm(1, n_max - n);
      const int m = mm(rng);
      const Matrix a = sample_free_state(fam, n, rng);
      const Matrix b = sample_free_state(fam, m, rng);
      ++r.checks;
      if (!member_ok(tensor(a, b), n + m)) {
        ++r.failures;
        r.pass = false;
        if (!r.witness) r.witness = tensor(a, b);
      }
    }
    rep.results.push_back(std::move(r));
  }

  {  // Axiom 5: closed under permutations of the copies
    AxiomResult r{5, "closed under permutations", true, true, 0, 0, std::nullopt};
    for (int t = 0; t < per_axiom; ++t) {
      std::uniform_int_distribution<int> nn(2, n_max);
      const int n = nn(rng);
      const Matrix x = sample_free_state(fam, n, rng);
      const auto perm = random_permutation(n, rng);
      const Matrix p = copy_permutation_operator(perm, fam.copy_shape);
      const Matrix px = p * x * p.adjoint();
      ++r.checks;
      if (!member_ok(px, n)) {
        ++r.failures;
        r.pass = false;
        if (!r.witness) r.witness = px;
      }
    }
    rep.results.push_back(std::move(r));
  }

  rep.all_pass = true;
  for (const auto& r : rep.results) rep.all_pass = rep.all_pass && r.pass;
  return rep;
}

struct CompatibilityReport {
  int samples = 0;
  int failures = 0;
  int vacuous = 0;       // conditional weight too small to normalise
  double max_distance = 0.0;
  bool pass = false;
};

// Conditioning a level-(n+k) member on a positive effect over the last k
// copies must land (after normalisation) back in the level-n set.
inline CompatibilityReport compatibility_check(const FreeStateFamily& fam, int n, int k,
                                               int samples, std::uint64_t seed,
                                               double tol = 1e-6) {
  detail::require(n >= 1 && k >= 1, "compatibility_check: n, k must be >= 1");
  Rng rng(seed);
  CompatibilityReport rep;
  rep.samples = samples;
  const SystemShape full_shape = fam.copy_shape.repeated(n + k);
  const Index dn = fam.level_dim(n);
  const Index dk = fam.level_dim(k);

  std::vector<int> keep;
  for (int f = 0; f < fam.copy_shape.factors() * n; ++f) keep.push_back(f);

  for (int t = 0; t < samples; ++t) {
    const Matrix rho = sample_free_state(fam, n + k, rng);
    Matrix e = random_density(dk, rng);  // positive effect, scaled below identity
    e /= eigh(e).eigenvalues.maxCoeff();
    // Tr_k[(1 x E) rho] = Tr_k[(1 x sqrt(E)) rho (1 x sqrt(E))], manifestly PSD
    const Matrix lifted = tensor(Matrix::Identity(dn, dn), matrix_sqrt(e));
    const Matrix cond = partial_trace(lifted * rho * lifted, full_shape, keep);
    const double lam = cond.trace().real();
    if (lam <= 1e-10) {
      ++rep.vacuous;
      continue;
    }
    const Matrix normalised = 0.5 * (cond + cond.adjoint()) / lam;
    const auto m = fam.distance(normalised, n, tol);
    rep.max_distance = std::max(rep.max_distance, m.distance);
    if (m.verdict != MembershipVerdict::inside) ++rep.failures;
  }
  rep.pass = rep.failures == 0;
  return rep;
}

}  // namespace qre
