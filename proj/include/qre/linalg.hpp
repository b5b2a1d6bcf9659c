// linalg.hpp — dense complex linear algebra on small Hilbert spaces.
//
// Hermitian eigendecomposition (cyclic Jacobi, deterministic), tensor
// products, partial traces and transposes, permutation operators, trace
// norm, and matrix functions restricted to the support. Sized for dense
// matrices up to dim ~256.

#pragma once

#include "qre/core.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace qre {

struct EighResult {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // unitary, columns; A = V diag(w) V^dag
};

inline bool is_hermitian(const Matrix& a, double tol = Tolerances::hermiticity) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

// Cyclic Jacobi eigensolver for Hermitian matrices. Rotations are applied in
// a fixed sweep order, so the result is deterministic for a given input.
inline EighResult eigh(const Matrix& input, double herm_tol = Tolerances::hermiticity) {
  detail::require(input.rows() == input.cols(), "eigh: matrix must be square");
  detail::require(is_hermitian(input, herm_tol), "eigh: matrix is not Hermitian within tolerance");
  const Index n = input.rows();
  Matrix a = 0.5 * (input + input.adjoint());
  Matrix v = Matrix::Identity(n, n);
  if (n == 0) return {RealVector(), v};

  const double scale = a.cwiseAbs().maxCoeff();
  if (scale > 0.0) {
    const double stop = 1e-15 * scale * static_cast<double>(n);
    const double skip = 1e-18 * scale;
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      double off = 0.0;
      for (Index p = 0; p < n; ++p)
        for (Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
      if (off <= stop) break;
      for (Index p = 0; p < n; ++p) {
        for (Index q = p + 1; q < n; ++q) {
          const Complex m = a(p, q);
          const double am = std::abs(m);
          if (am <= skip) continue;
          const double delta = 0.5 * (a(p, p).real() - a(q, q).real());
          const double hyp = std::hypot(delta, am);
          const double sign = delta >= 0.0 ? 1.0 : -1.0;
          const double t = -sign * am / (std::abs(delta) + hyp);
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const Complex sigma = (t * c) * (m / am);
          const Complex sigma_c = std::conj(sigma);
          // Right-multiply columns p,q by the rotation, then left-multiply rows.
          for (Index k = 0; k < n; ++k) {
            const Complex akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp - sigma_c * akq;
            a(k, q) = sigma * akp + c * akq;
          }
          for (Index k = 0; k < n; ++k) {
            const Complex apk = a(p, k), aqk = a(q, k);
            a(p, k) = c * apk - sigma * aqk;
            a(q, k) = sigma_c * apk + c * aqk;
          }
          a(p, q) = Complex(0, 0);
          a(q, p) = Complex(0, 0);
          a(p, p) = Complex(a(p, p).real(), 0.0);
          a(q, q) = Complex(a(q, q).real(), 0.0);
          for (Index k = 0; k < n; ++k) {
            const Complex vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - sigma_c * vkq;
            v(k, q) = sigma * vkp + c * vkq;
          }
        }
      }
    }
  }

  RealVector w(n);
  for (Index i = 0; i < n; ++i) w(i) = a(i, i).real();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return w(i) < w(j); });
  RealVector ws(n);
  Matrix vs(n, n);
  for (Index i = 0; i < n; ++i) {
    ws(i) = w(order[static_cast<std::size_t>(i)]);
    vs.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {std::move(ws), std::move(vs)};
}

// ---------------------------------------------------------------------------
// Tensor structure
// ---------------------------------------------------------------------------

// Local dimensions of the tensor factors of a Hilbert space.
class SystemShape {
 public:
  SystemShape() = default;
  explicit SystemShape(std::vector<Index> dims) : dims_(std::move(dims)) {
    for (Index d : dims_) detail::require(d >= 1, "SystemShape: local dims must be positive");
  }
  static SystemShape uniform(Index local_dim, int factors) {
    return SystemShape(std::vector<Index>(static_cast<std::size_t>(factors), local_dim));
  }
  Index total() const {
    Index t = 1;
    for (Index d : dims_) t *= d;
    return t;
  }
  int factors() const { return static_cast<int>(dims_.size()); }
  Index dim(int j) const { return dims_.at(static_cast<std::size_t>(j)); }
  const std::vector<Index>& dims() const { return dims_; }
  SystemShape repeated(int n) const {
    std::vector<Index> out;
    for (int i = 0; i < n; ++i) out.insert(out.end(), dims_.begin(), dims_.end());
    return SystemShape(std::move(out));
  }
  void check_matches(const Matrix& m, const char* who) const {
    detail::require(m.rows() == m.cols() && m.rows() == total(),
                    std::string(who) + ": shape does not match operator dimension");
  }

 private:
  std::vector<Index> dims_;
};

template <typename DA, typename DB,
          std::enable_if_t<DA::ColsAtCompileTime != 1 || DB::ColsAtCompileTime != 1, int> = 0>
Matrix tensor(const Eigen::MatrixBase<DA>& a_, const Eigen::MatrixBase<DB>& b_) {
  const Matrix a = a_, b = b_;
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename DA, typename DB,
          std::enable_if_t<DA::ColsAtCompileTime == 1 && DB::ColsAtCompileTime == 1, int> = 0>
Vector tensor(const Eigen::MatrixBase<DA>& a_, const Eigen::MatrixBase<DB>& b_) {
  const Vector a = a_, b = b_;
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Matrix tensor_pow(const Matrix& a, int n) {
  detail::require(n >= 1, "tensor_pow: n must be >= 1");
  Matrix out = a;
  for (int k = 1; k < n; ++k) out = tensor(out, a);
  return out;
}

namespace detail {

inline std::vector<Index> strides_of(const std::vector<Index>& dims) {
  std::vector<Index> s(dims.size());
  Index acc = 1;
  for (std::size_t j = dims.size(); j-- > 0;) {
    s[j] = acc;
    acc *= dims[j];
  }
  return s;
}

}  // namespace detail

// Reduced operator on the kept factors (indices into shape, any order given
// is normalised to ascending). Trace is preserved.
inline Matrix partial_trace(const Matrix& rho, const SystemShape& shape, std::vector<int> keep) {
  shape.check_matches(rho, "partial_trace");
  std::sort(keep.begin(), keep.end());
  detail::require(std::unique(keep.begin(), keep.end()) == keep.end(),
                  "partial_trace: repeated factor index");
  for (int k : keep)
    detail::require(k >= 0 && k < shape.factors(), "partial_trace: factor index out of range");

  const auto& dims = shape.dims();
  const auto strides = detail::strides_of(dims);
  std::vector<int> traced;
  for (int j = 0; j < shape.factors(); ++j)
    if (!std::binary_search(keep.begin(), keep.end(), j)) traced.push_back(j);

  Index dk = 1, dt = 1;
  for (int j : keep) dk *= dims[static_cast<std::size_t>(j)];
  for (int j : traced) dt *= dims[static_cast<std::size_t>(j)];

  // offsets of each kept (traced) multi-index within the full space
  auto offsets = [&](const std::vector<int>& which, Index count) {
    std::vector<Index> off(static_cast<std::size_t>(count), 0);
    std::vector<Index> idx(which.size(), 0);
    for (Index c = 0; c < count; ++c) {
      Index o = 0;
      for (std::size_t j = 0; j < which.size(); ++j)
        o += idx[j] * strides[static_cast<std::size_t>(which[j])];
      off[static_cast<std::size_t>(c)] = o;
      for (std::size_t j = which.size(); j-- > 0;) {
        if (++idx[j] < dims[static_cast<std::size_t>(which[j])]) break;
        idx[j] = 0;
      }
    }
    return off;
  };
  const auto keep_off = offsets(keep, dk);
  const auto traced_off = offsets(traced, dt);

  Matrix out = Matrix::Zero(dk, dk);
  for (Index i = 0; i < dk; ++i)
    for (Index j = 0; j < dk; ++j) {
      Complex acc(0, 0);
      for (Index t = 0; t < dt; ++t)
        acc += rho(keep_off[static_cast<std::size_t>(i)] + traced_off[static_cast<std::size_t>(t)],
                   keep_off[static_cast<std::size_t>(j)] + traced_off[static_cast<std::size_t>(t)]);
      out(i, j) = acc;
    }
  return out;
}

// Transpose of the selected factors (PPT tests use this).
inline Matrix partial_transpose(const Matrix& rho, const SystemShape& shape,
                                const std::vector<int>& transpose_factors) {
  shape.check_matches(rho, "partial_transpose");
  const auto& dims = shape.dims();
  const auto strides = detail::strides_of(dims);
  std::vector<bool> flip(static_cast<std::size_t>(shape.factors()), false);
  for (int j : transpose_factors) {
    detail::require(j >= 0 && j < shape.factors(), "partial_transpose: factor index out of range");
    flip[static_cast<std::size_t>(j)] = true;
  }
  const Index d = shape.total();
  Matrix out(d, d);
  std::vector<Index> ri(static_cast<std::size_t>(shape.factors()), 0),
      ci(static_cast<std::size_t>(shape.factors()), 0);
  for (Index r = 0; r < d; ++r) {
    // decompose r
    {
      Index rem = r;
      for (int j = 0; j < shape.factors(); ++j) {
        ri[static_cast<std::size_t>(j)] = rem / strides[static_cast<std::size_t>(j)];
        rem %= strides[static_cast<std::size_t>(j)];
      }
    }
    for (Index c = 0; c < d; ++c) {
      Index rem = c;
      for (int j = 0; j < shape.factors(); ++j) {
        ci[static_cast<std::size_t>(j)] = rem / strides[static_cast<std::size_t>(j)];
        rem %= strides[static_cast<std::size_t>(j)];
      }
      Index rr = 0, cc = 0;
      for (int j = 0; j < shape.factors(); ++j) {
        const auto sj = strides[static_cast<std::size_t>(j)];
        if (flip[static_cast<std::size_t>(j)]) {
          rr += ci[static_cast<std::size_t>(j)] * sj;
          cc += ri[static_cast<std::size_t>(j)] * sj;
        } else {
          rr += ri[static_cast<std::size_t>(j)] * sj;
          cc += ci[static_cast<std::size_t>(j)] * sj;
        }
      }
      out(rr, cc) = rho(r, c);
    }
  }
  return out;
}

// Permutation of tensor factors. perm[j] is the slot factor j is sent to, so
// the operator maps v_1 x ... x v_n to w_1 x ... x w_n with w_{perm[j]} = v_j
// (equivalently, slot k receives v_{perm^-1(k)}).
inline Matrix permutation_operator(const std::vector<int>& perm, const SystemShape& shape) {
  const int n = shape.factors();
  detail::require(static_cast<int>(perm.size()) == n, "permutation_operator: size mismatch");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int p : perm) {
    detail::require(p >= 0 && p < n, "permutation_operator: entry out of range");
    detail::require(!seen[static_cast<std::size_t>(p)], "permutation_operator: not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
  for (int j = 0; j < n; ++j)
    detail::require(shape.dim(j) == shape.dim(perm[static_cast<std::size_t>(j)]),
                    "permutation_operator: permuted factors must have equal dims");

  const auto& dims = shape.dims();
  const auto strides = detail::strides_of(dims);
  const Index d = shape.total();
  Matrix out = Matrix::Zero(d, d);
  std::vector<Index> idx(static_cast<std::size_t>(n), 0);
  for (Index col = 0; col < d; ++col) {
    Index rem = col;
    for (int j = 0; j < n; ++j) {
      idx[static_cast<std::size_t>(j)] = rem / strides[static_cast<std::size_t>(j)];
      rem %= strides[static_cast<std::size_t>(j)];
    }
    Index row = 0;
    for (int j = 0; j < n; ++j)
      row += idx[static_cast<std::size_t>(j)] *
             strides[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
    out(row, col) = Complex(1, 0);
  }
  return out;
}

inline Matrix permutation_operator(const std::vector<int>& perm, Index local_dim) {
  return permutation_operator(perm, SystemShape::uniform(local_dim, static_cast<int>(perm.size())));
}

// Permutes whole copies, each consisting of `copy_shape`. Copy j of the input
// is sent to copy slot perm[j].
inline Matrix copy_permutation_operator(const std::vector<int>& perm, const SystemShape& copy_shape) {
  const int n = static_cast<int>(perm.size());
  const int f = copy_shape.factors();
  std::vector<int> factor_perm(static_cast<std::size_t>(n * f));
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < f; ++a)
      factor_perm[static_cast<std::size_t>(j * f + a)] = perm[static_cast<std::size_t>(j)] * f + a;
  return permutation_operator(factor_perm, copy_shape.repeated(n));
}

// Exact average over all copy permutations (use for small n; n! terms).
inline Matrix symmetrize_copies(const Matrix& x, const SystemShape& copy_shape, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Matrix acc = Matrix::Zero(x.rows(), x.cols());
  int count = 0;
  do {
    const Matrix p = copy_permutation_operator(perm, copy_shape);
    acc += p * x * p.adjoint();
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Norms and matrix functions
// ---------------------------------------------------------------------------

inline double trace_norm(const Matrix& x) {
  const auto e = eigh(x);
  return e.eigenvalues.cwiseAbs().sum();
}

inline double trace_distance(const Matrix& a, const Matrix& b) { return 0.5 * trace_norm(a - b); }

// V f(lambda) V^dag for a Hermitian argument, without support restrictions.
inline Matrix apply_hermitian(const Matrix& h, const std::function<double(double)>& f) {
  const auto e = eigh(h);
  RealVector fw(e.eigenvalues.size());
  for (Index i = 0; i < fw.size(); ++i) fw(i) = f(e.eigenvalues(i));
  return e.eigenvectors * fw.asDiagonal() * e.eigenvectors.adjoint();
}

namespace detail {

// Eigenvalues <= support_rel * lambda_max count as kernel; anything below
// -psd tolerance is rejected.
inline double support_cutoff(const RealVector& w) {
  const double wmax = w.size() ? w.maxCoeff() : 0.0;
  return std::max(0.0, Tolerances::support_rel * wmax);
}

}  // namespace detail

// f applied to eigenvalues above the support cutoff; kernel mapped to
// kernel_value. Throws for eigenvalues below -psd tolerance.
inline Matrix apply_on_support(const Matrix& psd, const std::function<double(double)>& f,
                               double kernel_value = 0.0) {
  const auto e = eigh(psd);
  const double scale = std::max(1.0, e.eigenvalues.size() ? e.eigenvalues.cwiseAbs().maxCoeff() : 0.0);
  detail::require(e.eigenvalues.size() == 0 || e.eigenvalues.minCoeff() >= -Tolerances::psd * scale,
                  "apply_on_support: operator is not positive semi-definite within tolerance");
  const double cut = detail::support_cutoff(e.eigenvalues);
  RealVector fw(e.eigenvalues.size());
  for (Index i = 0; i < fw.size(); ++i)
    fw(i) = e.eigenvalues(i) > cut ? f(e.eigenvalues(i)) : kernel_value;
  return e.eigenvectors * fw.asDiagonal() * e.eigenvectors.adjoint();
}

// Base-2 logarithm on the support, zero on the kernel.
inline Matrix matrix_log2_on_support(const Matrix& psd) {
  return apply_on_support(psd, [](double x) { return std::log2(x); });
}

inline Matrix matrix_sqrt(const Matrix& psd) {
  return apply_on_support(psd, [](double x) { return std::sqrt(x); });
}

inline Matrix matrix_inv_sqrt_on_support(const Matrix& psd) {
  return apply_on_support(psd, [](double x) { return 1.0 / std::sqrt(x); });
}

inline Matrix support_projector(const Matrix& psd) {
  return apply_on_support(psd, [](double) { return 1.0; });
}

// Weight of rho outside the support of sigma: Tr[(1 - Pi_sigma) rho].
inline double support_leak(const Matrix& rho, const Matrix& sigma) {
  const Matrix pi = support_projector(sigma);
  const Matrix rest = Matrix::Identity(rho.rows(), rho.cols()) - pi;
  return std::real((rest * rho).trace());
}

inline bool support_contained(const Matrix& rho, const Matrix& sigma, double tol = 1e-9) {
  return support_leak(rho, sigma) <= tol;
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix m, double tol = Tolerances::hermiticity) {
    detail::require(m.rows() == m.cols(), "HermitianOperator: matrix must be square");
    detail::require(is_hermitian(m, tol), "HermitianOperator: matrix is not Hermitian within tolerance");
    m_ = 0.5 * (m + m.adjoint());
  }
  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

class DensityOperator {
 public:
  // Full validation: Hermitian, eigenvalues >= -psd tolerance, unit trace.
  // Small negative eigenvalues are clipped to zero and the state renormalised.
  static DensityOperator from_matrix(const Matrix& m) {
    HermitianOperator h(m);
    auto e = eigh(h.matrix());
    detail::require(e.eigenvalues.minCoeff() >= -Tolerances::psd,
                    "DensityOperator: negative eigenvalue beyond tolerance");
    const double tr = e.eigenvalues.sum();
    detail::require(std::abs(tr - 1.0) <= Tolerances::trace,
                    "DensityOperator: trace differs from one beyond tolerance");
    RealVector w = e.eigenvalues.cwiseMax(0.0);
    w /= w.sum();
    DensityOperator rho;
    rho.m_ = e.eigenvectors * w.asDiagonal() * e.eigenvectors.adjoint();
    rho.m_ = 0.5 * (rho.m_ + rho.m_.adjoint());
    rho.cache_ = EighResult{std::move(w), std::move(e.eigenvectors)};
    return rho;
  }

  // For states produced by trace-preserving algebra on already-valid states;
  // checks hermiticity and trace but skips the eigendecomposition.
  static DensityOperator trusted(Matrix m) {
    detail::require(is_hermitian(m), "DensityOperator: matrix is not Hermitian within tolerance");
    detail::require(std::abs(m.trace().real() - 1.0) <= Tolerances::trace &&
                        std::abs(m.trace().imag()) <= Tolerances::trace,
                    "DensityOperator: trace differs from one beyond tolerance");
    DensityOperator rho;
    rho.m_ = 0.5 * (m + m.adjoint());
    return rho;
  }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  const std::optional<EighResult>& eigen_cache() const { return cache_; }
  EighResult eigens() const { return cache_ ? *cache_ : eigh(m_); }

 private:
  DensityOperator() = default;
  Matrix m_;
  std::optional<EighResult> cache_;
};

class Povm {
 public:
  Povm(std::vector<Matrix> effects, std::vector<std::string> labels = {}) {
    detail::require(!effects.empty(), "Povm: no effects given");
    const Index d = effects.front().rows();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& e : effects) {
      detail::require(e.rows() == d && e.cols() == d, "Povm: effect shape mismatch");
      detail::require(is_hermitian(e), "Povm: effect is not Hermitian");
      const auto ev = eigh(e);
      detail::require(ev.eigenvalues.minCoeff() >= -Tolerances::psd,
                      "Povm: effect is not positive semi-definite within tolerance");
      sum += e;
    }
    detail::require((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8,
                    "Povm: effects do not sum to the identity within tolerance");
    effects_ = std::move(effects);
    if (labels.empty()) {
      for (std::size_t i = 0; i < effects_.size(); ++i) labels.push_back("outcome-" + std::to_string(i));
    }
    detail::require(labels.size() == effects_.size(), "Povm: label count mismatch");
    labels_ = std::move(labels);
  }
  std::size_t outcomes() const { return effects_.size(); }
  const Matrix& effect(std::size_t i) const { return effects_.at(i); }
  const std::vector<Matrix>& effects() const { return effects_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  // Outcome distribution of a state under this POVM.
  RealVector outcome_distribution(const Matrix& rho) const {
    RealVector p(static_cast<Index>(effects_.size()));
    for (std::size_t i = 0; i < effects_.size(); ++i)
      p(static_cast<Index>(i)) = std::max(0.0, std::real((effects_[i] * rho).trace()));
    return p;
  }

 private:
  std::vector<Matrix> effects_;
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Small operator builders
// ---------------------------------------------------------------------------

inline Vector basis_ket(Index dim, Index i) {
  Vector v = Vector::Zero(dim);
  v(i) = Complex(1, 0);
  return v;
}

inline Matrix projector(const Vector& psi) { return psi * psi.adjoint(); }

inline Matrix basis_projector(Index dim, Index i) { return projector(basis_ket(dim, i)); }

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// The two-qubit maximally entangled state |00> + |11| over sqrt(2).
inline Vector phi2_ket() {
  Vector v = Vector::Zero(4);
  v(0) = Complex(1.0 / std::sqrt(2.0), 0);
  v(3) = Complex(1.0 / std::sqrt(2.0), 0);
  return v;
}

inline Matrix phi2_state() { return projector(phi2_ket()); }

inline Matrix maximally_mixed(Index dim) {
  return Matrix::Identity(dim, dim) / static_cast<double>(dim);
}

}  // namespace qre
