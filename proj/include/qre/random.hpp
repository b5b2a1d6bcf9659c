// random.hpp — seeded samplers for states, Hermitian operators and simplices.
// Every routine takes its generator (or a seed) explicitly; nothing global.

#pragma once

#include "qre/linalg.hpp"

#include <cstdint>
#include <random>

namespace qre {

using Rng = std::mt19937_64;

// Derive an independent stream from a base seed (splitmix64 step).
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t k) {
  std::uint64_t z = base + (k + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline Complex random_gaussian_complex(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}

inline Matrix random_hermitian(Index dim, Rng& rng) {
  Matrix a(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) a(i, j) = random_gaussian_complex(rng);
  return 0.5 * (a + a.adjoint());
}

inline Vector random_ket(Index dim, Rng& rng) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = random_gaussian_complex(rng);
  return v / v.norm();
}

// Hilbert-Schmidt style mixed state from a Ginibre factor.
inline Matrix random_density(Index dim, Rng& rng, Index rank = 0) {
  if (rank <= 0) rank = dim;
  Matrix g(dim, rank);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < rank; ++j) g(i, j) = random_gaussian_complex(rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

inline RealVector random_simplex_point(Index dim, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  RealVector w(dim);
  for (Index i = 0; i < dim; ++i) w(i) = e(rng);
  return w / w.sum();
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> u(0, i);
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(u(rng))]);
  }
  return p;
}

}  // namespace qre
