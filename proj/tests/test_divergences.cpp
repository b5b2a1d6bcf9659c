#include "test_support.hpp"

#include "qre/divergences.hpp"

using namespace qre;
using qt::max_abs;

namespace {

Matrix plus_state() {
  Vector v(2);
  v << Complex(1, 0), Complex(1, 0);
  return projector(v / v.norm());
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("umegaki relative entropy", "[divergences]") {
  Rng rng(101);
  Matrix rho = random_density(3, rng);

  CHECK(umegaki(rho, rho).value == Catch::Approx(0.0).margin(1e-10));
  CHECK(umegaki(basis_projector(2, 0), maximally_mixed(2)).value == Catch::Approx(1.0));
  CHECK(umegaki(basis_projector(2, 0), basis_projector(2, 1)).is_infinite());
  CHECK_THROWS_AS(umegaki(rho, maximally_mixed(2)), ValidationError);
}

TEST_CASE("max-relative entropy", "[divergences]") {
  Rng rng(103);
  Matrix rho = random_density(2, rng);

  CHECK(dmax(rho, rho).value == Catch::Approx(0.0).margin(1e-9));
  CHECK(dmax(plus_state(), maximally_mixed(2)).value == Catch::Approx(1.0).margin(1e-10));
  CHECK(dmax(basis_projector(2, 0), basis_projector(2, 1)).is_infinite());

  SECTION("dominates the Umegaki divergence") {
    for (int t = 0; t < 500; ++t) {
      const Index d = (t % 2 == 0) ? 2 : 3;
      Matrix a = random_density(d, rng), b = random_density(d, rng);
      CHECK(dmax(a, b).value >= umegaki(a, b).value - 1e-8);
    }
  }
}

TEST_CASE("hypothesis testing relative entropy", "[divergences]") {
  Rng rng(107);

  SECTION("identical states give -log2(1-eps)") {
    Matrix rho = random_density(3, rng);
    for (double eps : {0.1, 0.5, 0.9})
      CHECK(hypothesis_testing(rho, rho, eps).value ==
            Catch::Approx(-std::log2(1.0 - eps)).margin(1e-9));
  }

  SECTION("frozen commuting example with boundary randomisation") {
    auto dv = hypothesis_testing(diag2(0.75, 0.25), maximally_mixed(2), 0.25);
    CHECK(dv.value == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(dv.certificate.has_value());
    CHECK(max_abs(*dv.certificate - basis_projector(2, 0)) <= 1e-7);
  }

  SECTION("value is nondecreasing in eps (feasible-set nesting)") {
    for (int t = 0; t < 10; ++t) {
      Matrix a = random_density(3, rng), b = random_density(3, rng);
      double prev = -kInfinity;
      for (double eps = 0.1; eps < 0.95; eps += 0.1) {
        const double v = hypothesis_testing(a, b, eps).value;
        CHECK(v >= prev - 1e-10);
        prev = v;
      }
    }
  }

  SECTION("certificate is a feasible test") {
    for (int t = 0; t < 25; ++t) {
      Matrix a = random_density(4, rng), b = random_density(4, rng);
      const double eps = 0.05 + 0.9 * (t / 25.0);
      auto dv = hypothesis_testing(a, b, eps);
      REQUIRE(dv.certificate.has_value());
      const auto e = eigh(*dv.certificate);
      CHECK(e.eigenvalues.minCoeff() >= -1e-10);
      CHECK(e.eigenvalues.maxCoeff() <= 1.0 + 1e-10);
      CHECK(std::real(((*dv.certificate) * a).trace()) >= 1.0 - eps - 1e-9);
    }
  }

  SECTION("matches the classical greedy optimum on commuting pairs") {
    for (int t = 0; t < 30; ++t) {
      const Index d = 4;
      RealVector p = random_simplex_point(d, rng), q = random_simplex_point(d, rng);
      Matrix a = Matrix::Zero(d, d), b = Matrix::Zero(d, d);
      for (Index i = 0; i < d; ++i) {
        a(i, i) = p(i);
        b(i, i) = q(i);
      }
      const double eps = 0.05 + 0.02 * t;
      const double beta_np = std::exp2(-hypothesis_testing(a, b, eps).value);
      CHECK(beta_np == Catch::Approx(qt::classical_np_beta(p, q, eps)).margin(1e-8));
    }
  }

  SECTION("disjoint supports report +infinity") {
    CHECK(hypothesis_testing(basis_projector(2, 0), basis_projector(2, 1), 0.1).is_infinite());
  }

  SECTION("eps outside [0,1] is rejected") {
    Matrix rho = random_density(2, rng);
    CHECK_THROWS_AS(hypothesis_testing(rho, rho, -0.1), ValidationError);
    CHECK_THROWS_AS(hypothesis_testing(rho, rho, 1.1), ValidationError);
  }
}

TEST_CASE("i.i.d. hypothesis testing approaches the relative entropy", "[divergences][heavy]") {
  Matrix rho = plus_state();
  Matrix sig = 0.8 * maximally_mixed(2) + 0.2 * plus_state();
  const double target = umegaki(rho, sig).value;
  std::vector<double> diffs;
  Matrix rn = rho, sn = sig;
  for (int n = 1; n <= 6; ++n) {
    if (n > 1) {
      rn = tensor(rn, rho);
      sn = tensor(sn, sig);
    }
    diffs.push_back(std::abs(hypothesis_testing(rn, sn, 0.05).value / n - target));
  }
  CHECK(diffs.back() < diffs.front());
  for (std::size_t i = 1; i < diffs.size(); ++i) CHECK(diffs[i] < diffs[i - 1]);
}

TEST_CASE("measured relative entropy over all POVMs", "[divergences]") {
  Rng rng(109);

  SECTION("identical states") {
    Matrix rho = random_density(3, rng);
    CHECK(measured_all(rho, rho).value == Catch::Approx(0.0).margin(1e-9));
  }

  SECTION("commuting pairs saturate the Umegaki value") {
    auto dv = measured_all(diag2(0.75, 0.25), diag2(0.25, 0.75));
    CHECK(dv.value ==
          Catch::Approx(umegaki(diag2(0.75, 0.25), diag2(0.25, 0.75)).value).margin(1e-6));
  }

  SECTION("non-commuting pairs have a strict gap") {
    Matrix rho = plus_state(), sig = diag2(0.75, 0.25);
    const double m = measured_all(rho, sig).value;
    const double u = umegaki(rho, sig).value;
    CHECK(m < u - 1e-4);
  }

  SECTION("never exceeds the Umegaki value (data processing)") {
    for (int t = 0; t < 40; ++t) {
      const Index d = (t % 2 == 0) ? 2 : 3;
      Matrix a = random_density(d, rng), b = random_density(d, rng);
      CHECK(measured_all(a, b).value <= umegaki(a, b).value + 1e-9);
    }
  }
}

TEST_CASE("measured relative entropy over explicit families", "[divergences]") {
  Rng rng(113);
  Matrix rho = random_density(2, rng), sig = random_density(2, rng);

  SECTION("trivial POVM carries no information") {
    Povm trivial({Matrix::Identity(2, 2)});
    CHECK(measured_restricted(rho, sig, {trivial}).value == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("the optimal two-outcome test achieves the binary divergence") {
    const double eps = 0.2;
    auto np = neyman_pearson(rho, sig, eps);
    Povm binary({np.test, Matrix::Identity(2, 2) - np.test});
    RealVector p(2), q(2);
    p << 1.0 - eps, eps;
    q << np.beta, 1.0 - np.beta;
    CHECK(measured_restricted(rho, sig, {binary}).value >= kl_divergence(p, q) - 1e-9);
  }

  SECTION("restricted families are dominated by the full optimum") {
    for (int t = 0; t < 20; ++t) {
      Matrix a = random_density(2, rng), b = random_density(2, rng);
      auto np = neyman_pearson(a, b, 0.3);
      Povm binary({np.test, Matrix::Identity(2, 2) - np.test});
      Povm basis({basis_projector(2, 0), basis_projector(2, 1)});
      const double restricted = measured_restricted(a, b, {binary, basis}).value;
      CHECK(restricted <= measured_all(a, b).value + 1e-6);
    }
  }

  SECTION("empty family is rejected") {
    CHECK_THROWS_AS(measured_restricted(rho, sig, {}), ValidationError);
  }
}

TEST_CASE("smoothed max-relative entropy", "[divergences]") {
  Rng rng(127);
  Matrix rho = random_density(2, rng), sig = random_density(2, rng);

  SECTION("zero smoothing recovers dmax") {
    CHECK(smoothed_dmax(rho, sig, 0.0).value == Catch::Approx(dmax(rho, sig).value).margin(1e-8));
  }

  SECTION("value is nonincreasing in eps") {
    double prev = kInfinity;
    for (double eps : {0.0, 0.05, 0.1, 0.2, 0.35, 0.5}) {
      const double v = smoothed_dmax(rho, sig, eps).value;
      CHECK(v <= prev + 1e-8);
      prev = v;
    }
  }

  SECTION("smoothing a pure state toward the mixed state helps strictly") {
    Matrix pure = basis_projector(2, 0);
    auto sm = smoothed_dmax(pure, maximally_mixed(2), 0.5);
    const double unsmoothed = dmax(pure, maximally_mixed(2)).value;
    CHECK(sm.value < unsmoothed - 0.1);
    // never worse than the explicit feasible candidate
    const Matrix cand = 0.5 * pure + 0.5 * maximally_mixed(2);
    CHECK(sm.value <= dmax(cand, maximally_mixed(2)).value + 1e-9);
    // certificate feasibility
    REQUIRE(sm.certificate.has_value());
    CHECK(0.5 * trace_norm(*sm.certificate - pure) <= 0.5 + 1e-9);
    CHECK(std::abs(sm.certificate->trace().real() - 1.0) <= 1e-9);
  }
}

TEST_CASE("pinching", "[divergences]") {
  Rng rng(131);

  SECTION("nondegenerate diagonal conditioning state dephases") {
    PinchingMap pm(diag2(0.7, 0.3));
    Matrix x = random_hermitian(2, rng);
    Matrix px = pm(x);
    CHECK(std::abs(px(0, 1)) <= 1e-12);
    CHECK(std::abs(px(0, 0) - x(0, 0)) <= 1e-12);
    CHECK(pm.distinct_eigenvalues() == 2);
  }

  SECTION("pinched states commute with the conditioning state") {
    for (int t = 0; t < 10; ++t) {
      Matrix sig = random_density(4, rng);
      Matrix rho = random_density(4, rng);
      PinchingMap pm(sig);
      Matrix c = pm(rho) * sig - sig * pm(rho);
      CHECK(max_abs(c) <= 1e-10);
    }
  }

  SECTION("pinching inequality sandwich on permutation-invariant states") {
    for (int n = 2; n <= 3; ++n) {
      for (int t = 0; t < 10; ++t) {
        Matrix rho = random_density(2, rng);
        Matrix rho_n = tensor_pow(rho, n);
        Matrix sig_n = symmetrize_copies(random_density(1 << n, rng), SystemShape({2}), n);
        sig_n = 0.98 * sig_n + 0.02 * maximally_mixed(1 << n);
        PinchingMap pm(sig_n);
        const double d_full = umegaki(rho_n, sig_n).value;
        const double d_pinched = umegaki(pm(rho_n), sig_n).value;
        const double q = std::log2(static_cast<double>(pm.distinct_eigenvalues()));
        CHECK(d_pinched <= d_full + 1e-8);
        CHECK(d_pinched >= d_full - q - 1e-8);
      }
    }
  }
}
