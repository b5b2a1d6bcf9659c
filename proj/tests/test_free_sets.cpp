#include "test_support.hpp"

#include "qre/free_sets.hpp"

using namespace qre;
using qt::max_abs;

TEST_CASE("coherence family", "[free_sets]") {
  auto fam = coherence_family(2);

  CHECK(fam.membership(maximally_mixed(2), 1).verdict == MembershipVerdict::inside);

  Vector plus(2);
  plus << Complex(1, 0), Complex(1, 0);
  plus /= plus.norm();
  CHECK(fam.membership(projector(plus), 1).verdict == MembershipVerdict::outside);

  Matrix g = Matrix::Zero(2, 2);
  g(0, 0) = 0.2;
  g(1, 1) = 0.9;
  CHECK(max_abs(fam.linear_oracle(g, 1, 5) - basis_projector(2, 1)) == 0.0);

  SECTION("oracle is exact for diagonal objectives") {
    Rng rng(55);
    for (int t = 0; t < 20; ++t) {
      Matrix gg = random_hermitian(4, rng);
      const Matrix s = fam.linear_oracle(gg, 2, rng());
      double best_diag = -1e300;
      for (Index i = 0; i < 4; ++i) best_diag = std::max(best_diag, gg(i, i).real());
      CHECK(std::real((gg * s).trace()) == Catch::Approx(best_diag).margin(1e-12));
    }
  }
}

TEST_CASE("two-qubit separable family", "[free_sets]") {
  auto fam = separable_two_qubit_family();

  SECTION("the ebit is outside, the maximally mixed state inside") {
    auto m = fam.membership(phi2_state(), 1);
    CHECK(m.verdict == MembershipVerdict::outside);
    REQUIRE(m.witness.has_value());
    // entanglement witness: negative on the state, nonnegative on members
    CHECK(std::real(((*m.witness) * phi2_state()).trace()) < -1e-6);
    CHECK(fam.membership(maximally_mixed(4), 1).verdict == MembershipVerdict::inside);
  }

  SECTION("best product overlap with the ebit is one half") {
    const Matrix s = fam.linear_oracle(phi2_state(), 1, 3);
    CHECK(std::real((phi2_state() * s).trace()) == Catch::Approx(0.5).margin(1e-9));
    CHECK(qt::best_product_overlap_grid(phi2_state()) == Catch::Approx(0.5).margin(1e-7));
  }

  SECTION("oracle matches the zooming-grid benchmark on random objectives") {
    Rng rng(57);
    for (int t = 0; t < 50; ++t) {
      Matrix g = random_hermitian(4, rng);
      const Matrix s = fam.linear_oracle(g, 1, rng());
      const double mine = std::real((g * s).trace());
      const double grid = qt::best_product_overlap_grid(g);
      CHECK(mine == Catch::Approx(grid).margin(1e-6));
    }
  }

  SECTION("oracle outputs are valid members") {
    Rng rng(59);
    for (int t = 0; t < 10; ++t) {
      Matrix g = random_hermitian(4, rng);
      const Matrix s = fam.linear_oracle(g, 1, rng());
      CHECK(std::abs(s.trace().real() - 1.0) <= 1e-10);
      CHECK(eigh(s).eigenvalues.minCoeff() >= -1e-12);
      CHECK(fam.membership(s, 1).verdict == MembershipVerdict::inside);
    }
  }
}

TEST_CASE("fully product family", "[free_sets]") {
  auto fam = pseudo_entanglement_family(2, 2);

  SECTION("products of level-1 members pass level-2 membership") {
    Rng rng(61);
    const Matrix a = sample_free_state(fam, 1, rng);
    const Matrix b = sample_free_state(fam, 1, rng);
    auto m = fam.membership(tensor(a, b), 2, 1e-6);
    CHECK(m.verdict == MembershipVerdict::inside);
  }

  SECTION("best fully-product overlap with two ebits is one quarter") {
    const Matrix target = tensor(phi2_state(), phi2_state());
    const Matrix s = fam.linear_oracle(target, 2, 9);
    CHECK(std::real((target * s).trace()) == Catch::Approx(0.25).margin(1e-9));
  }

  SECTION("oracle outputs stay inside the separable cone (PPT)") {
    Rng rng(63);
    for (int t = 0; t < 8; ++t) {
      Matrix g = random_hermitian(16, rng);
      const Matrix s = fam.linear_oracle(g, 2, rng());
      const SystemShape shape({2, 2, 2, 2});
      Matrix w;
      CHECK(qre::detail::ppt_min_eigenvalue(s, shape, &w) >= -1e-10);
    }
  }

  SECTION("the double ebit is outside") {
    CHECK(fam.membership(tensor(phi2_state(), phi2_state()), 2, 1e-6).verdict ==
          MembershipVerdict::outside);
  }
}

TEST_CASE("block family", "[free_sets]") {
  SECTION("k = 1 reproduces the fully product family on sampled objectives") {
    auto blocked = block_family(2, 2, 1);
    auto plain = pseudo_entanglement_family(2, 2);
    Rng rng(65);
    for (int t = 0; t < 6; ++t) {
      Matrix g = random_hermitian(16, rng);
      const std::uint64_t s = rng();
      const double va = std::real((g * blocked.linear_oracle(g, 2, s)).trace());
      const double vb = std::real((g * plain.linear_oracle(g, 2, s)).trace());
      CHECK(va == Catch::Approx(vb).margin(1e-8));
    }
  }

  SECTION("k = 2 admits entanglement inside a block but not across the cut") {
    auto fam = block_family(2, 2, 2);
    // two ebits arranged as one block: entangled across A^2 : B^2, outside
    const Matrix two_ebits = tensor(phi2_state(), phi2_state());
    CHECK(fam.membership(two_ebits, 1, 1e-6).verdict == MembershipVerdict::outside);
    Rng rng(67);
    for (int t = 0; t < 5; ++t) {
      Matrix g = random_hermitian(16, rng);
      const Matrix s = fam.linear_oracle(g, 1, rng());
      Matrix w;
      CHECK(qre::detail::ppt_min_eigenvalue(s, SystemShape({2, 2, 2, 2}), &w) >= -1e-10);
    }
  }

  SECTION("blocked oracle dominates the fully product oracle") {
    auto blocked = block_family(2, 2, 2);
    auto plain = pseudo_entanglement_family(2, 2);
    Rng rng(69);
    for (int t = 0; t < 5; ++t) {
      Matrix g = random_hermitian(16, rng);
      const std::uint64_t s = rng();
      const double vb = std::real((g * blocked.linear_oracle(g, 1, s)).trace());
      const double vp = std::real((g * plain.linear_oracle(g, 2, s)).trace());
      CHECK(vb >= vp - 1e-8);
    }
  }
}

TEST_CASE("axiom checks", "[free_sets]") {
  SECTION("coherence passes all five axioms") {
    auto rep = axiom_check(coherence_family(2), 3, 30, 71);
    CHECK(rep.all_pass);
    for (const auto& r : rep.results) {
      CHECK(r.pass);
      CHECK(r.checks > 0);
    }
  }

  SECTION("fully product family passes all five axioms") {
    auto rep = axiom_check(pseudo_entanglement_family(2, 2), 2, 20, 73);
    CHECK(rep.all_pass);
  }

  SECTION("negative control fails the full-rank axiom with a witness") {
    auto rep = axiom_check(negative_control_family(2), 2, 15, 75);
    CHECK_FALSE(rep.all_pass);
    const auto& ax2 = rep.results[1];
    CHECK(ax2.axiom == 2);
    CHECK_FALSE(ax2.pass);
    CHECK(ax2.witness.has_value());
    // everything else about the diagonal family is untouched
    CHECK(rep.results[0].pass);
    CHECK(rep.results[2].pass);
  }
}

TEST_CASE("compatibility of conditioning with the fully product family", "[free_sets]") {
  auto fam = pseudo_entanglement_family(2, 2);

  SECTION("identity effect reduces to the partial-trace axiom") {
    Rng rng(77);
    const Matrix rho = sample_free_state(fam, 2, rng);
    const Matrix red = partial_trace(rho, fam.copy_shape.repeated(2), {0, 1});
    CHECK(fam.membership(red, 1, 1e-6).verdict == MembershipVerdict::inside);
  }

  SECTION("product states condition to product states") {
    Rng rng(79);
    const Matrix m1 = sample_free_state(fam, 1, rng);
    const Matrix m2 = sample_free_state(fam, 1, rng);
    Matrix e = random_density(4, rng);
    e /= eigh(e).eigenvalues.maxCoeff();
    const Matrix lifted = tensor(Matrix::Identity(4, 4), matrix_sqrt(e));
    const Matrix cond =
        partial_trace(lifted * tensor(m1, m2) * lifted, fam.copy_shape.repeated(2), {0, 1});
    const Matrix normalised = cond / cond.trace().real();
    CHECK(max_abs(normalised - m1) <= 1e-10);
    CHECK(fam.membership(normalised, 1, 1e-6).verdict == MembershipVerdict::inside);
  }

  SECTION("random members and effects stay compatible") {
    auto rep = compatibility_check(fam, 1, 1, 12, 81, 1e-6);
    CHECK(rep.pass);
    CHECK(rep.max_distance <= 1e-6);
  }
}

TEST_CASE("family selection by name", "[free_sets]") {
  CHECK(family_from_name("coherence:3").name == "coherence:3");
  CHECK(family_from_name("sep2x2").name == "sep2x2");
  CHECK(family_from_name("product:2,2").name == "product:2,2");
  CHECK(family_from_name("product-block:2,2,2").name == "product-block:2,2,2");
  CHECK_THROWS_AS(family_from_name("nonsense"), ValidationError);
  CHECK_THROWS_AS(family_from_name("coherence:x"), ValidationError);
  CHECK_THROWS_AS(family_from_name("product:2"), ValidationError);
}

TEST_CASE("singleton family", "[free_sets]") {
  Rng rng(83);
  const Matrix s = random_density(2, rng);
  auto fam = singleton_family(s);
  CHECK(max_abs(fam.linear_oracle(random_hermitian(4, rng), 2, 1) - tensor(s, s)) <= 1e-12);
  CHECK(fam.membership(tensor(s, s), 2).verdict == MembershipVerdict::inside);
  CHECK(fam.membership(maximally_mixed(4), 2).verdict == MembershipVerdict::outside);
  CHECK_THROWS_AS(singleton_family(basis_projector(2, 0)), ValidationError);
}
