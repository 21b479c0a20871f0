#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bergman_lab/fiber_numerics.hpp"
#include "generators.hpp"

using namespace bergman_lab;
using std::numbers::pi;

TEST_SUITE("fiber_numerics") {
  TEST_CASE("three-point Gauss-Legendre rule") {
    const auto [x, w] = gauss_legendre(3);
    CHECK(x(0) == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-15));
    CHECK(std::abs(x(1)) < 1e-15);
    CHECK(x(2) == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
    CHECK(w(0) == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
    CHECK(w(1) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK(w(2) == doctest::Approx(5.0 / 9.0).epsilon(1e-15));
  }

  TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n : {2, 5, 16, 64}) {
      const auto [x, w] = gauss_legendre(n);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        double s = 0.0;
        for (Index j = 0; j < x.size(); ++j) s += w(j) * std::pow(x(j), k);
        const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
        CHECK(std::abs(s - exact) < 1e-13);
      }
    }
  }

  TEST_CASE("quadrature volumes") {
    CHECK(build_quadrature(FiberDomain::disk(1.0), 16, 32).weights.sum() == doctest::Approx(pi).epsilon(1e-14));
    CHECK(build_quadrature(FiberDomain::disk(0.7), 16, 32).weights.sum() ==
          doctest::Approx(pi * 0.49).epsilon(1e-14));
    CHECK(build_quadrature(FiberDomain::polydisc({1.0, 0.5}), 8, 16).weights.sum() ==
          doctest::Approx(pi * pi * 0.25).epsilon(1e-13));
    const FiberDomain ann = FiberDomain::annulus({0.5}, {1.0});
    CHECK(ann.volume() == doctest::Approx(pi * 0.75));
    CHECK(build_quadrature(ann, 16, 32).weights.sum() == doctest::Approx(pi * 0.75).epsilon(1e-14));
  }

  TEST_CASE("moments of |z|^2k on the unit disk") {
    const QuadratureRule q = build_quadrature(FiberDomain::disk(), 32, 64);
    for (int k = 0; k <= 20; ++k) {
      double s = 0.0;
      for (Index j = 0; j < q.size(); ++j) s += q.weights(j) * std::pow(std::norm(q.nodes(j, 0)), k);
      CHECK(s == doctest::Approx(pi / (k + 1)).epsilon(1e-13));
    }
  }

  TEST_CASE("distinct monomials are orthogonal under radial weights") {
    const QuadratureRule q = build_quadrature(FiberDomain::disk(), 32, 64);
    const MonomialBasis b = monomial_basis(1, 10);
    const HermitianMatrix g = gram_matrix(b, RVector::Ones(q.size()), q);
    for (Index j = 0; j < g.rows(); ++j)
      for (Index k = 0; k < g.cols(); ++k)
        if (j != k) CHECK(std::abs(g(j, k)) < 1e-14);
  }

  TEST_CASE("monomial ordering and names") {
    const MonomialBasis b1 = monomial_basis(1, 3);
    CHECK(b1.size() == 4);
    CHECK(b1.name(0) == "1");
    CHECK(b1.degree(3) == 3);

    const MonomialBasis b = monomial_basis(2, 2);
    REQUIRE(b.size() == 6);
    const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(b.exponents == expected);
    CHECK(b.size_up_to(0) == 1);
    CHECK(b.size_up_to(1) == 3);
    CHECK(b.size_up_to(2) == 6);
    CHECK(b.name(4).find("z1") != std::string::npos);
    CHECK(b.name(4).find("z2") != std::string::npos);

    const CVector v = b.evaluate(make_point({cplx(2.0, 0.0), cplx(0.0, 1.0)}));
    CHECK(std::abs(v(4) - cplx(0.0, 2.0)) < 1e-15);
    CHECK(std::abs(v(5) - cplx(-1.0, 0.0)) < 1e-15);
  }

  TEST_CASE("orthonormalize produces an identity Gram (property)") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 25; ++trial) {
      const Index size = 1 + static_cast<Index>(rng() % 8);
      const HermitianMatrix g = testing::random_hpd(rng, size, 0.05);
      const Orthonormalization o = orthonormalize(g);
      const CMatrix id = o.transform.adjoint() * g * o.transform;
      CHECK((id - CMatrix::Identity(size, size)).norm() < 1e-11);
      for (Index r = 0; r < size; ++r)
        for (Index c = 0; c < r; ++c) CHECK(std::abs(o.transform(r, c)) == 0.0);
      CHECK(o.condition >= 1.0);
    }
  }

  TEST_CASE("orthonormalize rejects a rank-deficient Gram") {
    CMatrix v(4, 3);
    v << 1, 2, 3, 0, 1, 1, 1, 0, 1, 2, 1, 3;  // third column = first + second
    const HermitianMatrix g = v.adjoint() * v;
    try {
      orthonormalize(g);
      FAIL("expected degenerate_basis");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate_basis);
      CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
  }

  TEST_CASE("polar differentiation of z^2 conj(z)") {
    const QuadratureRule q = build_quadrature(FiberDomain::disk(), 24, 48);
    const PolarDifferentiator diff(q);
    CVector f(q.size()), df(q.size()), dbf(q.size());
    for (Index j = 0; j < q.size(); ++j) {
      const cplx z = q.nodes(j, 0);
      f(j) = z * z * std::conj(z);
      df(j) = 2.0 * z * std::conj(z);
      dbf(j) = z * z;
    }
    CHECK((diff.d(f, 0) - df).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((diff.dbar(f, 0) - dbf).cwiseAbs().maxCoeff() < 1e-9);

    const auto mask = diff.interior_mask(2);
    Index kept = 0;
    for (char m : mask) kept += m ? 1 : 0;
    CHECK(kept == (24 - 2) * 48);
  }

  TEST_CASE("polar differentiation on a polydisc") {
    const QuadratureRule q = build_quadrature(FiberDomain::polydisc({1.0, 0.8}), 10, 20);
    const PolarDifferentiator diff(q);
    CVector f(q.size());
    CVector expect(q.size());
    for (Index j = 0; j < q.size(); ++j) {
      const cplx z1 = q.nodes(j, 0), z2 = q.nodes(j, 1);
      f(j) = z1 * std::conj(z2) * z2;
      expect(j) = z1 * z2;
    }
    CHECK((diff.dbar(f, 1) - expect).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(diff.dbar(f, 0).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("domain validation and containment") {
    CHECK_THROWS_AS(FiberDomain::annulus({1.0}, {0.5}).validate(), Error);
    CHECK_THROWS_AS(FiberDomain::polydisc({1.0, 1.0, 1.0}).validate(), Error);
    const FiberDomain d = FiberDomain::disk();
    CHECK(d.contains(make_point({0.5})));
    CHECK_FALSE(d.contains(make_point({0.97}), 0.05));
    CHECK_FALSE(FiberDomain::annulus({0.5}, {1.0}).contains(make_point({0.2})));
  }
}
