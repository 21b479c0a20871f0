#include <doctest.h>

#include <random>

#include "bergman_lab/expression.hpp"
#include "bergman_lab/polynomial.hpp"
#include "bergman_lab/scenario.hpp"
#include "generators.hpp"

using namespace bergman_lab;

TEST_SUITE("polynomial") {
  TEST_CASE("parse and evaluate") {
    const Polynomial p = parse_polynomial("|t|^2 + |z|^2 + 2*re(0.5*t*conj(z))", 1, 1);
    const cplx t(0.3, -0.2), z(0.1, 0.4);
    const CVector x = make_point({t, z});
    const double expect = std::norm(t) + std::norm(z) + (t * std::conj(z)).real();
    CHECK(std::abs(p.evaluate(x) - expect) < 1e-15);
    CHECK(p.is_real());
    CHECK(p.total_degree() == 2);
  }

  TEST_CASE("imaginary literals") {
    CHECK(std::abs(parse_complex("0.1+0.05i") - cplx(0.1, 0.05)) < 1e-16);
    CHECK(std::abs(parse_complex("2i") - cplx(0.0, 2.0)) < 1e-16);
    CHECK(std::abs(parse_complex("-0.05+0.1i") - cplx(-0.05, 0.1)) < 1e-16);
    CHECK(std::abs(parse_complex("i") - cplx(0.0, 1.0)) < 1e-16);
  }

  TEST_CASE("Wirtinger derivatives") {
    const Polynomial p = parse_polynomial("t1^2*conj(z1) + 3*t2*z1", 2, 1);
    const cplx t1(0.2, 0.1), t2(-0.3, 0.5), z(0.4, -0.1);
    const CVector x = make_point({t1, t2, z});
    CHECK(std::abs(p.d(0).evaluate(x) - 2.0 * t1 * std::conj(z)) < 1e-15);
    CHECK(std::abs(p.dbar(2).evaluate(x) - t1 * t1) < 1e-15);
    CHECK(std::abs(p.d(2).evaluate(x) - 3.0 * t2) < 1e-15);
    CHECK(p.dbar(0).is_zero());
  }

  TEST_CASE("algebra matches pointwise arithmetic (property)") {
    std::mt19937_64 rng(3);
    const Polynomial a = parse_polynomial("1 + t - 2*z*conj(t) + i*z^2", 1, 1);
    const Polynomial b = parse_polynomial("conj(z) - 0.5*t^3 + |z|^2", 1, 1);
    for (int k = 0; k < 50; ++k) {
      const CVector x = make_point({testing::random_point_in_disk(rng, 1.0), testing::random_point_in_disk(rng, 1.0)});
      const cplx av = a.evaluate(x), bv = b.evaluate(x);
      CHECK(std::abs((a * b).evaluate(x) - av * bv) < 1e-13);
      CHECK(std::abs((a - b).evaluate(x) - (av - bv)) < 1e-14);
      CHECK(std::abs(a.pow(3).evaluate(x) - av * av * av) < 1e-12);
      CHECK(std::abs(a.conj().evaluate(x) - std::conj(av)) < 1e-14);
    }
  }

  TEST_CASE("parse errors name the column") {
    try {
      parse_polynomial("t + * z", 1, 1);
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_polynomial("t3", 2, 1), Error);
    CHECK_THROWS_AS(parse_polynomial("z^-1", 1, 1), Error);
    CHECK_THROWS_AS(parse_polynomial("(t + z", 1, 1), Error);
  }

  TEST_CASE("prefix expressions") {
    const Expression e = Expression::parse("(+ (* (exp (abs2 t1)) (abs2 z1)) (abs2 t1))", 1, 1);
    const cplx t(0.3, 0.1), z(0.2, -0.4);
    const double expect = std::exp(std::norm(t)) * std::norm(z) + std::norm(t);
    CHECK(std::abs(e.evaluate(make_point({t, z})) - expect) < 1e-14);
    CHECK_THROWS_AS(Expression::parse("(+ t1", 1, 1), Error);
    CHECK_THROWS_AS(Expression::parse("(frob t1)", 1, 1), Error);
  }
}
