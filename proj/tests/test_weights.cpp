#include <doctest.h>

#include <random>

#include "bergman_lab/weights.hpp"
#include "generators.hpp"

using namespace bergman_lab;

namespace {

HermitianMatrix cross_hessian(double lambda) {
  HermitianMatrix h(2, 2);
  h << 1.0, lambda, lambda, 1.0;
  return h;
}

SamplingGrid grid_1d() {
  BasePatch p{make_point({0.0}), 0.5};
  return make_sampling_grid(p, FiberDomain::disk(), 2, 8, 3);
}

// Schur complement of the fiber block via the inverse of the full matrix:
// ((H^{-1})_tt)^{-1}.
double schur_via_inverse(const HermitianMatrix& full, int n) {
  const CMatrix inv = full.inverse();
  return CMatrix(inv.topLeftCorner(n, n)).inverse().trace().real();
}

long factorial(int k) { return k <= 1 ? 1 : k * factorial(k - 1); }

}  // namespace

TEST_SUITE("weights") {
  TEST_CASE("Schur trace of a 2x2 block") {
    HermitianMatrix full(2, 2);
    full << 3.0, cplx(1.0, 2.0), cplx(1.0, -2.0), 4.0;
    const ComplexHessian h = ComplexHessian::split(full, 1);
    CHECK(schur_trace(h) == doctest::Approx(3.0 - 5.0 / 4.0).epsilon(1e-15));
  }

  TEST_CASE("Schur trace agrees with the inverse formula (property)") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 60; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 3);
      const int d = 1 + static_cast<int>(rng() % 2);
      const HermitianMatrix full = testing::random_hpd(rng, n + d, 0.2);
      const ComplexHessian h = ComplexHessian::split(full, n);
      CHECK(std::abs(schur_trace(h) - schur_via_inverse(full, n)) < 1e-10 * std::max(1.0, full.norm()));
      CHECK((h.assembled() - full).norm() == 0.0);
      CHECK(std::abs(ma_ratio(h, n, d) - schur_trace(h)) < 1e-10 * std::max(1.0, full.norm()));
    }
  }

  TEST_CASE("Schur trace needs a positive fiber block") {
    HermitianMatrix full(2, 2);
    full << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(schur_trace(ComplexHessian::split(full, 1)), Error);
  }

  TEST_CASE("wedge of identical forms is N! det (property)") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const int size = 1 + static_cast<int>(rng() % 4);
      const HermitianMatrix m = testing::random_hermitian(rng, size);
      const std::vector<HermitianMatrix> forms(static_cast<std::size_t>(size), m);
      const double expect = static_cast<double>(factorial(size)) * m.determinant().real();
      CHECK(std::abs(wedge_top_coefficient(forms) - expect) < 1e-10 * std::max(1.0, std::abs(expect)));
    }
  }

  TEST_CASE("trace form is minimized at the Schur complement (property)") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 3);
      const int d = 1 + static_cast<int>(rng() % 2);
      const ComplexHessian h = normalize_fiber_block(ComplexHessian::split(testing::random_hpd(rng, n + d), n));
      CHECK((h.ff - CMatrix::Identity(d, d)).norm() < 1e-12);
      const double st = schur_trace(h);
      CHECK(std::abs(trace_quadratic_form(h, h.tf) - st) < 1e-12);
      const CMatrix lambda = testing::random_complex(rng, n, d);
      CHECK(trace_quadratic_form(h, lambda) >= st - 1e-12);
    }
  }

  TEST_CASE("normalizing the fiber block keeps the Schur trace") {
    std::mt19937_64 rng(23);
    const ComplexHessian h = ComplexHessian::split(testing::random_hpd(rng, 3), 2);
    CHECK(std::abs(schur_trace(normalize_fiber_block(h)) - schur_trace(h)) < 1e-12);
  }

  TEST_CASE("certified constants of quadratic weights") {
    for (double lambda : {0.0, 0.3, 0.5, 0.7}) {
      const WeightFamily w = WeightFamily::quadratic(cross_hessian(lambda), 1, 1);
      const WeightCertificate c = certify(w, grid_1d());
      CHECK(c.eps0 == doctest::Approx(1.0 - lambda * lambda).epsilon(1e-12));
      CHECK(c.C == 0.0);
      CHECK(c.fiber_positive);
    }
    for (double lambda : {0.0, 0.5}) {
      HermitianMatrix h(3, 3);
      h << 1, 0, lambda, 0, 1, lambda / 2, lambda, lambda / 2, 1;
      const WeightFamily w = WeightFamily::quadratic(h, 2, 1);
      BasePatch p{make_point({0.0, 0.0}), 0.5};
      const WeightCertificate c = certify(w, make_sampling_grid(p, FiberDomain::disk()));
      CHECK(c.eps0 == doctest::Approx((2.0 - 1.25 * lambda * lambda) / 2.0).epsilon(1e-12));
    }
  }

  TEST_CASE("a weight that is not psh in t gets C and no eps0") {
    HermitianMatrix h = HermitianMatrix::Zero(3, 3);
    h.diagonal() << 1.0, -0.5, 1.0;
    const WeightFamily w = WeightFamily::quadratic(h, 2, 1);
    BasePatch p{make_point({0.0, 0.0}), 0.5};
    const SamplingGrid g = make_sampling_grid(p, FiberDomain::disk());
    const WeightCertificate c = certify(w, g);
    CHECK(c.C == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.eps0 == 0.0);

    const WeightFamily tw = twist_weight(w, 0.5);
    CHECK(tw.twist() == 0.5);
    const WeightCertificate ct = certify(tw, g);
    CHECK(ct.C == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ct.eps0 == doctest::Approx(0.75).epsilon(1e-12));

    const BasePoint t = make_point({cplx(0.1, 0.2), cplx(-0.3, 0.0)});
    const FiberPoint xi = make_point({cplx(0.2, -0.1)});
    CHECK(tw.value(t, xi) == doctest::Approx(w.value(t, xi) + 0.5 * t.squaredNorm()).epsilon(1e-14));
  }

  TEST_CASE("fiber block that is not positive") {
    HermitianMatrix h = HermitianMatrix::Zero(2, 2);
    h(0, 0) = 1.0;
    const WeightCertificate c = certify(WeightFamily::quadratic(h, 1, 1), grid_1d());
    CHECK_FALSE(c.fiber_positive);
    CHECK(c.eps0 == 0.0);
    CHECK_FALSE(c.diagnostics.empty());
  }

  TEST_CASE("distortion margin") {
    CHECK(distortion_margin(2, 0.1, 1.0) == doctest::Approx(0.81 / 1.4641).epsilon(1e-14));
    CHECK(distortion_margin(1, 0.1, 1.0) == doctest::Approx(1.0 / 1.21).epsilon(1e-14));
    CHECK(distortion_margin(3, 0.0, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
    double prev = 1.0;
    for (double delta = 0.05; delta < 0.95; delta += 0.05) {
      const double m = distortion_margin(2, delta, 1.0);
      CHECK(m < prev);
      prev = m;
    }
    CHECK_THROWS_AS(distortion_margin(1, 1.0, 1.0), Error);
    CHECK_THROWS_AS(distortion_margin(0, 0.1, 1.0), Error);
  }

  TEST_CASE("polynomial and quadratic weights agree") {
    const WeightFamily q = WeightFamily::quadratic(cross_hessian(0.5), 1, 1);
    const WeightFamily p = WeightFamily::polynomial(
        parse_polynomial("|t1|^2 + |z1|^2 + 0.5*(t1*conj(z1) + conj(t1)*z1)", 1, 1), 1, 1);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 20; ++k) {
      const BasePoint t = make_point({testing::random_point_in_disk(rng, 0.5)});
      const FiberPoint xi = make_point({testing::random_point_in_disk(rng, 1.0)});
      CHECK(std::abs(q.value(t, xi) - p.value(t, xi)) < 1e-14);
      CHECK((q.hessian(t, xi).assembled() - p.hessian(t, xi).assembled()).norm() < 1e-14);
      CHECK(std::abs(q.d_base(t, xi, 0) - p.d_base(t, xi, 0)) < 1e-14);
    }
  }

  TEST_CASE("custom weight Hessian by finite differences") {
    const WeightFamily c = WeightFamily::custom(
        Expression::parse("(+ (+ (abs2 t1) (abs2 z1)) (* (abs2 t1) (abs2 z1)))", 1, 1), 1, 1);
    const WeightFamily p = WeightFamily::polynomial(parse_polynomial("|t1|^2 + |z1|^2 + |t1|^2*|z1|^2", 1, 1), 1, 1);
    CHECK(c.kind() == WeightKind::custom);
    const BasePoint t = make_point({cplx(0.2, -0.1)});
    const FiberPoint xi = make_point({cplx(0.3, 0.4)});
    CHECK(std::abs(c.value(t, xi) - p.value(t, xi)) < 1e-14);
    CHECK((c.hessian(t, xi).assembled() - p.hessian(t, xi).assembled()).norm() < 1e-6);
    // phi_{t zbar} = conj(t) z for |t|^2 |z|^2.
    CHECK(std::abs(p.hessian(t, xi).tf(0, 0) - std::conj(t(0)) * xi(0)) < 1e-14);
  }

  TEST_CASE("complex-valued polynomial is rejected") {
    try {
      WeightFamily::polynomial(parse_polynomial("t1*conj(z1)", 1, 1), 1, 1);
      FAIL("expected not_a_weight");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::not_a_weight);
    }
  }

  TEST_CASE("sampling grid stays inside the patch and fiber") {
    BasePatch p{make_point({cplx(0.1, 0.0)}), 0.3};
    const SamplingGrid g = make_sampling_grid(p, FiberDomain::disk(0.8), 2, 8, 3);
    CHECK(g.base_points.size() == 17);
    for (const BasePoint& t : g.base_points) CHECK(p.contains(t, 1e-12));
    for (const FiberPoint& xi : g.fiber_points) CHECK(FiberDomain::disk(0.8).contains(xi));
  }
}
