#include <doctest.h>

#include <numbers>
#include <random>

#include "bergman_lab/bergman.hpp"
#include "generators.hpp"

using namespace bergman_lab;
using std::numbers::pi;

namespace {

std::shared_ptr<const FiberSpace> disk_space() {
  static const auto space = make_fiber_space(FiberDomain::disk(), 24, 64, 128);
  return space;
}

WeightFamily separable() { return WeightFamily::quadratic(HermitianMatrix::Identity(2, 2), 1, 1); }

WeightFamily cross(double lambda) {
  HermitianMatrix h(2, 2);
  h << 1.0, lambda, lambda, 1.0;
  return WeightFamily::quadratic(h, 1, 1);
}

BergmanBasis flat_basis(const std::shared_ptr<const FiberSpace>& space) {
  return bergman_basis_from_values(make_point({0.0}), RVector::Ones(space->quad.size()), space, "flat");
}

SectionFamily moving_section() {
  SectionFamily f;
  f.add({parse_polynomial("0.2 + 0.3*t1", 1, 0)}, parse_polynomial("1 + 0.5*t1", 1, 0));
  return f;
}

}  // namespace

TEST_SUITE("bergman") {
  TEST_CASE("flat disk basis is z^k sqrt((k+1)/pi)") {
    const BergmanBasis b = flat_basis(disk_space());
    const cplx z(0.3, -0.4);
    const CVector u = b.frame(make_point({z}));
    for (Index k = 0; k < u.size(); ++k)
      CHECK(std::abs(std::abs(u(k)) - std::pow(std::abs(z), static_cast<double>(k)) * std::sqrt((k + 1) / pi)) <
            1e-12);
    CHECK(std::abs(kernel_eval(b, make_point({0.0}), make_point({0.0})) - 1.0 / pi) < 1e-14);
    const double r2 = std::norm(z);
    // Truncation error of the degree-24 kernel at |z| = 0.5 is below 1e-12.
    CHECK(kernel_eval(b, make_point({z}), make_point({z})).real() ==
          doctest::Approx(1.0 / (pi * (1 - r2) * (1 - r2))).epsilon(1e-11));
    const cplx w(0.1, 0.2);
    CHECK(std::abs(kernel_eval(b, make_point({z}), make_point({w})) -
                   1.0 / (pi * std::pow(1.0 - z * std::conj(w), 2))) < 1e-11);
  }

  TEST_CASE("Gaussian weight: norms of 1 and z") {
    const auto space = disk_space();
    const BergmanBasis b = bergman_basis(separable(), make_point({0.0}), space);
    CHECK(b.gram(0, 0).real() == doctest::Approx(pi * (1.0 - 1.0 / std::numbers::e)).epsilon(1e-13));
    CHECK(b.gram(1, 1).real() == doctest::Approx(pi * (1.0 - 2.0 / std::numbers::e)).epsilon(1e-13));
    CHECK(b.gram(0, 0).real() == doctest::Approx(1.985865).epsilon(1e-6));
    CHECK(b.gram(1, 1).real() == doctest::Approx(0.830138).epsilon(1e-6));

    const HermitianMatrix g = frame_gram(separable(), parse_frame("1, z", 1), make_point({0.0}), *space);
    CHECK(std::abs(g(0, 1)) < 1e-14);
    CHECK(min_eigenvalue(g) == doctest::Approx(0.830138).epsilon(1e-6));
  }

  TEST_CASE("reproducing property") {
    const auto space = disk_space();
    const BergmanBasis b = bergman_basis(cross(0.5), make_point({cplx(0.1, 0.05)}), space);
    const FiberFunction h = [](const FiberPoint& xi) {
      const cplx z = xi(0);
      return cplx(1.0, 0.5) - 2.0 * z + cplx(0.0, 3.0) * std::pow(z, 5);
    };
    std::mt19937_64 rng(41);
    for (int k = 0; k < 10; ++k) {
      const FiberPoint w = make_point({testing::random_point_in_disk(rng, 0.6)});
      CHECK(reproducing_residual(b, h, w) < 1e-8);
    }
  }

  TEST_CASE("extremal characterization and Hermitian symmetry") {
    const auto space = disk_space();
    const BergmanBasis b = bergman_basis(cross(0.3), make_point({cplx(-0.1, 0.2)}), space);
    std::mt19937_64 rng(43);
    for (int k = 0; k < 10; ++k) {
      const FiberPoint z = make_point({testing::random_point_in_disk(rng, 0.6)});
      const FiberPoint w = make_point({testing::random_point_in_disk(rng, 0.6)});
      const auto [kd, sup] = extremal_check(b, w);
      CHECK(std::abs(kd - sup) <= 1e-10 * kd);
      CHECK(std::abs(kernel_eval(b, z, w) - std::conj(kernel_eval(b, w, z))) < 1e-12);
      CHECK(kernel_eval(b, z, z).real() > 0.0);
    }
  }

  TEST_CASE("section value matches the brute-force quadratic form") {
    const auto space = disk_space();
    const WeightFamily w = cross(0.5);
    const BasePoint t = make_point({cplx(0.1, 0.05)});
    SectionFamily fam = moving_section();
    fam.add({parse_polynomial("-0.3 + 0.1*i*t1", 1, 0)}, parse_polynomial("2", 1, 0));
    const BergmanBasis b = bergman_basis(w, t, space);
    const double bv = section_value(b, fam);

    // e_j = sum_k a_k m_j(s_k); B = e^T G^{-1} conj(e).
    CVector e = CVector::Zero(b.gram.rows());
    for (int k = 0; k < fam.size(); ++k)
      e += fam.amplitude(k, t) * space->basis.evaluate(fam.section(k, t));
    const cplx brute = (e.transpose() * b.gram.ldlt().solve(CVector(e.conjugate())))(0);
    CHECK(std::abs(bv - brute.real()) <= 1e-8 * bv);
    CHECK(std::abs(brute.imag()) <= 1e-10 * bv);
    CHECK(section_value(w, fam, t, space) == doctest::Approx(bv).epsilon(1e-14));
  }

  TEST_CASE("separable weight scales B by exp(|t|^2)") {
    const auto space = disk_space();
    const SectionFamily fam = SectionFamily::constant(1, make_point({0.3}));
    const double b0 = section_value(separable(), fam, make_point({0.0}), space);
    const BasePoint t = make_point({cplx(0.2, -0.1)});
    CHECK(section_value(separable(), fam, t, space) == doctest::Approx(b0 * std::exp(0.05)).epsilon(1e-12));
  }

  TEST_CASE("kernel convergence diagnostic") {
    const BergmanBasis good = bergman_basis(cross(0.5), make_point({0.0}), disk_space());
    const ConvergenceDiagnostic ok = kernel_convergence(good, {make_point({0.3})});
    CHECK(ok.converged);
    CHECK(ok.relative_change < 1e-6);

    const auto coarse = make_fiber_space(FiberDomain::disk(), 4, 32, 64);
    const BergmanBasis poor = bergman_basis(cross(0.5), make_point({0.0}), coarse);
    const ConvergenceDiagnostic bad = kernel_convergence(poor, {make_point({0.9})});
    CHECK_FALSE(bad.converged);
  }

  TEST_CASE("direct image Gram is positive definite with Gaussian scaling") {
    const auto space = disk_space();
    const std::vector<BasePoint> pts{make_point({0.0}), make_point({cplx(0.3, 0.1)})};
    const DirectImageGram dig = direct_image_gram(separable(), parse_frame("1, z, z^2", 1), pts, space);
    REQUIRE(dig.grams.size() == 2);
    CHECK(min_eigenvalue(dig.grams[1]) > 0.0);
    // G(t) = exp(-|t|^2) G(0), so log det drops by 3 |t|^2.
    CHECK(dig.log_det(1) == doctest::Approx(dig.log_det(0) - 3 * 0.1).epsilon(1e-12));
    HermitianMatrix indefinite = HermitianMatrix::Identity(2, 2);
    indefinite(1, 1) = -1.0;
    CHECK_THROWS_AS(log_det_hpd(indefinite), Error);
  }

  TEST_CASE("sections must stay inside the fiber") {
    SectionFamily fam;
    fam.add({parse_polynomial("0.5 + t1", 1, 0)}, parse_polynomial("1", 1, 0));
    try {
      fam.validate_inside(FiberDomain::disk(), {make_point({0.0}), make_point({0.6})});
      FAIL("expected outside_domain");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::outside_domain);
      CHECK(std::string(e.what()).find("section 1") != std::string::npos);
    }
    SectionFamily anti;
    anti.add({parse_polynomial("conj(t1)", 1, 0)}, parse_polynomial("1", 1, 0));
    CHECK_THROWS_AS(anti.validate_structure(1, 1), Error);
  }

  TEST_CASE("polydisc Bergman basis") {
    const auto space = make_fiber_space(FiberDomain::polydisc({1.0, 1.0}), 8, 12, 24);
    const BergmanBasis b =
        bergman_basis_from_values(make_point({0.0}), RVector::Ones(space->quad.size()), space, "flat");
    // Product kernel: K(0, 0) = 1 / pi^2.
    CHECK(std::abs(kernel_eval(b, make_point({0.0, 0.0}), make_point({0.0, 0.0})) - 1.0 / (pi * pi)) < 1e-13);
  }
}
