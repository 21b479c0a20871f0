#include <doctest.h>

#include <random>

#include "bergman_lab/iteration.hpp"

using namespace bergman_lab;

namespace {

std::shared_ptr<const FiberSpace> disk_space() {
  static const auto space = make_fiber_space(FiberDomain::disk(), 24, 64, 128);
  return space;
}

WeightFamily cross(double lambda) {
  HermitianMatrix h(2, 2);
  h << 1.0, lambda, lambda, 1.0;
  return WeightFamily::quadratic(h, 1, 1);
}

IterationConfig config(double eps0) {
  IterationConfig c;
  c.check.space = disk_space();
  c.check.patch = BasePatch{make_point({0.0}), 0.5};
  c.base_points = {make_point({cplx(0.1, 0.05)})};
  c.eps0 = eps0;
  return c;
}

}  // namespace

TEST_SUITE("iteration") {
  TEST_CASE("ledger bound values") {
    CHECK(ledger_bound(2, 0, 1.0) == 0.0);
    CHECK(ledger_bound(2, 1, 1.0) == doctest::Approx(0.5).epsilon(1e-16));
    CHECK(ledger_bound(2, 2, 1.0) == doctest::Approx(0.75).epsilon(1e-16));
    CHECK(ledger_bound(2, 3, 1.0) == doctest::Approx(0.875).epsilon(1e-16));
    CHECK(ledger_bound(3, 2, 0.6) == doctest::Approx(0.6 * 5.0 / 9.0).epsilon(1e-15));
  }

  TEST_CASE("ledger series matches the closed form and increases to eps0 (property)") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
      const int m = 2 + static_cast<int>(rng() % 20);
      const int k = static_cast<int>(rng() % 13);
      const double eps0 = u(rng);
      const double b = ledger_bound(m, k, eps0);
      CHECK(std::abs(b - ledger_bound_closed(m, k, eps0)) <= 4e-16 * eps0 * (k + 1));
      CHECK(b <= eps0);
      if (k > 0) CHECK(b > ledger_bound(m, k - 1, eps0));
    }
  }

  TEST_CASE("mixing") {
    const std::vector<BasePoint> pts{make_point({0.0}), make_point({0.1})};
    SampledWeight a = flat_weight(pts, 5, "a");
    a.values.setConstant(2.0);
    SampledWeight b = flat_weight(pts, 5, "b");
    b.values.setConstant(-1.0);
    const SampledWeight mix = mix_weights(a, b, 4);
    CHECK((mix.values.array() - (0.75 * 2.0 - 0.25)).abs().maxCoeff() < 1e-15);
    CHECK((mix_weights(a, a, 3).values - a.values).norm() < 1e-15);
    CHECK_THROWS_AS(mix_weights(a, flat_weight(pts, 6), 2), Error);
    CHECK_THROWS_AS(mix_weights(a, flat_weight({make_point({0.0}), make_point({0.2})}, 5), 2), Error);
    CHECK_THROWS_AS(mix_weights(a, b, 1), Error);
  }

  TEST_CASE("Bergman potential of a t-independent weight") {
    const auto space = disk_space();
    const std::vector<BasePoint> pts{make_point({0.0}), make_point({cplx(0.1, 0.2)})};
    HermitianMatrix h = HermitianMatrix::Zero(2, 2);
    h(1, 1) = 1.0;
    const SampledWeight s = sample_weight(WeightFamily::quadratic(h, 1, 1), pts, space->quad, "fiber-only");
    double change = 1.0;
    const SampledWeight pb = bergman_weight(s, space, measurement_nodes(*space), &change);
    CHECK((pb.values.col(0) - pb.values.col(1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(change < 1e-6);
    // At the origin K = 1 / ||1||^2 with ||1||^2 = pi (1 - 1/e).
    const BergmanBasis b = bergman_basis(WeightFamily::quadratic(h, 1, 1), pts[0], space);
    CHECK(std::exp(pb.values(0, 0)) ==
          doctest::Approx(kernel_eval(b, space->quad.node(0), space->quad.node(0)).real()).epsilon(1e-12));
  }

  TEST_CASE("Bergman potential is resolution independent on inner nodes") {
    const std::vector<BasePoint> pts{make_point({cplx(0.1, 0.05)})};
    const FiberPoint probe = make_point({cplx(0.2, 0.1)});
    double at[2];
    int idx = 0;
    for (auto [nr, na] : {std::pair{48, 96}, std::pair{64, 128}}) {
      const auto space = make_fiber_space(FiberDomain::disk(), 24, nr, na);
      const BergmanBasis b = bergman_basis(cross(0.5), pts[0], space);
      at[idx++] = std::log(kernel_eval(b, probe, probe).real());
    }
    CHECK(std::abs(at[0] - at[1]) < 1e-8);
  }

  TEST_CASE("zero steps and invalid arguments") {
    const IterationLedger empty = run_iteration(cross(0.5), 2, 0, config(0.75));
    CHECK(empty.steps.empty());
    CHECK(empty.pass());
    CHECK_THROWS_AS(run_iteration(cross(0.5), 1, 2, config(0.75)), Error);
    CHECK_THROWS_AS(run_iteration(cross(0.5), 2, 13, config(0.75)), Error);
    CHECK_THROWS_AS(run_iteration(cross(0.5), 2, 2, config(0.0)), Error);
  }

  TEST_CASE("separable weight: measured trace equals the ledger bound") {
    const WeightFamily w = WeightFamily::quadratic(HermitianMatrix::Identity(2, 2), 1, 1);
    const IterationLedger led = run_iteration(w, 2, 4, config(1.0));
    REQUIRE_FALSE(led.aborted);
    REQUIRE(led.steps.size() == 4);
    for (const IterationStep& s : led.steps) {
      CHECK(s.pass);
      CHECK(s.measured_trace == doctest::Approx(s.bound).epsilon(1e-6));
      CHECK(s.separable_defect < 1e-10);
      CHECK(s.bound == doctest::Approx(s.closed_form).epsilon(1e-15));
    }
    CHECK(led.pass());
  }

  TEST_CASE("cross-term weight stays above the ledger") {
    const IterationLedger led = run_iteration(cross(0.5), 3, 3, config(0.75));
    REQUIRE_FALSE(led.aborted);
    for (const IterationStep& s : led.steps) {
      CHECK(s.pass);
      CHECK(s.margin >= -led.tolerance);
      CHECK(s.kernel_change < 1e-6);
      CHECK(s.normalized_min <= 0.0);
    }
  }

  TEST_CASE("starting from the Bergman potential of the weight") {
    const WeightFamily w = WeightFamily::quadratic(HermitianMatrix::Identity(2, 2), 1, 1);
    IterationConfig cfg = config(1.0);
    cfg.start = IterationStart::bergman;
    const IterationLedger led = run_iteration(w, 2, 3, cfg);
    REQUIRE_FALSE(led.aborted);
    for (const IterationStep& s : led.steps) CHECK(s.measured_trace == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("twisted run reports the untwisted slack") {
    HermitianMatrix h = HermitianMatrix::Zero(3, 3);
    h.diagonal() << 1.0, -0.5, 1.0;
    const WeightFamily w = twist_weight(WeightFamily::quadratic(h, 2, 1), 0.5);
    IterationConfig cfg;
    cfg.check.space = disk_space();
    cfg.check.patch = BasePatch{make_point({0.0, 0.0}), 0.5};
    cfg.base_points = {make_point({0.0, 0.0})};
    cfg.eps0 = 0.75;
    cfg.twist = 0.5;
    const IterationLedger led = run_iteration(w, 2, 2, cfg);
    CAPTURE(led.abort_reason);
    REQUIRE_FALSE(led.aborted);
    REQUIRE(led.steps.size() == 2);
    CHECK(led.steps[0].delta == doctest::Approx(0.5 - 0.375).epsilon(1e-12));
    CHECK(led.steps[0].untwisted_trace == doctest::Approx(led.steps[0].measured_trace - 2 * 0.5).epsilon(1e-12));
  }
}
