#include <doctest.h>

#include "bergman_lab/runner.hpp"
#include "bergman_lab/scenario.hpp"

using namespace bergman_lab;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const char* kCross = R"(# comment line
id = cross
t0 = 0.1+0.05i   # trailing comment
weight.kind = polynomial
weight.poly = |t1|^2 + |z1|^2 + 0.5*(t1*conj(z1) + conj(t1)*z1)
section.1.map = 0.2 + 0.3*t1
section.1.amplitude = 1 + 0.5*t1
checks = certify, bergman_placeholder
)";

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("defaults") {
    const Scenario s = parse_scenario("id = minimal\n");
    CHECK(s.base_dim == 1);
    CHECK(s.numerics.degree == 24);
    CHECK(s.numerics.n_radial == 64);
    CHECK(s.numerics.n_angular == 128);
    CHECK(s.numerics.fd_step == 1e-2);
    CHECK(s.numerics.tolerance == 1e-3);
    CHECK(s.fiber.kind == DomainKind::disk);
    CHECK(s.sections.size() == 1);
    CHECK(s.frame.size() == 2);
    CHECK_FALSE(s.eps0.has_value());
    CHECK(s.checks.empty());
    CHECK(s.iteration_m == 2);

    const Scenario p = parse_scenario("fiber.kind = polydisc\nfiber.radii = 1, 1\n");
    CHECK(p.fiber.dim() == 2);
    CHECK(p.numerics.degree == 10);
    CHECK(p.numerics.n_radial == 12);
    CHECK(p.numerics.n_angular == 24);
    CHECK(p.frame.size() == 3);
  }

  TEST_CASE("unknown check names the line and field") {
    const std::string msg = error_of(kCross);
    CHECK(msg.find("line 8") != std::string::npos);
    CHECK(msg.find("'checks'") != std::string::npos);
    CHECK(msg.find("bergman_placeholder") != std::string::npos);
  }

  TEST_CASE("unknown, duplicate and malformed keys") {
    CHECK(error_of("id = a\nbogus = 1\n").find("line 2, field 'bogus': unknown key") != std::string::npos);
    CHECK(error_of("id = a\nid = b\n").find("duplicate key") != std::string::npos);
    CHECK(error_of("just text\n").find("line 1") != std::string::npos);
    CHECK(error_of("numerics.degree = two\n").find("numerics.degree") != std::string::npos);
    CHECK(error_of("section.2.map = 0.1\n").find("without gaps") != std::string::npos);
    CHECK(error_of("weight.kind = cubic\n").find("weight.kind") != std::string::npos);
  }

  TEST_CASE("semantic errors") {
    const std::string out = error_of("section.1.map = 0.98\n");
    CHECK(out.find("semantic error") != std::string::npos);
    CHECK(out.find("section 1") != std::string::npos);
    CHECK(error_of("t0 = 0.9\n").find("semantic error") != std::string::npos);
  }

  TEST_CASE("all checks keyword and certified eps0") {
    const Scenario s = parse_scenario("checks = all\neps0 = certified\n");
    CHECK(s.checks == registered_checks());
    CHECK_FALSE(s.eps0.has_value());
    CHECK(parse_scenario("eps0 = 0.5\n").eps0.value() == 0.5);
  }

  TEST_CASE("canonical text re-parses to the same configuration") {
    std::string text = kCross;
    text.replace(text.find("bergman_placeholder"), std::string("bergman_placeholder").size(), "reproducing");
    const Scenario s = parse_scenario(text);
    const Scenario again = parse_scenario(s.canonical());
    CHECK(again.canonical() == s.canonical());
    CHECK(config_hash(again) == config_hash(s));
    // Comments and whitespace do not change the hash; values do.
    const Scenario other = parse_scenario(text + "seed = 3\n");
    CHECK(config_hash(other) != config_hash(s));
  }

  TEST_CASE("overrides change the resolved config") {
    Scenario s = parse_scenario("id = o\n");
    const std::string before = config_hash(s);
    ScenarioOverrides o;
    o.degree = 16;
    o.fd_step = 5e-3;
    o.seed = 9;
    apply_overrides(s, o);
    CHECK(s.numerics.degree == 16);
    CHECK(s.numerics.fd_step == 5e-3);
    CHECK(s.seed == 9);
    CHECK(config_hash(s) != before);
    ScenarioOverrides bad;
    bad.fd_step = 1.0;
    CHECK_THROWS_AS(apply_overrides(s, bad), Error);
  }

  TEST_CASE("two base dimensions and an annulus") {
    const Scenario s = parse_scenario(
        "base_dim = 2\nt0 = 0.1, -0.1i\nweight.hessian = 1,0,0.2; 0,1,0; 0.2,0,1\n"
        "section.1.map = 0.2 + 0.1*t2\n");
    CHECK(s.base_dim == 2);
    CHECK(std::abs(s.t0(1) - cplx(0.0, -0.1)) < 1e-16);
    const Scenario a = parse_scenario("fiber.kind = annulus\nfiber.inner_radii = 0.5\nfiber.radii = 1\n");
    CHECK(a.fiber.kind == DomainKind::annulus);
    CHECK(std::abs(a.sections.section(0, a.t0)(0)) == doctest::Approx(0.75));
    CHECK(error_of("fiber.kind = annulus\nfiber.radii = 1\n").find("inner_radii") != std::string::npos);
  }

  TEST_CASE("check groups cover the registry") {
    std::size_t total = 0;
    for (const char* g : {"certify-weight", "bergman", "curvature", "hormander", "iterate"}) {
      for (const std::string& c : checks_for(g)) CHECK(is_registered_check(c));
      total += checks_for(g).size();
    }
    CHECK(total == registered_checks().size());
  }
}
