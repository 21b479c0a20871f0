#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "bergman_lab/report.hpp"
#include "bergman_lab/runner.hpp"

using namespace bergman_lab;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(id = small
t0 = 0.1+0.05i
weight.kind = polynomial
weight.poly = |t1|^2 + |z1|^2 + 0.5*(t1*conj(z1) + conj(t1)*z1)
section.1.map = 0.2 + 0.3*t1
section.1.amplitude = 1 + 0.5*t1
numerics.degree = 16
numerics.quadrature = 32, 64
checks = certify, trace_optimality, reproducing, kernel_symmetry, section_value, log_inequality
seed = 7
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bergman_lab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("hashing helpers") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
    CHECK(json_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(json_number(1.5) == 1.5);
  }

  TEST_CASE("runs are deterministic across thread counts") {
    const Scenario s = parse_scenario(kSmall);
    RunOptions one, two;
    two.threads = 2;
    const RunReport a = run_scenario(s, one);
    const RunReport b = run_scenario(s, two);
    REQUIRE(a.records.size() == 6);
    CHECK(a.report_hash() == b.report_hash());
    CHECK(a.exit_code() == 0);
    for (const CheckRecord& r : a.records) CHECK(r.verdict == "pass");
    CHECK(a.config_hash == config_hash(s));
  }

  TEST_CASE("records stream in order and round-trip through JSON lines") {
    const Scenario s = parse_scenario(kSmall);
    const fs::path dir = scratch("roundtrip");
    ReportWriter writer(dir.string(), s.id, config_hash(s), true);
    std::vector<std::string> seen;
    RunOptions opts;
    opts.on_record = [&](const CheckRecord& r) {
      writer.append(r);
      seen.push_back(r.check);
    };
    const RunReport rep = run_scenario(s, opts);
    writer.finish(rep);
    CHECK(seen == s.checks);

    const RunReport back = read_jsonl(writer.jsonl_path());
    CHECK(back.config_hash == rep.config_hash);
    CHECK(back.report_hash() == rep.report_hash());
    CHECK(fs::exists(dir / "small.summary.json"));

    std::ifstream csv(dir / "small.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "scenario,config_hash,check,verdict,quantity,value");
  }

  TEST_CASE("merging refuses mismatched config hashes") {
    const Scenario s = parse_scenario(kSmall);
    RunReport a = run_checks(s, {"certify"});
    RunReport b = run_checks(s, {"kernel_symmetry"});
    const RunReport merged = merge_reports({a, b});
    CHECK(merged.records.size() == 2);
    b.config_hash = "0000000000000000";
    CHECK_THROWS_AS(merge_reports({a, b}), Error);
  }

  TEST_CASE("exit codes") {
    const Scenario over = parse_scenario(std::string(kSmall) + "eps0 = 0.9\n");
    const RunReport fail = run_checks(over, {"certify"});
    CHECK(fail.records[0].verdict == "fail");
    CHECK(fail.records[0].margin.value() == doctest::Approx(0.75 - 0.9).epsilon(1e-9));
    CHECK(fail.exit_code() == 2);

    Scenario coarse = parse_scenario(kSmall);
    ScenarioOverrides o;
    o.degree = 4;
    apply_overrides(coarse, o);
    const RunReport unconv = run_checks(coarse, {"convergence"});
    CHECK(unconv.records[0].verdict == "unconverged");
    CHECK(unconv.exit_code() == 3);

    RunReport mixed = unconv;
    mixed.records.push_back(fail.records[0]);
    CHECK(mixed.exit_code() == 2);

    const RunReport empty = run_scenario(parse_scenario("checks =\n"));
    CHECK(empty.records.empty());
    CHECK(empty.exit_code() == 0);
  }

  TEST_CASE("record JSON keeps inf and drops timings on request") {
    CheckRecord r;
    r.check = "demo";
    r.outputs["x"] = json_number(std::numeric_limits<double>::infinity());
    r.margin = -1.0;
    r.seconds = 2.5;
    const Json j = r.to_json("s", "h", false);
    CHECK_FALSE(j.contains("seconds"));
    const CheckRecord back = CheckRecord::from_json(r.to_json("s", "h"));
    CHECK(back.check == "demo");
    CHECK(back.margin.value() == -1.0);
    CHECK(back.outputs["x"] == "inf");
  }
}

TEST_SUITE("cli") {
  namespace {
  int run_cli(const std::string& args) {
    const std::string cmd = std::string(BERGMAN_LAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path write_scenario(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }
  }  // namespace

  TEST_CASE("subcommands, exit codes and report merging") {
    const fs::path dir = scratch("cli");
    const fs::path ok = write_scenario(dir, "ok.scn", kSmall);
    const fs::path over = write_scenario(dir, "over.scn", std::string(kSmall) + "eps0 = 0.9\n");
    const fs::path broken = write_scenario(dir, "broken.scn", "bogus = 1\n");
    std::string conv_text = kSmall;
    conv_text.replace(conv_text.find("checks ="), std::string::npos, "checks = convergence\n");
    const fs::path conv = write_scenario(dir, "conv.scn", conv_text);
    const std::string out = " --out " + (dir / "reports").string();

    CHECK(run_cli("run --scenario " + ok.string() + out + " --format csv") == 0);
    CHECK(fs::exists(dir / "reports" / "small.jsonl"));
    CHECK(fs::exists(dir / "reports" / "small.csv"));
    CHECK(run_cli("certify-weight --scenario " + over.string() + out) == 2);
    CHECK(run_cli("run --scenario " + broken.string() + out) == 1);
    CHECK(run_cli("run --scenario " + (dir / "missing.scn").string()) == 1);
    CHECK(run_cli("run --scenario " + conv.string() + out + " --degree 4") == 3);
    CHECK(run_cli("") == 1);

    // Same config hash: the two runs merge.
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    CHECK(run_cli("certify-weight --scenario " + ok.string() + " --out " + (dir / "a").string()) == 0);
    CHECK(run_cli("curvature --scenario " + ok.string() + " --out " + (dir / "b").string()) == 0);
    CHECK(run_cli("report --input " + (dir / "a" / "small.jsonl").string() + " --input " +
                  (dir / "b" / "small.jsonl").string() + out) == 0);
    CHECK(fs::exists(dir / "reports" / "small.merged.jsonl"));

    // Different seed: refused.
    CHECK(run_cli("certify-weight --scenario " + ok.string() + " --seed 99 --out " + (dir / "b").string()) == 0);
    CHECK(run_cli("report --input " + (dir / "a" / "small.jsonl").string() + " --input " +
                  (dir / "b" / "small.jsonl").string() + out) == 1);
  }

  TEST_CASE("shipped scenarios parse") {
    for (const auto& entry : fs::directory_iterator(BERGMAN_LAB_SCENARIOS)) {
      if (entry.path().extension() != ".scn") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_scenario(entry.path().string()));
    }
  }

  TEST_CASE("acceptance subset through the CLI") {
    const fs::path dir = scratch("suite");
    CHECK(run_cli("suite --only A4,A5,A12 --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "acceptance.json"));
  }
}
