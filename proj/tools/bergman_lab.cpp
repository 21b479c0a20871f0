// bergman-lab: runs scenario checks, the acceptance suite, and report merges.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bergman_lab/acceptance.hpp"
#include "bergman_lab/report.hpp"
#include "bergman_lab/runner.hpp"
#include "bergman_lab/scenario.hpp"

using namespace bergman_lab;

namespace {

struct CommonOptions {
  std::string scenario;
  std::string out = "reports";
  std::string format = "json";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> h_step;
  std::optional<int> degree;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "Output directory for reports");
  app->add_option("--format", o.format, "Extra output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "Seed for randomized checks");
  app->add_option("--h-step", o.h_step, "Finite-difference step")->check(CLI::PositiveNumber);
  app->add_option("--degree", o.degree, "Polynomial degree N")->check(CLI::NonNegativeNumber);
}

void print_record(const CheckRecord& r) {
  std::cout << std::left << std::setw(12) << r.verdict << std::setw(20) << r.check;
  if (r.margin) std::cout << " margin " << std::setprecision(6) << *r.margin;
  std::cout << "  (" << std::fixed << std::setprecision(2) << r.seconds << " s)" << std::defaultfloat;
  if (!r.message.empty()) std::cout << "  " << r.message;
  std::cout << "\n";
}

int run_subcommand(const CommonOptions& o, const std::vector<std::string>* checks) {
  Scenario s = load_scenario(o.scenario);
  ScenarioOverrides ov;
  ov.fd_step = o.h_step;
  ov.degree = o.degree;
  ov.seed = o.seed;
  apply_overrides(s, ov);

  std::cout << "# scenario " << s.id << " (config " << config_hash(s) << ")\n";
  for (const auto& [k, v] : s.echo()) std::cout << "#   " << k << " = " << v << "\n";

  ReportWriter writer(o.out, s.id, config_hash(s), o.format == "csv");
  RunOptions opts;
  opts.threads = o.threads;
  opts.on_record = [&](const CheckRecord& r) {
    writer.append(r);
    print_record(r);
  };
  const RunReport report = checks ? run_checks(s, *checks, opts) : run_scenario(s, opts);
  writer.finish(report);
  std::cout << "# report " << writer.jsonl_path() << " (hash " << report.report_hash() << "), exit "
            << report.exit_code() << "\n";
  return report.exit_code();
}

int run_suite(int threads, const std::vector<std::string>& only, const std::string& out) {
  const std::vector<AcceptanceResult> results = run_acceptance(threads, only);
  bool all = true;
  Json j = Json::array();
  for (const AcceptanceResult& r : results) {
    std::cout << r.line() << "\n";
    all = all && r.pass();
    j.push_back(Json{{"id", r.id},
                     {"title", r.title},
                     {"pass", r.pass()},
                     {"numeric_pass", r.numeric_pass},
                     {"seconds", r.seconds},
                     {"slowest_case", r.slowest_case},
                     {"time_limit", r.time_limit},
                     {"detail", r.detail}});
  }
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream f(std::filesystem::path(out) / "acceptance.json");
    f << Json{{"schema", kSchema}, {"tool_version", kToolVersion}, {"criteria", j}}.dump(2) << "\n";
  }
  return all ? 0 : 2;
}

int run_report(const std::vector<std::string>& inputs, const std::string& out, const std::string& format) {
  std::vector<RunReport> reports;
  for (const std::string& path : inputs) reports.push_back(read_jsonl(path));
  const RunReport merged = merge_reports(reports);
  std::filesystem::create_directories(out);
  const std::string base = (std::filesystem::path(out) / (merged.scenario + ".merged")).string();
  {
    std::ofstream f(base + ".jsonl");
    if (!f) throw std::filesystem::filesystem_error("cannot write", base + ".jsonl", std::make_error_code(std::errc::io_error));
    f << merged.jsonl();
  }
  {
    std::ofstream f(base + ".summary.json");
    f << merged.summary().dump(2) << "\n";
  }
  if (format == "csv") {
    std::ofstream f(base + ".csv");
    f << merged.csv();
  }
  std::cout << "merged " << merged.records.size() << " records (config " << merged.config_hash << ") into " << base
            << ".jsonl\n";
  return merged.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for curvature of weighted Bergman kernels"};
  app.require_subcommand(1);

  struct Sub {
    std::string name;
    std::string help;
    CommonOptions opts;
    CLI::App* app = nullptr;
  };
  std::vector<Sub> subs{{"certify-weight", "Certify the weight (eps0, C) and its pointwise algebra", {}},
                        {"bergman", "Bergman kernel infrastructure checks", {}},
                        {"curvature", "Curvature inequalities for B, log B and -log det G", {}},
                        {"hormander", "Orthogonality, dbar identity, Hormander bound, assembled chain", {}},
                        {"iterate", "Iterated Bergman construction and its bound ledger", {}},
                        {"run", "Run the checks listed in the scenario", {}}};
  for (Sub& s : subs) {
    s.app = app.add_subcommand(s.name, s.help);
    add_common(s.app, s.opts);
  }

  int suite_threads = 1;
  std::vector<std::string> suite_only;
  std::string suite_out;
  CLI::App* suite = app.add_subcommand("suite", "Run the acceptance battery A1-A12");
  suite->add_option("--threads", suite_threads, "Worker threads")->check(CLI::PositiveNumber);
  suite->add_option("--only", suite_only, "Criteria to run (e.g. A1 A6)")->delimiter(',');
  suite->add_option("--out", suite_out, "Directory for acceptance.json");

  std::vector<std::string> report_inputs;
  std::string report_out = "reports";
  std::string report_format = "json";
  CLI::App* report = app.add_subcommand("report", "Merge JSON-lines reports (refuses mismatched config hashes)");
  report->add_option("--input", report_inputs, "Report .jsonl files")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output directory");
  report->add_option("--format", report_format, "Extra output format")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const Sub& s : subs) {
      if (!s.app->parsed()) continue;
      if (s.name == "run") return run_subcommand(s.opts, nullptr);
      return run_subcommand(s.opts, &checks_for(s.name));
    }
    if (suite->parsed()) return run_suite(suite_threads, suite_only, suite_out);
    if (report->parsed()) return run_report(report_inputs, report_out, report_format);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
