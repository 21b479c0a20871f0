#include "bergman_lab/report.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

namespace bergman_lab {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

Json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json json_complex(cplx z) { return Json{{"re", json_number(z.real())}, {"im", json_number(z.imag())}}; }

Json json_matrix(const CMatrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(json_complex(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json json_vector(const CVector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(json_complex(v(i)));
  return out;
}

Json CheckRecord::to_json(const std::string& scenario, const std::string& config_hash, bool with_timing) const {
  Json j;
  j["schema"] = kSchema;
  j["scenario"] = scenario;
  j["config_hash"] = config_hash;
  j["check"] = check;
  j["verdict"] = verdict;
  if (!message.empty()) j["message"] = message;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["margin"] = margin ? json_number(*margin) : Json(nullptr);
  if (with_timing) j["seconds"] = seconds;
  return j;
}

CheckRecord CheckRecord::from_json(const Json& j) {
  CheckRecord r;
  r.check = j.at("check").get<std::string>();
  r.verdict = j.at("verdict").get<std::string>();
  if (j.contains("message")) r.message = j.at("message").get<std::string>();
  r.inputs = j.value("inputs", Json::object());
  r.outputs = j.value("outputs", Json::object());
  if (j.contains("margin") && j.at("margin").is_number()) r.margin = j.at("margin").get<double>();
  r.seconds = j.value("seconds", 0.0);
  return r;
}

int RunReport::exit_code() const {
  bool unconverged = false;
  for (const CheckRecord& r : records) {
    if (r.verdict == "fail" || r.verdict == "error") return 2;
    if (r.verdict == "unconverged") unconverged = true;
  }
  return unconverged ? 3 : 0;
}

std::string RunReport::report_hash() const {
  std::string all = config_hash + "\n";
  for (const CheckRecord& r : records) all += r.to_json(scenario, config_hash, false).dump() + "\n";
  return hex64(fnv1a64(all));
}

Json RunReport::summary() const {
  Json j;
  j["schema"] = schema;
  j["tool_version"] = tool_version;
  j["scenario"] = scenario;
  j["config_hash"] = config_hash;
  j["report_hash"] = report_hash();
  Json cfg = Json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  Json counts = {{"pass", 0}, {"fail", 0}, {"unconverged", 0}, {"error", 0}};
  Json checks = Json::array();
  for (const CheckRecord& r : records) {
    counts[r.verdict] = counts.value(r.verdict, 0) + 1;
    Json c = {{"check", r.check}, {"verdict", r.verdict}};
    c["margin"] = r.margin ? json_number(*r.margin) : Json(nullptr);
    c["seconds"] = r.seconds;
    checks.push_back(std::move(c));
  }
  j["verdicts"] = counts;
  j["checks"] = checks;
  j["exit_code"] = exit_code();
  return j;
}

std::string RunReport::jsonl() const {
  std::string out;
  for (const CheckRecord& r : records) out += r.to_json(scenario, config_hash).dump() + "\n";
  return out;
}

namespace {

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    out.emplace_back(prefix, os.str());
  } else if (j.is_boolean()) {
    out.emplace_back(prefix, j.get<bool>() ? "1" : "0");
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "-inf" || s == "nan") out.emplace_back(prefix, s);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

std::string RunReport::csv() const {
  std::string out = "scenario,config_hash,check,verdict,quantity,value\n";
  for (const CheckRecord& r : records) {
    std::vector<std::pair<std::string, std::string>> rows;
    if (r.margin) rows.emplace_back("margin", json_number(*r.margin).dump());
    flatten(r.outputs, "", rows);
    for (const auto& [q, v] : rows)
      out += csv_field(scenario) + "," + config_hash + "," + r.check + "," + r.verdict + "," + csv_field(q) + "," + v + "\n";
  }
  return out;
}

ReportWriter::ReportWriter(const std::string& dir, const std::string& scenario, const std::string& config_hash, bool csv)
    : dir_(dir), scenario_(scenario), config_hash_(config_hash), csv_(csv) {
  std::filesystem::create_directories(dir_);
  jsonl_path_ = (std::filesystem::path(dir_) / (scenario_ + ".jsonl")).string();
  out_.open(jsonl_path_, std::ios::trunc);
  if (!out_) throw std::filesystem::filesystem_error("cannot open report file", jsonl_path_, std::make_error_code(std::errc::io_error));
}

void ReportWriter::append(const CheckRecord& r) {
  out_ << r.to_json(scenario_, config_hash_).dump() << "\n";
  out_.flush();
}

void ReportWriter::finish(const RunReport& report) {
  out_.close();
  const std::filesystem::path dir(dir_);
  {
    std::ofstream s(dir / (scenario_ + ".summary.json"), std::ios::trunc);
    if (!s) throw std::filesystem::filesystem_error("cannot write summary", dir / (scenario_ + ".summary.json"),
                                                    std::make_error_code(std::errc::io_error));
    s << report.summary().dump(2) << "\n";
  }
  if (csv_) {
    std::ofstream c(dir / (scenario_ + ".csv"), std::ios::trunc);
    if (!c) throw std::filesystem::filesystem_error("cannot write CSV", dir / (scenario_ + ".csv"),
                                                    std::make_error_code(std::errc::io_error));
    c << report.csv();
  }
}

RunReport read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::filesystem::filesystem_error("cannot open report", path, std::make_error_code(std::errc::no_such_file_or_directory));
  RunReport r;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.value("schema", "") != kSchema)
      throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": unsupported schema");
    const std::string hash = j.value("config_hash", "");
    if (r.records.empty()) {
      r.config_hash = hash;
      r.scenario = j.value("scenario", "");
    } else if (hash != r.config_hash) {
      throw Error(ErrorKind::invalid_argument, path + ":" + std::to_string(lineno) + ": config hash " + hash +
                                                   " differs from " + r.config_hash);
    }
    r.records.push_back(CheckRecord::from_json(j));
  }
  return r;
}

RunReport merge_reports(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw Error(ErrorKind::invalid_argument, "nothing to merge");
  RunReport out = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].config_hash != out.config_hash)
      throw Error(ErrorKind::invalid_argument, "refusing to merge: config hash " + reports[i].config_hash + " (" +
                                                   reports[i].scenario + ") differs from " + out.config_hash + " (" +
                                                   out.scenario + ")");
    out.records.insert(out.records.end(), reports[i].records.begin(), reports[i].records.end());
  }
  return out;
}

}  // namespace bergman_lab
