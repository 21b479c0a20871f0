#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bergman_lab/types.hpp"

namespace bergman_lab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "bergman-lab/1";
inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Finite numbers as numbers; inf and nan as strings so nothing is lost.
Json json_number(double v);
Json json_complex(cplx z);
Json json_matrix(const CMatrix& m);
Json json_vector(const CVector& v);

struct CheckRecord {
  std::string check;
  std::string verdict = "pass";  // pass | fail | unconverged | error
  std::string message;
  Json inputs = Json::object();
  Json outputs = Json::object();
  std::optional<double> margin;
  double seconds = 0.0;

  /// Record as one JSON object; timings are dropped when `with_timing` is false.
  Json to_json(const std::string& scenario, const std::string& config_hash, bool with_timing = true) const;
  static CheckRecord from_json(const Json& j);
};

struct RunReport {
  std::string schema = kSchema;
  std::string tool_version = kToolVersion;
  std::string scenario;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<CheckRecord> records;

  /// 0 when every record passes, 2 on any fail or error, else 3 on unconverged.
  int exit_code() const;
  /// Hash of all records with timings removed.
  std::string report_hash() const;
  Json summary() const;
  std::string jsonl() const;
  /// Long-format table: scenario, config_hash, check, verdict, quantity, value.
  std::string csv() const;
};

/// Appends records to <dir>/<scenario>.jsonl as they arrive (truncating the
/// file first) and writes the summary and optional CSV at the end.
class ReportWriter {
 public:
  ReportWriter(const std::string& dir, const std::string& scenario, const std::string& config_hash, bool csv);
  void append(const CheckRecord& r);
  void finish(const RunReport& report);
  const std::string& jsonl_path() const { return jsonl_path_; }

 private:
  std::string dir_;
  std::string scenario_;
  std::string config_hash_;
  bool csv_ = false;
  std::string jsonl_path_;
  std::ofstream out_;
};

/// Reads a JSON-lines report. Every line must share one config hash.
RunReport read_jsonl(const std::string& path);

/// Concatenates records; refuses reports whose config hashes differ.
RunReport merge_reports(const std::vector<RunReport>& reports);

}  // namespace bergman_lab
