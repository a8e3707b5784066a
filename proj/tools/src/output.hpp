#pragma once

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

#include "entroute/mc_engine.hpp"

namespace entroute::cli {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Writes to `path` through a sibling temp file and a rename, so readers never
/// see a partial file. "-" means stdout.
void write_atomic(const std::string& path, std::string_view content);

/// Row-oriented CSV with a fixed header; empty cells stand for "not computed".
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& cell(double v);
  CsvTable& cell(long long v);
  CsvTable& cell(std::string_view text);
  CsvTable& empty();
  void end_row();

  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> row_;
  std::string body_;
};

nlohmann::json estimate_json(const RateEstimate& r);

}  // namespace entroute::cli
