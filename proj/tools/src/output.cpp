#include "output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

namespace entroute::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_atomic(const std::string& path, std::string_view content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw std::runtime_error("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw std::runtime_error("cannot rename onto '" + path + "': " + ec.message());
  }
}

CsvTable& CsvTable::cell(double v) {
  row_.push_back(format_double(v));
  return *this;
}

CsvTable& CsvTable::cell(long long v) {
  row_.push_back(std::to_string(v));
  return *this;
}

CsvTable& CsvTable::cell(std::string_view text) {
  row_.emplace_back(text);
  return *this;
}

CsvTable& CsvTable::empty() {
  row_.emplace_back();
  return *this;
}

void CsvTable::end_row() {
  if (row_.size() != header_.size()) throw std::logic_error("CSV row width does not match the header");
  for (std::size_t i = 0; i < row_.size(); ++i) {
    if (i) body_ += ',';
    body_ += row_[i];
  }
  body_ += '\n';
  row_.clear();
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  out += '\n';
  return out + body_;
}

nlohmann::json estimate_json(const RateEstimate& r) {
  return {{"mean", r.mean}, {"stderr", r.std_error}, {"trials", r.trials}};
}

}  // namespace entroute::cli
