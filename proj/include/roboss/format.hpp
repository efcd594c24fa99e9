#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "roboss/error.hpp"

namespace roboss {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

/// Hexadecimal floating-point text ("0x1.8p+1" style), exact.
inline std::string hex_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const bool neg = std::signbit(v);
  const auto res = std::to_chars(buf, buf + sizeof buf, neg ? -v : v, std::chars_format::hex);
  return (neg ? "-0x" : "0x") + std::string(buf, res.ptr);
}

inline double parse_hex_double(std::string_view text) {
  bool neg = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    neg = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError("malformed hex float '" + std::string(text) + "'");
  }
  return neg ? -v : v;
}

/// Parses a decimal number; accepts a leading '+'. Returns false on any
/// trailing garbage.
inline bool try_parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

/// Writes comma-separated rows. Numbers go through format_double.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) out_ << ',';
      out_ << names[i];
    }
    out_ << '\n';
    return *this;
  }

  CsvWriter& cell(std::string_view text) {
    sep();
    out_ << text;
    return *this;
  }
  CsvWriter& cell(double v) { return cell(std::string_view(format_double(v))); }
  CsvWriter& cell(int v) { return cell(std::string_view(std::to_string(v))); }
  CsvWriter& cell(std::size_t v) { return cell(std::string_view(std::to_string(v))); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }

  std::ostream& out_;
  bool first_ = true;
};

/// Splits on a single-character delimiter, keeping empty fields.
inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace roboss
