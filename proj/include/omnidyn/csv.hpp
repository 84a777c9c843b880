#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <system_error>

namespace omnidyn {

/// Shortest decimal form that parses back to the same double; "inf", "-inf", "nan" otherwise.
inline std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& operator<<(double v) { return field(format_double(v)); }
  CsvWriter& operator<<(const std::string& s) { return field(s); }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& field(const std::string& s) {
    if (!first_) {
      out_ << ',';
    }
    out_ << s;
    first_ = false;
    return *this;
  }

  std::ostream& out_;
  bool first_{true};
};

}  // namespace omnidyn
