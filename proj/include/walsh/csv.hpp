#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace walsh::csv {

/// 17 significant digits, '.' separator regardless of locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// RFC 4180 field quoting.
inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Row writer. Lines end in CRLF as RFC 4180 prescribes.
class Writer {
 public:
  Writer(std::ostream& out, const std::vector<std::string>& header) : out_(out) {
    for (const auto& h : header) field(h);
    end_row();
  }

  Writer& field(std::string_view s) {
    if (!first_) out_ << ',';
    out_ << quote(s);
    first_ = false;
    return *this;
  }
  Writer& field(double v) { return field(format_double(v)); }
  Writer& field(long long v) { return field(std::to_string(v)); }
  Writer& field(int v) { return field(static_cast<long long>(v)); }
  Writer& field(std::size_t v) { return field(std::to_string(v)); }

  void end_row() {
    out_ << "\r\n";
    first_ = true;
  }

 private:
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace walsh::csv
