#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace tomo {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace csv {

/// Shortest decimal text that parses back to the same double.
inline std::string format(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw FormatError("cannot format number");
  return std::string(buf, end);
}

inline std::string format_fixed(double value, int precision) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, precision);
  if (ec != std::errc{}) throw FormatError("cannot format number");
  return std::string(buf, end);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view field, std::string_view what, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": invalid " + std::string(what) + " '" +
                      std::string(field) + "'");
  }
  return value;
}

/// Reads a headed CSV. Checks the header and the column count of every row.
/// `row(fields, line_no)` is invoked for each non-blank data row.
template <class RowFn>
void read(std::istream& in, std::string_view expected_header, RowFn&& row) {
  std::string line;
  std::size_t line_no = 0;
  const auto header_fields = split(expected_header);
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto fields = split(view);
    if (!have_header) {
      if (fields != header_fields) {
        throw FormatError("line " + std::to_string(line_no) + ": expected header '" +
                          std::string(expected_header) + "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != header_fields.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header_fields.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    row(fields, line_no);
  }
  if (!have_header) throw FormatError("missing header '" + std::string(expected_header) + "'");
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// FNV-1a 64 over a byte string. Used for ledger digests in reports.
inline std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace csv
}  // namespace tomo
