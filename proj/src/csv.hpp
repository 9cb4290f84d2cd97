#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "apm/error.hpp"

namespace apm::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    fields.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

// Reads a headed CSV, checking the header matches `expected` exactly.
inline Table read(const std::filesystem::path& file, const std::vector<std::string>& expected) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + file.string());
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_line(line);
    if (!have_header) {
      if (fields != expected) {
        std::string want;
        for (const auto& f : expected) want += (want.empty() ? "" : ",") + f;
        throw Error(ErrorCode::MalformedCsv,
                    file.string() + ": expected header '" + want + "', got '" + line + "'");
      }
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != expected.size()) {
      throw Error(ErrorCode::MalformedCsv, file.string() + ":" + std::to_string(line_no) +
                                               ": expected " + std::to_string(expected.size()) +
                                               " fields");
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header && line_no > 0) {
    throw Error(ErrorCode::MalformedCsv, file.string() + ": missing header");
  }
  return table;
}

template <typename T>
T parse_number(const std::string& field, const std::filesystem::path& file, std::size_t line) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw Error(ErrorCode::MalformedCsv, file.string() + ":" + std::to_string(line) +
                                             ": not a number: '" + field + "'");
  }
  return value;
}

// Shortest representation that round-trips.
inline std::string format(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

inline std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  return out;
}

inline void close_out(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "error writing " + file.string());
}

}  // namespace apm::csv
