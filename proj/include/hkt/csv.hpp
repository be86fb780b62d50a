#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hkt::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by header name; throws FormatError naming the column.
  int column(const std::string& name, const std::string& file) const;
};

Table read(const std::filesystem::path& path);

// Locale-independent numeric parsing; context goes into the error message.
double parse_double(const std::string& text, const std::string& context);
int parse_int(const std::string& text, const std::string& context);

// Shortest round-trip formatting: reading the text back recovers the exact
// double, and output is byte-stable across runs.
std::string format_double(double x);

void write(const std::filesystem::path& path, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows);

}  // namespace hkt::csv
