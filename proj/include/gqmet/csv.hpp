#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gqmet {

// Shortest decimal that round-trips to the same double; "nan"/"inf" for non-finite values.
std::string format_number(double v);

/// Comma-separated table. `comments` are emitted as "# ..." lines before the
/// header; readers skip them.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
  std::size_t column(const std::string& name) const;  // throws if absent
  double number(std::size_t row, std::size_t col) const;
};

std::string to_csv(const Table& t);
Table parse_csv(const std::string& text);
Table read_csv(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace gqmet
