#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fracdecay::csv {

/// Column-major numeric table.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const std::vector<double>& column(const std::string& name) const;
};

/// Header line plus rows, 17 significant digits, '\n' line endings.
std::string format(const Table& table);
Table parse(const std::string& text);
Table read(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace fracdecay::csv
