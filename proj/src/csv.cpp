#include "fracdecay/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fracdecay/error.hpp"

namespace fracdecay::csv {

const std::vector<double>& Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return columns.at(c);
  fail(ErrorKind::config_error, "CSV has no column '" + name + "'");
}

std::string format(const Table& table) {
  if (table.header.size() != table.columns.size()) fail(ErrorKind::io_error, "CSV header and column count differ");
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  char buf[40];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", table.columns[c].at(r));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Table parse(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::io_error, "CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  }
  table.columns.assign(table.header.size(), {});
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream rs(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(rs, cell, ',')) {
      if (c >= table.columns.size()) fail(ErrorKind::io_error, "too many fields on CSV line " + std::to_string(line_no));
      try {
        std::size_t used = 0;
        table.columns[c].push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        fail(ErrorKind::io_error, "non-numeric CSV field on line " + std::to_string(line_no));
      }
      ++c;
    }
    if (c != table.columns.size()) fail(ErrorKind::io_error, "too few fields on CSV line " + std::to_string(line_no));
  }
  return table;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io_error, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorKind::io_error, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::io_error, "cannot move output into place: " + path.string());
  }
}

}  // namespace fracdecay::csv
