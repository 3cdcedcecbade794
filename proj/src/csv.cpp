#include "hapc/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hapc/types.hpp"

namespace hapc {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

}  // namespace

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header_)
    if (h == name) return true;
  return false;
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw ConfigError("missing column '" + name + "'");
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const std::string& cell = rows_[r][c];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw ConfigError("row " + std::to_string(r + 2) + ", column '" + name +
                        "': not a number: '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw ConfigError("row has " + std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(std::move(cells));
}

CsvTable parse_csv(std::istream& in, const std::string& origin) {
  std::string line;
  // Skip blank lines and '#' comments before the header.
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') break;
  }
  if (line.empty() || line[0] == '#') throw ConfigError(origin + ": missing header line");
  CsvTable table(split(line));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (cells.size() != table.header().size())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(table.header().size()) + " fields");
    table.add_row(std::move(cells));
  }
  return table;
}

CsvTable read_csv(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ConfigError("cannot open '" + filename + "'");
  return parse_csv(in, filename);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  auto write_line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  write_line(table.header());
  for (std::size_t r = 0; r < table.rows(); ++r) write_line(table.row(r));
}

void write_csv(const std::string& filename, const CsvTable& table) {
  std::ofstream out(filename);
  if (!out) throw ConfigError("cannot write '" + filename + "'");
  write_csv(out, table);
}

std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace hapc
