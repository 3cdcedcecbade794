#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hapc {

/// Comma-separated table with a header row. Cells are kept as text.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

  bool has_column(const std::string& name) const;
  std::size_t column_index(const std::string& name) const;
  /// Numeric column; throws ConfigError on a missing column or unparsable cell.
  std::vector<double> column(const std::string& name) const;

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable read_csv(const std::string& filename);
CsvTable parse_csv(std::istream& in, const std::string& origin = "<stream>");
void write_csv(const std::string& filename, const CsvTable& table);
void write_csv(std::ostream& out, const CsvTable& table);

/// Shortest decimal text that round-trips the double.
std::string format_number(double v);

}  // namespace hapc
