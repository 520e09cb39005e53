#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace rsos {

using Cell = std::variant<std::int64_t, double, bool, std::string>;

/// Column-ordered result table; every row has one cell per column.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

enum class ReportFormat { csv, jsonl };

std::string format_cell(const Cell& cell);
void write_csv(std::ostream& out, const Table& table);
void write_jsonl(std::ostream& out, const Table& table);

/// Writes `<stem>.csv` and/or `<stem>.jsonl`; returns the paths written.
/// An empty table is an error.
std::vector<std::filesystem::path> emit_report(const Table& table, const std::filesystem::path& stem,
                                               const std::vector<ReportFormat>& formats);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace rsos
