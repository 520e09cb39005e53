#include "core/report.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>
#include <openssl/evp.h>

#include "core/error.hpp"
#include "core/lattice.hpp"

namespace rsos {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    fail(ErrorCode::invalid_argument, "row has " + std::to_string(row.size()) + " cells, table has " +
                                          std::to_string(columns_.size()) + " columns");
  }
  rows_.push_back(std::move(row));
}

std::string format_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::string>) return v;
        else return std::to_string(v);
      },
      cell);
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.columns().size(); ++c) out << (c ? "," : "") << table.columns()[c];
  out << "\n";
  for (const auto& row : table.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
    out << "\n";
  }
}

void write_jsonl(std::ostream& out, const Table& table) {
  for (const auto& row : table.rows()) {
    out << "{";
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << nlohmann::json(table.columns()[c]).dump() << ":";
      if (std::holds_alternative<std::string>(row[c])) {
        out << nlohmann::json(std::get<std::string>(row[c])).dump();
      } else {
        out << format_cell(row[c]);
      }
    }
    out << "}\n";
  }
}

std::vector<std::filesystem::path> emit_report(const Table& table, const std::filesystem::path& stem,
                                               const std::vector<ReportFormat>& formats) {
  if (table.empty()) fail(ErrorCode::invalid_argument, "refusing to write an empty report to " + stem.string());
  std::vector<std::filesystem::path> written;
  for (ReportFormat f : formats) {
    auto path = stem;
    path += f == ReportFormat::csv ? ".csv" : ".jsonl";
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
    if (f == ReportFormat::csv) write_csv(out, table);
    else write_jsonl(out, table);
    out.close();
    if (!out) fail(ErrorCode::io, "failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[digest[i] >> 4];
    s += hex[digest[i] & 15];
  }
  return s;
}

}  // namespace rsos
