#include "twkit/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "twkit/error.hpp"

namespace twkit {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  s = s.substr(b, e - b);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      return out;
    }
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_number failed");
  return std::string(buf, ptr);
}

Table parse_csv(std::istream& in, SchemaPtr schema, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file, expected a header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // BOM

  const auto header = split_fields(line);
  std::vector<std::ptrdiff_t> column_of(header.size(), -1);
  std::ptrdiff_t origin_column = -1;
  std::vector<bool> seen(schema->size(), false);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "origin") {
      origin_column = static_cast<std::ptrdiff_t>(i);
      continue;
    }
    auto idx = schema->index_of(header[i]);
    if (!idx) throw DataError(source + ": unknown column '" + header[i] + "'");
    if (seen[*idx]) throw DataError(source + ": duplicate column '" + header[i] + "'");
    seen[*idx] = true;
    column_of[i] = static_cast<std::ptrdiff_t>(*idx);
  }
  for (std::size_t a = 0; a < schema->size(); ++a) {
    if (!seen[a]) throw DataError(source + ": missing column '" + schema->at(a).name + "'");
  }

  Table table(schema);
  if (origin_column >= 0) table.enable_origin();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = source + " row " + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    Row row(schema->size());
    Origin origin = Origin::real;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string& f = fields[i];
      if (static_cast<std::ptrdiff_t>(i) == origin_column) {
        origin = origin_from_string(f);
        continue;
      }
      const auto a = static_cast<std::size_t>(column_of[i]);
      const auto& spec = schema->at(a);
      if (is_missing_token(f)) continue;
      if (spec.is_categorical()) {
        auto level = spec.level_of(f);
        if (!level) {
          throw DataError(where + ", column '" + spec.name + "': undeclared code '" + f + "'");
        }
        row[a] = Cell::level(*level);
      } else {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
          throw DataError(where + ", column '" + spec.name + "': non-numeric value '" + f + "'");
        }
        row[a] = Cell::number(v);
      }
    }
    if (origin_column >= 0) {
      table.add_row(std::move(row), origin);
    } else {
      table.add_row(std::move(row));
    }
  }
  return table;
}

Table load_csv(const std::filesystem::path& path, SchemaPtr schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return parse_csv(in, std::move(schema), path.string());
}

void write_csv(const Table& table, std::ostream& out) {
  const auto& schema = table.schema();
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (a > 0) out << ',';
    out << schema.at(a).name;
  }
  if (table.has_origin()) out << ",origin";
  out << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& row = table.row(r);
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (a > 0) out << ',';
      const auto& cell = row[a];
      if (cell.is_missing()) continue;
      if (cell.is_level()) {
        out << schema.at(a).categories[cell.level()].token;
      } else {
        out << format_number(cell.number());
      }
    }
    if (table.has_origin()) out << ',' << to_string(table.origin(r));
    out << '\n';
  }
}

void save_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_csv(table, out);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace twkit
