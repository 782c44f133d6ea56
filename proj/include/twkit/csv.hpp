#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "twkit/table.hpp"

namespace twkit {

/// Reads a CSV whose header names the schema attributes in any order.
/// Empty fields and the token "NA" are missing. An optional `origin` column
/// is accepted and restored as row provenance.
///
/// Throws DataError naming row and column for undeclared codes, non-numeric
/// text in numeric columns, unknown or missing columns, and I/O failure.
Table load_csv(const std::filesystem::path& path, SchemaPtr schema);
Table parse_csv(std::istream& in, SchemaPtr schema, const std::string& source = "<stream>");

/// Writes the header and one line per row; missing cells are empty. Numbers
/// use the shortest representation that reads back to the same double.
void write_csv(const Table& table, std::ostream& out);
void save_csv(const Table& table, const std::filesystem::path& path);

std::string format_number(double value);

}  // namespace twkit
