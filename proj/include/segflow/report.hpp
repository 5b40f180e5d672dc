#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace segflow::report {

enum class ColType { text, integer, real };

const char* col_type_name(ColType t);

struct Column {
  std::string name;
  ColType type = ColType::text;
  std::string unit;  // empty when dimensionless
};

// A real-typed cell holding NaN means "not available" and is emitted as an
// empty CSV field / JSON null.
using Cell = std::variant<std::string, int64_t, double>;
using Row = std::vector<Cell>;

struct Provenance {
  std::string operation;
  std::vector<std::pair<std::string, std::string>> parameters;  // insertion-ordered
  std::vector<std::string> input_digests;
};

struct ReportTable {
  std::string name;
  std::vector<Column> columns;
  std::vector<Row> rows;
  Provenance provenance;
};

// %.Ng rendering used for every real cell, so CSV and JSON agree byte-for-byte
// across runs.
std::string format_real(double v, int significant_digits = 6);

std::string csv_escape(const std::string& field);

// Splits one CSV record (RFC-style quoting). Used by golden tests and by the
// CLI when re-reading its own outputs.
std::vector<std::string> parse_csv_line(const std::string& line);

// Throws std::invalid_argument when a row does not conform to the schema or
// the provenance is empty.
void validate_table(const ReportTable& t);

std::string emit_csv(const ReportTable& t, int float_precision = 6);
std::string emit_json(const ReportTable& t, int float_precision = 6);

}  // namespace segflow::report
