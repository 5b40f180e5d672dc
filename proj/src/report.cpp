#include "segflow/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace segflow::report {

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string cell_to_csv(const Cell& c, int precision) {
  if (std::holds_alternative<std::string>(c)) return csv_escape(std::get<std::string>(c));
  if (std::holds_alternative<int64_t>(c)) return std::to_string(std::get<int64_t>(c));
  const double v = std::get<double>(c);
  if (std::isnan(v)) return "";
  return format_real(v, precision);
}

nlohmann::ordered_json cell_to_json(const Cell& c, int precision) {
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  if (std::holds_alternative<int64_t>(c)) return std::get<int64_t>(c);
  const double v = std::get<double>(c);
  if (std::isnan(v)) return nullptr;
  // round through the textual form so both emitters show the same value
  return std::stod(format_real(v, precision));
}

}  // namespace

const char* col_type_name(ColType t) {
  switch (t) {
    case ColType::text: return "text";
    case ColType::integer: return "integer";
    case ColType::real: return "real";
  }
  return "text";
}

std::string format_real(double v, int significant_digits) {
  if (significant_digits < 1) significant_digits = 1;
  if (significant_digits > 17) significant_digits = 17;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant_digits, v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (!needs_quoting(field)) return field;
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

void validate_table(const ReportTable& t) {
  if (t.name.empty()) throw std::invalid_argument("report table: empty name");
  if (t.columns.empty()) throw std::invalid_argument("report table: no columns");
  if (t.provenance.operation.empty())
    throw std::invalid_argument("report table '" + t.name + "': empty provenance");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const Row& row = t.rows[r];
    if (row.size() != t.columns.size())
      throw std::invalid_argument("report table '" + t.name + "': row " + std::to_string(r) +
                                  " has " + std::to_string(row.size()) + " cells, expected " +
                                  std::to_string(t.columns.size()));
    for (std::size_t c = 0; c < row.size(); ++c) {
      const ColType want = t.columns[c].type;
      const bool ok = (want == ColType::text && std::holds_alternative<std::string>(row[c])) ||
                      (want == ColType::integer && std::holds_alternative<int64_t>(row[c])) ||
                      (want == ColType::real && std::holds_alternative<double>(row[c]));
      if (!ok)
        throw std::invalid_argument("report table '" + t.name + "': row " + std::to_string(r) +
                                    " column '" + t.columns[c].name + "' type mismatch");
    }
  }
}

std::string emit_csv(const ReportTable& t, int float_precision) {
  validate_table(t);
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out.push_back(',');
    out += csv_escape(t.columns[c].name);
  }
  out.push_back('\n');
  for (const Row& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(',');
      out += cell_to_csv(row[c], float_precision);
    }
    out.push_back('\n');
  }
  return out;
}

std::string emit_json(const ReportTable& t, int float_precision) {
  validate_table(t);
  nlohmann::ordered_json j;
  j["name"] = t.name;
  j["columns"] = nlohmann::ordered_json::array();
  for (const Column& col : t.columns) {
    nlohmann::ordered_json jc;
    jc["name"] = col.name;
    jc["type"] = col_type_name(col.type);
    if (!col.unit.empty()) jc["unit"] = col.unit;
    j["columns"].push_back(jc);
  }
  j["rows"] = nlohmann::ordered_json::array();
  for (const Row& row : t.rows) {
    nlohmann::ordered_json jr = nlohmann::ordered_json::array();
    for (const Cell& c : row) jr.push_back(cell_to_json(c, float_precision));
    j["rows"].push_back(jr);
  }
  nlohmann::ordered_json jp;
  jp["operation"] = t.provenance.operation;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.provenance.parameters) params[k] = v;
  jp["parameters"] = params;
  jp["input_digests"] = t.provenance.input_digests;
  j["provenance"] = jp;
  return j.dump(2) + "\n";
}

}  // namespace segflow::report
