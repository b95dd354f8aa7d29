#include "kinmax/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "kinmax/errors.hpp"

namespace kinmax {
namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

std::string json_string(const std::string& text) {
  std::string out = "\"";
  for (char ch : text) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out + '"';
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Table series_table(const std::vector<MonitorRecord>& series) {
  Table table{{"t", "S", "E", "F", "G", "A", "B"}, {}};
  table.rows.reserve(series.size());
  for (const auto& r : series) table.rows.push_back({r.t, r.S, r.E, r.F, r.G, r.A, r.B});
  return table;
}

void write_table(std::ostream& out, const Table& table, ReportFormat format) {
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw Error("write_table: row width differs from header");
  }
  if (format == ReportFormat::csv) {
    for (size_t i = 0; i < table.columns.size(); ++i) {
      out << (i ? "," : "") << csv_field(table.columns[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        out << (i ? "," : "") << (std::isfinite(row[i]) ? format_number(row[i]) : "");
      }
      out << '\n';
    }
    return;
  }
  for (const auto& row : table.rows) {
    out << '{';
    for (size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << json_string(table.columns[i]) << ':'
          << (std::isfinite(row[i]) ? format_number(row[i]) : "null");
    }
    out << "}\n";
  }
}

void emit_report(const Table& table, const std::string& path, ReportFormat format) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("emit_report: cannot open '" + path + "' for writing");
  write_table(file, table, format);
  file.flush();
  if (!file) throw Error("emit_report: write to '" + path + "' failed");
}

void emit_report(const std::vector<MonitorRecord>& series, const std::string& path, ReportFormat format) {
  emit_report(series_table(series), path, format);
}

void write_field_csv(std::ostream& out, const DistributionField& field) {
  const auto& grid = field.velocity;
  out << "# n=" << grid.n << " points_per_axis=" << grid.points_per_axis
      << " zeta_max=" << format_number(grid.zeta_max) << " spacing=" << format_number(grid.spacing())
      << " cells=" << field.space.cells() << '\n';
  out << "cell,x";
  for (int a = 0; a < grid.n; ++a) out << ",zeta_" << (a + 1);
  out << ",f\n";
  double left = 0.0;
  for (int c = 0; c < field.space.cells(); ++c) {
    const double x = left + 0.5 * field.space.widths(c);
    left += field.space.widths(c);
    for (int k = 0; k < grid.size(); ++k) {
      out << c << ',' << format_number(x);
      for (int a = 0; a < grid.n; ++a) out << ',' << format_number(grid.nodes(k, a));
      out << ',' << format_number(field.values(k, c)) << '\n';
    }
  }
}

}  // namespace kinmax
