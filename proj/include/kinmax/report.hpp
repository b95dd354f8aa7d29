#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kinmax/grid.hpp"
#include "kinmax/kinetics.hpp"

namespace kinmax {

enum class ReportFormat { csv, json };

/// Named numeric columns; every row has one value per column.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Columns t,S,E,F,G,A,B.
Table series_table(const std::vector<MonitorRecord>& series);

/// CSV: header line then one row per record, RFC-4180 quoting of names.
/// JSON: one object per row with keys in column order. Numbers use 17
/// significant digits; non-finite values become empty (CSV) or null (JSON).
void write_table(std::ostream& out, const Table& table, ReportFormat format);

/// write_table to path; Error naming the path on I/O failure.
void emit_report(const Table& table, const std::string& path, ReportFormat format);
void emit_report(const std::vector<MonitorRecord>& series, const std::string& path, ReportFormat format);

/// Snapshot CSV: a '#' header line with n, points_per_axis, zeta_max,
/// spacing and cells, then cell,x,zeta_1..zeta_n,f rows.
void write_field_csv(std::ostream& out, const DistributionField& field);

std::string format_number(double value);

}  // namespace kinmax
