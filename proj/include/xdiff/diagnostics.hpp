#pragma once

#include <array>
#include <ostream>
#include <span>
#include <string_view>

namespace xdiff {

/// One row of the per-probe time series.
struct DiagnosticsRecord {
  double t = 0.0;
  double H = 0.0;
  double mass1 = 0.0;
  double mass2 = 0.0;
  double min_u1 = 0.0;
  double min_u2 = 0.0;
  double l2_to_average = 0.0;
  double hminus1_u1 = 0.0;
  double hminus1_u2 = 0.0;
  int newton_iters = 0;
  double entropy_margin = 0.0;
  int clamp_events = 0;
};

/// Column names, in order. Bumping the schema means bumping kDiagnosticsSchemaVersion.
inline constexpr std::array<std::string_view, 12> kDiagnosticsFields{
    "t",          "H",          "mass1",        "mass2",          "min_u1",         "min_u2",
    "l2_to_average", "hminus1_u1", "hminus1_u2", "newton_iters", "entropy_margin", "clamp_events"};
inline constexpr int kDiagnosticsSchemaVersion = 1;

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const DiagnosticsRecord& row);
void write_csv(std::ostream& os, std::span<const DiagnosticsRecord> rows);
/// Whitespace-separated columns with a '#' header line, for gnuplot.
void write_gnuplot(std::ostream& os, std::span<const DiagnosticsRecord> rows);

}  // namespace xdiff
