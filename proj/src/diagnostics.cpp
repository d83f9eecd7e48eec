#include "xdiff/diagnostics.hpp"

#include <cstdio>
#include <string>

namespace xdiff {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Sep>
void write_fields(std::ostream& os, const DiagnosticsRecord& r, Sep sep) {
  os << fmt(r.t) << sep << fmt(r.H) << sep << fmt(r.mass1) << sep << fmt(r.mass2) << sep
     << fmt(r.min_u1) << sep << fmt(r.min_u2) << sep << fmt(r.l2_to_average) << sep
     << fmt(r.hminus1_u1) << sep << fmt(r.hminus1_u2) << sep << r.newton_iters << sep
     << fmt(r.entropy_margin) << sep << r.clamp_events << '\n';
}

}  // namespace

void write_csv_header(std::ostream& os) {
  for (std::size_t k = 0; k < kDiagnosticsFields.size(); ++k) {
    if (k) os << ',';
    os << kDiagnosticsFields[k];
  }
  os << '\n';
}

void write_csv_row(std::ostream& os, const DiagnosticsRecord& row) { write_fields(os, row, ','); }

void write_csv(std::ostream& os, std::span<const DiagnosticsRecord> rows) {
  write_csv_header(os);
  for (const auto& r : rows) write_csv_row(os, r);
}

void write_gnuplot(std::ostream& os, std::span<const DiagnosticsRecord> rows) {
  os << '#';
  for (auto name : kDiagnosticsFields) os << ' ' << name;
  os << '\n';
  for (const auto& r : rows) write_fields(os, r, ' ');
}

}  // namespace xdiff
