#include "cli/report.hpp"

#include <cmath>
#include <cstdio>

namespace isden::cli {

std::string format_number(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

namespace {

std::string optional_field(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

void write_report_row(std::ostream& out, const ReportRow& row) {
  out << row.image << ',' << format_number(row.sigma) << ',' << row.seed << ','
      << optional_field(row.pass1_psnr) << ',' << optional_field(row.pass2_psnr) << ','
      << optional_field(row.sigma2) << ',' << format_number(row.mean_ess) << ','
      << format_number(row.fallback_rate, 6) << ',' << format_number(row.wall_ms, 1) << '\n';
}

}  // namespace isden::cli
