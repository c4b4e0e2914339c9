#pragma once

#include <optional>
#include <ostream>
#include <string>

namespace isden::cli {

// One row of the results table:
//   image,sigma,seed,pass1_psnr,pass2_psnr,sigma2,mean_ess,fallback_rate,wall_ms
// Missing values are written as empty fields.
struct ReportRow {
  std::string image;
  double sigma = 0.0;
  unsigned long long seed = 0;
  std::optional<double> pass1_psnr;
  std::optional<double> pass2_psnr;
  std::optional<double> sigma2;
  double mean_ess = 0.0;
  double fallback_rate = 0.0;
  double wall_ms = 0.0;
};

inline constexpr const char* kReportHeader =
    "image,sigma,seed,pass1_psnr,pass2_psnr,sigma2,mean_ess,fallback_rate,wall_ms";

void write_report_row(std::ostream& out, const ReportRow& row);

// Fixed-precision formatting shared by every table the tool writes.
std::string format_number(double v, int precision = 4);

}  // namespace isden::cli
