#pragma once

// Cross-validation tables: CSV with columns
//   lambda,gamma,rank_d,r,epsilon,errors,error_rate,total,cv_error,lambda_mode,status
// and a small SVG bar chart of error rates per (lambda, gamma) cell.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "currents/io.hpp"

namespace currents::report {

struct TableRow {
  double lambda = 0.0;
  std::string lambda_mode = "given";  // "given" or "auto"
  double gamma = 0.0;
  int rank_d = 0;
  int r = 0;
  double epsilon = 0.0;
  std::size_t errors = 0;
  std::size_t total = 0;
  std::string status = "ok";  // "ok" or "error: <message>"

  bool ok() const { return status == "ok"; }
};

/// "51.72%"
std::string format_percent(std::size_t errors, std::size_t total);
/// "30 (51.72%)"
std::string format_cv_error(std::size_t errors, std::size_t total);

std::string table_csv(const std::vector<TableRow>& rows, const io::Metadata& meta);
std::vector<TableRow> read_table_csv(const std::filesystem::path& path, io::Metadata* meta = nullptr);

std::string table_svg(const std::vector<TableRow>& rows, const std::string& title);

}  // namespace currents::report
