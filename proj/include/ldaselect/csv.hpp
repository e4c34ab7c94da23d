#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ldaselect {

// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line);

// Reads a whole text file as lines, stripping one trailing '\r' per line.
std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

double parse_double_field(const std::string& field, const std::string& where);
long parse_long_field(const std::string& field, const std::string& where);

}  // namespace ldaselect
