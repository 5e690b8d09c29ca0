#pragma once

#include <Eigen/Dense>
#include <string>

#include "sensel/model.hpp"

namespace sensel {

/// Matrix CSV: one row of comma-separated decimals per sensor, no header,
/// 17 significant digits (exact round-trip).
std::string matrix_to_csv(const Eigen::MatrixXd& matrix);
Eigen::MatrixXd matrix_from_csv_string(const std::string& text);
Eigen::MatrixXd load_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix);

/// Selection vectors serialize as a single CSV row.
std::string selection_to_csv(const SelectionVector& z);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace sensel
