#include "sensel/csv_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "sensel/errors.hpp"

namespace sensel {

namespace {

std::string format_value(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<double> parse_csv_row(const std::string& line, std::size_t line_number) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(',', start);
    if (end == std::string::npos) end = line.size();
    const std::string field = line.substr(start, end - start);
    char* parse_end = nullptr;
    const double value = std::strtod(field.c_str(), &parse_end);
    if (parse_end == field.c_str() || *parse_end != '\0') {
      std::ostringstream msg;
      msg << "malformed CSV value '" << field << "' on line " << line_number;
      throw InvalidArgument(msg.str());
    }
    values.push_back(value);
    if (end == line.size()) break;
    start = end + 1;
  }
  return values;
}

}  // namespace

std::string matrix_to_csv(const Eigen::MatrixXd& matrix) {
  std::string text;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) text += ',';
      text += format_value(matrix(i, j));
    }
    text += '\n';
  }
  return text;
}

Eigen::MatrixXd matrix_from_csv_string(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(parse_csv_row(line, line_number));
    if (rows.back().size() != rows.front().size()) {
      std::ostringstream msg;
      msg << "CSV line " << line_number << " has " << rows.back().size()
          << " fields, expected " << rows.front().size();
      throw InvalidArgument(msg.str());
    }
  }
  if (rows.empty()) throw InvalidArgument("CSV contains no rows");
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      matrix(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return matrix;
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  return matrix_from_csv_string(read_text_file(path));
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix) {
  write_text_file(path, matrix_to_csv(matrix));
}

std::string selection_to_csv(const SelectionVector& z) {
  std::string text;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (i > 0) text += ',';
    text += format_value(z.entries()(i));
  }
  text += '\n';
  return text;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open file for writing: " + path);
  out << content;
  if (!out) throw InvalidArgument("failed writing file: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace sensel
