#pragma once

// Matrix text format:
//
//   <N> <rows> <cols>
//   <re> <im>            (rows*cols lines, row-major)
//
// N is the truncation order of the model the matrix came from. Numbers use
// '.' as decimal point and 17 significant digits regardless of locale.

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace flagcd {

struct MatrixRecord {
  int truncation_order = 0;
  Eigen::MatrixXcd matrix;
};

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m, int truncation_order);
std::string format_matrix(const Eigen::MatrixXcd& m, int truncation_order);

/// Throws DomainError on malformed input.
MatrixRecord read_matrix(std::istream& in);
MatrixRecord parse_matrix(const std::string& text);

}  // namespace flagcd
