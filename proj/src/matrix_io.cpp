#include "flagcd/matrix_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "flagcd/errors.hpp"
#include "flagcd/format.hpp"

namespace flagcd {

namespace {

template <class T>
T parse_token(const std::string& token) {
  T value{};
  const auto* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) throw DomainError("malformed matrix token '" + token + "'");
  return value;
}

std::string next_token(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw DomainError("matrix text ended early");
  return token;
}

}  // namespace

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m, int truncation_order) {
  out << truncation_order << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << format_g17(m(i, j).real()) << ' ' << format_g17(m(i, j).imag()) << '\n';
}

std::string format_matrix(const Eigen::MatrixXcd& m, int truncation_order) {
  std::ostringstream os;
  write_matrix(os, m, truncation_order);
  return os.str();
}

MatrixRecord read_matrix(std::istream& in) {
  MatrixRecord rec;
  rec.truncation_order = parse_token<int>(next_token(in));
  const auto rows = parse_token<long>(next_token(in));
  const auto cols = parse_token<long>(next_token(in));
  if (rows < 0 || cols < 0) throw DomainError("negative matrix dimensions");
  rec.matrix.resize(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      const double re = parse_token<double>(next_token(in));
      const double im = parse_token<double>(next_token(in));
      rec.matrix(i, j) = {re, im};
    }
  std::string extra;
  if (in >> extra) throw DomainError("trailing data after matrix");
  return rec;
}

MatrixRecord parse_matrix(const std::string& text) {
  std::istringstream in(text);
  return read_matrix(in);
}

}  // namespace flagcd
