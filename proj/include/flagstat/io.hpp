#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "flagstat/matcore.hpp"

namespace flagstat {

/// Error reading or parsing an input file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses comma-separated rows into a matrix. Blank lines are ignored; every
/// row must have the same number of finite fields.
Matrix parse_csv_matrix(std::istream& in, bool skip_header = false);
Matrix read_csv_matrix(const std::string& path, bool skip_header = false);

/// printf "%.17g".
std::string format_double(double x);
void write_csv_matrix(std::ostream& out, const Matrix& m);

}  // namespace flagstat
