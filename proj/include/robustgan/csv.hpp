#ifndef ROBUSTGAN_CSV_HPP
#define ROBUSTGAN_CSV_HPP

#include <string>

#include "robustgan/matrix.hpp"

namespace robustgan {

// Numeric CSV, comma-separated, '.' decimal separator; a non-numeric first
// row is treated as a header and skipped. Throws InvalidData on ragged rows
// or unparsable/non-finite cells.
Matrix read_csv_matrix(const std::string& path);

void write_csv_matrix(const std::string& path, const Matrix& m);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace robustgan

#endif
