#pragma once

#include "psvd/core.hpp"

#include <iosfwd>
#include <string>

namespace psvd {

/// Reads a Matrix Market file into a dense matrix. Supports the real field
/// in coordinate and array format with general or symmetric structure;
/// coordinate indices are 1-based, duplicate coordinate entries are summed,
/// and symmetric files have their off-diagonal entries mirrored. Anything
/// else (complex, integer, pattern, skew-symmetric, hermitian) raises
/// parse_error, as does any malformed content — with the offending line
/// number where possible.
Matrix read_matrix_market(std::istream& in);
Matrix read_matrix_market(const std::string& path);

/// Writes a dense matrix in array/real/general format, column-major, with
/// 17 significant digits so a read-back reproduces every double exactly.
void write_matrix_market(std::ostream& out, const Matrix& a);
void write_matrix_market(const std::string& path, const Matrix& a);

}  // namespace psvd
