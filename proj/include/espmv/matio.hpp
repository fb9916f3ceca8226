#pragma once

#include <filesystem>
#include <iosfwd>

#include "espmv/matrix.hpp"

namespace espmv {

/// Reads the coordinate variant of Matrix Market:
///
///   %%MatrixMarket matrix coordinate {real|integer|pattern} {general|symmetric}
///
/// Indices become 0-based. `pattern` entries get value 1.0, `integer` values are
/// widened to double, and `symmetric` files are expanded so that every
/// off-diagonal (i, j) is also stored as (j, i). Anything else (array format,
/// complex, skew-symmetric, hermitian), out-of-range indices, duplicates and a
/// wrong entry count raise ParseError with the offending line.
CooMatrix parse_matrix_market(std::istream& in);

/// parse_matrix_market on a file; errors are prefixed with the path.
CooMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes `real general` coordinate format, 1-based, 17 significant digits,
/// so that parsing the output reproduces `m` bit for bit.
void write_matrix_market(const CooMatrix& m, std::ostream& out);
void write_matrix_market(const CooMatrix& m, const std::filesystem::path& path);

}  // namespace espmv
