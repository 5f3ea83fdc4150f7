#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sqsolve/sq_matrix.hpp"

namespace sqsolve::mm {

// Matrix Market text I/O for dense data.
//
// Reading accepts `matrix array` and `matrix coordinate` headers with field
// `real`, `double` or `integer` and symmetry `general`, `symmetric` or
// `skew-symmetric`. Coordinate entries are 1-based; unlisted entries are
// zero. Writing always produces `matrix array real general` with 17
// significant digits, which round-trips doubles exactly.

DenseMatrix read_matrix(std::istream& in);
DenseMatrix read_matrix(const std::filesystem::path& path);

/// Reads an n x 1 or 1 x n matrix as a vector.
DenseVector read_vector(std::istream& in);
DenseVector read_vector(const std::filesystem::path& path);

void write_matrix(std::ostream& out, const DenseMatrix& m, const std::string& comment = {});
void write_matrix(const std::filesystem::path& path, const DenseMatrix& m,
                  const std::string& comment = {});

void write_vector(std::ostream& out, const DenseVector& v, const std::string& comment = {});
void write_vector(const std::filesystem::path& path, const DenseVector& v,
                  const std::string& comment = {});

} // namespace sqsolve::mm
