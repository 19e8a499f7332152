// Matrix and vector file I/O: numeric CSV and a raw little-endian float64
// container with a 16-byte header (8-byte magic, uint32 rows, uint32 cols).
// Complex data is stored as adjacent re,im pairs in both formats.
#pragma once

#include <string>

#include "midbf/types.hpp"

namespace midbf::io {

// Raw container magics: real payload vs complex pairs.
inline constexpr char kRawMagicReal[8] = {'M', 'B', 'F', 'R', 'A', 'W', '0', '1'};
inline constexpr char kRawMagicComplex[8] = {'M', 'B', 'F', 'R', 'A', 'W', 'C', '1'};

void write_csv(const std::string& path, const MatXd& A);
void write_csv(const std::string& path, const MatXc& A);  // re,im column pairs
MatXd read_csv_real(const std::string& path);
MatXc read_csv_complex(const std::string& path);

void write_raw(const std::string& path, const MatXd& A);
void write_raw(const std::string& path, const MatXc& A);
MatXd read_raw_real(const std::string& path);
MatXc read_raw_complex(const std::string& path);

// Reads a column vector from CSV or raw, deciding by the raw magic; a file
// with one row is transposed so both orientations load as a vector.
VecXc read_vector(const std::string& path);
void write_vector(const std::string& path, const VecXc& v, bool csv);

}  // namespace midbf::io
