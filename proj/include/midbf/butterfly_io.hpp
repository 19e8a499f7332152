// Binary container for butterfly factorizations so they can be reused
// across runs.  Layout (all integers and floats little-endian):
//   8 bytes   magic "MIDBF001"
//   i64 x 5   nrows, ncols, L, h, n0
//   i64 x 2   rank cap, sampling oversize t
//   f64       adaptive tolerance eps
//   u64 x 2   seed, execution mode (0 serial, 1 parallel)
//   i64       factor count
//   i64 x nrows   row permutation
//   i64 x ncols   column permutation
//   per factor:
//     i64 x 4    rows, cols, block count, group count
//     per block: i64 x 4  row_off, col_off, M.rows, M.cols
//     per group: i64 x 2  begin, end
//   payload: per factor, per block, column-major f64 re,im pairs
#pragma once

#include <string>

#include "midbf/butterfly.hpp"

namespace midbf::bf {

void save_factorization(const std::string& path, const Factorization& F);

// Throws std::runtime_error on unknown magic, truncation, or inconsistent
// tables (offsets or counts that do not fit the declared shapes).
Factorization load_factorization(const std::string& path);

}  // namespace midbf::bf
