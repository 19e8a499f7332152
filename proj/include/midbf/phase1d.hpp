// One-dimensional phase recovery from mod-1 observations: vector recovery
// by third-difference rounding with discontinuity detection, and ordered
// row/column recovery of a matrix over a block partition.
#pragma once

#include <functional>
#include <map>

#include "midbf/types.hpp"

namespace midbf::phase1d {

struct Recovered1D {
  VecXd v;       // recovered values, mod(v,1) == mod(u,1) entrywise
  IndexVec disc;  // 0-based block starts, disc[0] == 0, sorted ascending
};

// Recovers v with small third differences from u = mod(v,1). tau is the
// detection threshold; flag=1 skips re-anchoring entries 1..2 of the
// leading block (anchors already consistent from a previous pass).
// Inputs shorter than 4 are returned unchanged. Entries must lie in [0,1).
Recovered1D recover_vector_1d(const VecXd& u, double tau, int flag);

// In-place strided core used by the matrix driver; accepts general reals
// (partially recovered data), performs no range validation.
void recover_inplace(double* v, Index n, Index stride, double tau, int flag,
                     IndexVec* disc);

// Mod-1 access to an nrows x ncols phase matrix.
struct PhaseAccess1D {
  Index nrows = 0;
  Index ncols = 0;
  std::function<VecXd(Index)> row;  // length ncols, values in [0,1)
  std::function<VecXd(Index)> col;  // length nrows
};

// Recovered rows and columns of a phase matrix with the block partition
// discovered by the two probe recoveries.
struct RecoveredCross {
  IndexVec row_breaks;  // 0-based block starts along rows, begins with 0
  IndexVec col_breaks;
  IndexVec sampled_rows;  // requested rows plus row breaks, sorted unique
  IndexVec sampled_cols;
  std::map<Index, VecXd> rows;  // every materialized full row
  std::map<Index, VecXd> cols;
};

// Ordered recovery: probe column C[0] and row R[0] with threshold tau to
// find the block partition, then per block recover the first row, the
// first three columns, rows 2-3, all sampled rows, and all sampled
// columns, each with threshold 1. Rows and columns live in separate
// buffers; anchors are copied across so that intersection values agree.
RecoveredCross recover_matrix_1d(const PhaseAccess1D& A, const IndexVec& R,
                                 const IndexVec& C, double tau);

}  // namespace midbf::phase1d
