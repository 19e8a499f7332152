// Multidimensional phase recovery from mod-1 observations: vector recovery
// along a spanning-tree path with first-difference rounding, discontinuity
// detection with threshold escalation, blockwise matrix recovery keeping
// row/column intersections bitwise consistent, and compression of the
// recovered matrix into a low-rank factorization.
#pragma once

#include <functional>
#include <map>
#include <random>

#include "midbf/geometry.hpp"
#include "midbf/types.hpp"

namespace midbf::phase {

// x - floor(x), result in [0,1).
double mod1(double x);

// Phase of a unit-magnitude kernel entry as a fraction of a turn in [0,1).
double phase_from_entry(Cplx k);

// Mod-1 access to an nrows x ncols phase matrix.
struct PhaseAccessorMD {
  Index nrows = 0;
  Index ncols = 0;
  std::function<VecXd(Index)> row;  // length ncols, values in [0,1)
  std::function<VecXd(Index)> col;  // length nrows
};

struct RecoveredMD {
  VecXd v;        // mod(v,1) == u entrywise (within rounding)
  IndexVec disc;  // node ids of detected jumps; disc[0] == path root
};

// Anchors v(root) = u(root) and walks P rounding first differences:
// v(end) = u(end) - round(u(end) - v(begin)); the end node is flagged when
// |v(end) - v(begin)| >= tau.
RecoveredMD recover_vector_md(const VecXd& u, double tau,
                              const geo::RecoveryPath& P);

// In-place core: v holds the anchor at P.root and raw data elsewhere; only
// nodes on P are touched. disc may be null; the root is not appended.
void recover_along_path(VecXd& v, double tau, const geo::RecoveryPath& P,
                        IndexVec* disc);

// Partition of the matrix induced by the detected discontinuities: one
// block per detected node on each side, covering the node's subtree.
struct BlockPartitionMD {
  std::vector<geo::RecoveryPath> row_paths;  // root of block s = disc_rows[s]
  std::vector<geo::RecoveryPath> col_paths;
  IndexVec disc_rows;  // first entry = row path root
  IndexVec disc_cols;
  IndexVec row_block_of;  // size nrows
  IndexVec col_block_of;  // size ncols
  std::vector<IndexVec> rows_in_block;  // sampled rows per row block
  std::vector<IndexVec> cols_in_block;
};

// Blockwise recovery of sampled rows/columns plus on-demand recovery of any
// further row or column. Each block's recoveries are anchored at the raw
// value of its (row-root, col-root) corner and propagated through the root
// row/column, so the recovered matrix equals the true phase plus a single
// integer offset per block and every row/column intersection agrees
// bitwise when the accessor is entry-consistent.
class RecoveredMatrixMD {
 public:
  RecoveredMatrixMD(PhaseAccessorMD acc, const IndexVec& R, const IndexVec& C,
                    geo::RecoveryPath P1, geo::RecoveryPath P2, double tau);

  const VecXd& row(Index i) const;  // memoized; recovers on first use
  const VecXd& col(Index j) const;

  const BlockPartitionMD& partition() const { return part_; }
  const IndexVec& sampled_rows() const { return sampled_rows_; }
  const IndexVec& sampled_cols() const { return sampled_cols_; }
  Index n_disc_rows() const {
    return static_cast<Index>(part_.disc_rows.size()) - 1;
  }
  Index n_disc_cols() const {
    return static_cast<Index>(part_.disc_cols.size()) - 1;
  }

 private:
  void recover_row_segments(VecXd& v, Index i) const;
  void recover_col_segments(VecXd& v, Index j) const;

  PhaseAccessorMD acc_;
  double tau_ = 0.25;
  BlockPartitionMD part_;
  IndexVec sampled_rows_, sampled_cols_;  // requests + detected, sorted unique
  std::vector<VecXd> root_rows_, root_cols_;  // recovered block root lines
  mutable std::map<Index, VecXd> rows_, cols_;
};

// Re-probes one column (through P1) and one row (through P2), raising tau
// by 1/40 while the total detection count exceeds cap; stops at 1/2.
double escalate_tau(const PhaseAccessorMD& acc, const geo::RecoveryPath& P1,
                    const geo::RecoveryPath& P2, Index probe_row,
                    Index probe_col, Index cap = 32, double tau0 = 0.25);

// Rank-r factorization of the recovered phase: Psi(i,j) = U.row(i) dot
// V.row(j), with the singular values folded into V.
struct LowRankPhase {
  MatXd U;  // nrows x r
  MatXd V;  // ncols x r
};

struct PhaseFactorization {
  LowRankPhase phase;
  Index n_disc_rows = 0;
  Index n_disc_cols = 0;
  Index rows_evaluated = 0;
  Index cols_evaluated = 0;
  double tau = 0.25;
};

// Samples r*q rows and columns, recovers them over the recovery paths of
// the two point sets, and compresses the recovered matrix with the
// sampling-based SVD, evaluating further rows/columns on demand.
PhaseFactorization low_rank_phase_factorization(const PhaseAccessorMD& acc,
                                                Index r, Index q_oversample,
                                                double tau,
                                                const geo::RecoveryPath& P1,
                                                const geo::RecoveryPath& P2,
                                                std::mt19937_64& rng);

}  // namespace midbf::phase
