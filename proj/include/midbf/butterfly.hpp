// Interpolative-decomposition butterfly factorization of complementary
// low-rank kernel matrices. A kernel available through entry evaluation is
// compressed into a short product of block-sparse factors
//
//   K ~ U^L U^(L-1) ... U^h  S  V^h ... V^(L-1) V^L,   h = ceil(L/2),
//
// where L is the common depth of the row/column cluster trees. Each sweep
// performs one row ID per row unit and one column ID per column unit of
// every (row part, column part) pair, so construction touches O(N log N)
// kernel entries and the product applies to a vector in O(N log N) time.
#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "midbf/linalg.hpp"
#include "midbf/tree.hpp"
#include "midbf/types.hpp"

namespace midbf::bf {

// Entry evaluator over original (unpermuted) row/column indices.
using EntryFn = std::function<Cplx(Index, Index)>;

// One dense block of a block-sparse factor, placed at (row_off, col_off).
struct FactorBlock {
  Index row_off = 0;
  Index col_off = 0;
  MatXc M;
};

// Block-sparse factor. Blocks are grouped so that distinct groups touch
// disjoint row spans and disjoint column spans; groups may therefore be
// applied concurrently while the blocks inside one group accumulate in a
// fixed serial order (keeping parallel results bitwise equal to serial).
struct Factor {
  Index rows = 0;
  Index cols = 0;
  std::vector<FactorBlock> blocks;
  std::vector<std::pair<Index, Index>> groups;  // [begin, end) into blocks

  Index nnz() const;
};

struct Config {
  la::RankSpec rank{30, 1e-9};  // skeleton cap and adaptive ID tolerance
  Index t = 5;                  // sampling oversize: t * k_max probes per ID
  std::uint64_t seed = 0;       // stream for sampling draws
  Exec exec = Exec::Serial;     // Serial reference or OpenMP over groups
};

struct Factorization {
  Index nrows = 0;
  Index ncols = 0;
  int L = 0;      // common tree depth
  int h = 0;      // stop level of the recursion, ceil(L/2)
  Index n0 = 0;   // leaf capacity of the row tree
  Config cfg;
  IndexVec row_perm;  // Morton position -> original row index
  IndexVec col_perm;  // Morton position -> original column index
  std::vector<Factor> factors;  // [U^L..U^h, S, V^h..V^L] in product order

  Index factor_count() const { return static_cast<Index>(factors.size()); }
  Index total_nnz() const;
  Index max_factor_nnz() const;
  // Structural budget per factor, c * (k^2 / n0) * N with k = rank cap and
  // N = max(nrows, ncols); the library asserts c = 4 in its checks.
  double nnz_bound(double c = 4.0) const;
};

// Skeleton index sets of one compressed (row part, column part) pair. The
// middle matrix is never formed during compression; its only nonzero block
// for this pair is K(rows, cols) placed at (row_off, col_off).
struct SkeletonPair {
  IndexVec rows;  // global row indices kept by the row-side IDs
  IndexVec cols;  // global column indices kept by the column-side IDs
  Index row_off = 0;
  Index col_off = 0;
};

// One compression sweep, K ~ U * S * V with S described by skeleton sets.
// Both factor index spaces live in Morton order (position p of the outer
// dimension corresponds to original index perm[p] of its tree).
struct Sweep {
  Factor U;  // previous row space  x  middle row space
  Factor V;  // middle column space x  previous column space
  std::vector<SkeletonPair> pairs;
  Index mid_rows = 0;
  Index mid_cols = 0;
};

// Leaf-root complementary skeletonization: one row ID per row-tree leaf
// (columns sampled mock-Chebyshev over the whole column set), then one
// column ID per column-tree leaf (rows sampled from the stacked row
// skeletons). U carries one block per row leaf and V one per column leaf.
Sweep lrcs(const EntryFn& K, const tree::ClusterTree& tx,
           const tree::ClusterTree& tomega, const MatXd& X, const MatXd& Omega,
           const Config& cfg);

// Matrix splitting with complementary skeletonization: partitions both
// trees by their nodes at `level` (1 <= level <= L) and runs the leaf-wise
// skeletonization on every (row part a, column part b) pair. U concatenates
// column-part-major block-diagonal factors horizontally, V row-part-major
// ones vertically, so the middle block of pair (a, b) lands at row segment
// (b, a) and column segment (a, b).
Sweep mscs(const EntryFn& K, const tree::ClusterTree& tx,
           const tree::ClusterTree& tomega, const MatXd& X, const MatXd& Omega,
           int level, const Config& cfg);

// Full butterfly factorization: compression sweeps walk the split level
// from 1 to L - h + 1 while the unit level falls from L toward the middle,
// then the remaining middle blocks are materialized densely. Both trees
// must share depth L (build with min_depth to equalize); depth 0 returns
// the exact [I, K, I] product. Throws std::invalid_argument on mismatched
// tree depths/dimensions or point-set sizes.
Factorization idbf_factorize(const EntryFn& K, const tree::ClusterTree& tx,
                             const tree::ClusterTree& tomega, const MatXd& X,
                             const MatXd& Omega, const Config& cfg);

// g = F f and the plain-transpose product f = F^T g. Parallel execution
// splits over block groups and is bitwise identical to the serial path.
VecXc apply(const Factorization& F, const VecXc& f);
VecXc apply_transpose(const Factorization& F, const VecXc& g);
MatXc apply(const Factorization& F, const MatXc& fs);
MatXc apply_transpose(const Factorization& F, const MatXc& gs);

// Dense materializations for small-size verification. sweep_dense assembles
// the middle matrix from the skeleton pairs (evaluating K on them) and
// returns U * S * V, which approximates K(perm_rows, perm_cols) in the
// Morton orders of the trees the sweep was built from. dense() returns the
// approximation in original index order.
MatXc factor_dense(const Factor& F);
MatXc sweep_dense(const Sweep& W, const EntryFn& K);
MatXc dense(const Factorization& F);

}  // namespace midbf::bf
