// Dense building blocks: pivoted QR, SVD-based pseudoinverse, randomized
// sampling-based SVD, and interpolative decompositions (column/row ID).
#pragma once

#include <functional>
#include <random>

#include "midbf/types.hpp"

namespace midbf::la {

// Column-pivoted Householder QR, A P = Q R with |diag(R)| non-increasing
// and non-negative. Pivot ties break to the lowest column index. Stops
// after max_rank steps when max_rank >= 0.
template <typename Scalar>
struct PivotedQR {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Q;  // m x r, orthonormal
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> R;  // r x n, upper trapezoidal
  IndexVec perm;                                            // column pivot order, size n
  Index rank = 0;                                           // factor steps actually taken
};

PivotedQR<double> pivoted_qr(const MatXd& A, Index max_rank = -1);
PivotedQR<Cplx> pivoted_qr(const MatXc& A, Index max_rank = -1);

// Thin orthonormal basis of the columns of A (unpivoted Householder QR).
MatXd thin_q(const MatXd& A);
MatXc thin_q(const MatXc& A);

// Moore-Penrose pseudoinverse through the SVD; singular values below
// rel_cutoff * sigma_max are treated as zero.
MatXd pinv(const MatXd& A, double rel_cutoff = 1e-12);
MatXc pinv(const MatXc& A, double rel_cutoff = 1e-12);

// Row/column evaluators for a matrix available only through sampling.
// row(i) returns a full row (length ncols), col(j) a full column (length nrows).
template <typename Scalar>
struct SampledMatrix {
  Index rows = 0;
  Index cols = 0;
  std::function<Eigen::Vector<Scalar, Eigen::Dynamic>(Index)> row;
  std::function<Eigen::Vector<Scalar, Eigen::Dynamic>(Index)> col;
};

template <typename Scalar>
struct RsvdResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> U;  // m x r
  VecXd S;                                                  // r singular values
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> V;  // n x r, A ~ U S V^H
  bool ill_conditioned = false;
  Index rows_evaluated = 0;
  Index cols_evaluated = 0;
};

// Randomized SVD from q*r sampled rows/cols R0, C0 (0-based index sets of
// equal size). Skeleton selection by pivoted QR of the sampled slabs, bases
// by thin QR, core by pseudoinverse projection, truncated to rank r.
RsvdResult<double> rsvd(const SampledMatrix<double>& A, const IndexVec& R0,
                        const IndexVec& C0, Index r, std::mt19937_64& rng);
RsvdResult<Cplx> rsvd(const SampledMatrix<Cplx>& A, const IndexVec& R0,
                      const IndexVec& C0, Index r, std::mt19937_64& rng);

// Rank control for interpolative decompositions: hard cap plus a relative
// tolerance on the pivoted-QR diagonal. eps <= 0 means fixed rank k_max.
struct RankSpec {
  Index k_max = 0;
  double eps = 0.0;
};

// Column ID of K computed from a block of sampled rows (s x n):
// K ~ K(:, skeleton) * V with V(:, skeleton) = I, V is k x n.
struct ColumnID {
  IndexVec skeleton;  // k column indices into the original matrix
  MatXc V;            // k x n interpolation matrix
  Index rank = 0;
};

ColumnID cid_from_rows(const MatXc& rows_block, const RankSpec& spec);

// Row ID of K computed from a block of sampled columns (m x s):
// K ~ W * K(skeleton, :) with W(skeleton, :) = I, W is m x k.
// Defined as the plain-transpose dual of cid_from_rows.
struct RowID {
  IndexVec skeleton;  // k row indices into the original matrix
  MatXc W;            // m x k interpolation matrix
  Index rank = 0;
};

RowID rid_from_cols(const MatXc& cols_block, const RankSpec& spec);

// Effective numerical rank used by both IDs: smallest k with
// |R(k,k)| <= eps * |R(0,0)|, after dropping a trailing numerically zero
// diagonal (<= 1e-14 relative). Exposed for testing.
Index id_rank(const VecXd& rdiag_abs, const RankSpec& spec);

// s grid rows closest to Chebyshev nodes on [min, max] of a 1-D point set;
// ties go to the lower index, duplicates are skipped in favor of the
// nearest unused point. Result is sorted and distinct.
IndexVec mock_chebyshev_rows(const VecXd& points, Index s);

// Multi-dimensional variant: tensor Chebyshev nodes on the bounding box,
// each snapped to the nearest unused point; topped up with random unused
// points when collisions leave fewer than s.
IndexVec mock_chebyshev_points(const MatXd& points, Index s,
                               std::mt19937_64& rng);

// Fisher-Yates draw of k distinct values from {0,...,n-1}.
IndexVec rand_subset(Index n, Index k, std::mt19937_64& rng);

}  // namespace midbf::la
