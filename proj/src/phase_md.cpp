#include "midbf/phase_md.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "midbf/linalg.hpp"

namespace midbf::phase {

double mod1(double x) {
  double m = x - std::floor(x);
  return m < 1.0 ? m : 0.0;  // guard against floor(x) rounding for tiny x<0
}

double phase_from_entry(Cplx k) {
  double t = std::arg(k) / (2.0 * std::numbers::pi);  // (-1/2, 1/2]
  return t < 0.0 ? t + 1.0 : t;
}

void recover_along_path(VecXd& v, double tau, const geo::RecoveryPath& P,
                        IndexVec* disc) {
  for (const auto& step : P.steps) {
    const Index bg = step[0], ed = step[1];
    v(ed) -= std::round(v(ed) - v(bg));
    if (disc && std::abs(v(ed) - v(bg)) >= tau) disc->push_back(ed);
  }
}

RecoveredMD recover_vector_md(const VecXd& u, double tau,
                              const geo::RecoveryPath& P) {
  RecoveredMD out;
  out.v = u;
  out.disc.push_back(P.root);
  recover_along_path(out.v, tau, P, &out.disc);
  return out;
}

namespace {

// Node -> block id map for one side of the partition.
IndexVec block_map(const std::vector<geo::RecoveryPath>& paths, Index n) {
  IndexVec of(n, -1);
  for (size_t b = 0; b < paths.size(); ++b) {
    of[paths[b].root] = static_cast<Index>(b);
    for (const auto& step : paths[b].steps) of[step[1]] = static_cast<Index>(b);
  }
  for (Index i = 0; i < n; ++i)
    if (of[i] < 0) throw std::logic_error("block partition misses a node");
  return of;
}

IndexVec sorted_unique(IndexVec v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

RecoveredMatrixMD::RecoveredMatrixMD(PhaseAccessorMD acc, const IndexVec& R,
                                     const IndexVec& C, geo::RecoveryPath P1,
                                     geo::RecoveryPath P2, double tau)
    : acc_(std::move(acc)), tau_(tau) {
  if (R.empty() || C.empty())
    throw std::invalid_argument("matrix recovery needs sampled rows and cols");
  if (static_cast<Index>(P1.steps.size()) + 1 != acc_.nrows ||
      static_cast<Index>(P2.steps.size()) + 1 != acc_.ncols)
    throw std::invalid_argument("recovery path does not span the matrix");

  // Probe the first column through the row-side path and the first row
  // through the column-side path to locate the discontinuities.
  part_.disc_rows = recover_vector_md(acc_.col(0), tau_, P1).disc;
  part_.disc_cols = recover_vector_md(acc_.row(0), tau_, P2).disc;
  part_.row_paths = geo::split_path(P1, part_.disc_rows);
  part_.col_paths = geo::split_path(P2, part_.disc_cols);
  part_.row_block_of = block_map(part_.row_paths, acc_.nrows);
  part_.col_block_of = block_map(part_.col_paths, acc_.ncols);

  IndexVec rows_wanted = R, cols_wanted = C;
  rows_wanted.insert(rows_wanted.end(), part_.disc_rows.begin(),
                     part_.disc_rows.end());
  cols_wanted.insert(cols_wanted.end(), part_.disc_cols.begin(),
                     part_.disc_cols.end());
  sampled_rows_ = sorted_unique(std::move(rows_wanted));
  sampled_cols_ = sorted_unique(std::move(cols_wanted));
  part_.rows_in_block.resize(part_.row_paths.size());
  part_.cols_in_block.resize(part_.col_paths.size());
  for (Index i : sampled_rows_)
    part_.rows_in_block[part_.row_block_of[i]].push_back(i);
  for (Index j : sampled_cols_)
    part_.cols_in_block[part_.col_block_of[j]].push_back(j);

  // Root lines first: each root row is recovered per column block anchored
  // at the raw value of the block corner (root row, root column); each root
  // column copies its corner from the root row before recovering, which
  // fixes one integer offset per block shared by everything inside it.
  const size_t ns = part_.row_paths.size(), nt = part_.col_paths.size();
  root_rows_.reserve(ns);
  for (size_t s = 0; s < ns; ++s) {
    VecXd v = acc_.row(part_.disc_rows[s]);
    for (size_t t = 0; t < nt; ++t)
      recover_along_path(v, 1.0, part_.col_paths[t], nullptr);
    root_rows_.push_back(std::move(v));
  }
  root_cols_.reserve(nt);
  for (size_t t = 0; t < nt; ++t) {
    VecXd v = acc_.col(part_.disc_cols[t]);
    for (size_t s = 0; s < ns; ++s) {
      v(part_.disc_rows[s]) = root_rows_[s](part_.disc_cols[t]);
      recover_along_path(v, 1.0, part_.row_paths[s], nullptr);
    }
    root_cols_.push_back(std::move(v));
  }
  for (size_t s = 0; s < ns; ++s) rows_[part_.disc_rows[s]] = root_rows_[s];
  for (size_t t = 0; t < nt; ++t) cols_[part_.disc_cols[t]] = root_cols_[t];

  for (Index i : sampled_rows_) row(i);
  for (Index j : sampled_cols_) col(j);
}

void RecoveredMatrixMD::recover_row_segments(VecXd& v, Index i) const {
  for (size_t t = 0; t < part_.col_paths.size(); ++t) {
    v(part_.disc_cols[t]) = root_cols_[t](i);
    recover_along_path(v, 1.0, part_.col_paths[t], nullptr);
  }
}

void RecoveredMatrixMD::recover_col_segments(VecXd& v, Index j) const {
  for (size_t s = 0; s < part_.row_paths.size(); ++s) {
    v(part_.disc_rows[s]) = root_rows_[s](j);
    recover_along_path(v, 1.0, part_.row_paths[s], nullptr);
  }
}

const VecXd& RecoveredMatrixMD::row(Index i) const {
  auto it = rows_.find(i);
  if (it != rows_.end()) return it->second;
  VecXd v = acc_.row(i);
  recover_row_segments(v, i);
  return rows_.emplace(i, std::move(v)).first->second;
}

const VecXd& RecoveredMatrixMD::col(Index j) const {
  auto it = cols_.find(j);
  if (it != cols_.end()) return it->second;
  VecXd v = acc_.col(j);
  recover_col_segments(v, j);
  return cols_.emplace(j, std::move(v)).first->second;
}

double escalate_tau(const PhaseAccessorMD& acc, const geo::RecoveryPath& P1,
                    const geo::RecoveryPath& P2, Index probe_row,
                    Index probe_col, Index cap, double tau0) {
  const VecXd probe_c = acc.col(probe_col);
  const VecXd probe_r = acc.row(probe_row);
  double tau = tau0;
  for (;;) {
    const Index found =
        static_cast<Index>(recover_vector_md(probe_c, tau, P1).disc.size() +
                           recover_vector_md(probe_r, tau, P2).disc.size()) -
        2;
    if (found <= cap || tau >= 0.5) return tau;
    tau = std::min(tau + 1.0 / 40.0, 0.5);
  }
}

namespace {

// Grows `v` to exactly `target` distinct indices in [0, n).
void pad_with_random(IndexVec& v, Index target, Index n, std::mt19937_64& rng) {
  std::set<Index> have(v.begin(), v.end());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  while (static_cast<Index>(v.size()) < target) {
    Index i = pick(rng);
    if (have.insert(i).second) v.push_back(i);
  }
}

}  // namespace

PhaseFactorization low_rank_phase_factorization(const PhaseAccessorMD& acc,
                                                Index r, Index q_oversample,
                                                double tau,
                                                const geo::RecoveryPath& P1,
                                                const geo::RecoveryPath& P2,
                                                std::mt19937_64& rng) {
  const Index n1 = acc.nrows, n2 = acc.ncols;
  const Index s = r * q_oversample;
  if (r < 1 || q_oversample < 1)
    throw std::invalid_argument("rank and oversampling must be positive");
  if (s > n1 || s > n2)
    throw std::invalid_argument("sample budget r*q exceeds the matrix size");

  IndexVec R = la::rand_subset(n1, s, rng);
  IndexVec C = la::rand_subset(n2, s, rng);
  RecoveredMatrixMD rec(acc, R, C, P1, P2, tau);

  // The sampling-based SVD consumes equal-sized row/col sets; detections
  // may have made them uneven.
  IndexVec R0 = rec.sampled_rows(), C0 = rec.sampled_cols();
  const Index target =
      std::min({std::max<Index>(R0.size(), C0.size()), n1, n2});
  pad_with_random(R0, target, n1, rng);
  pad_with_random(C0, target, n2, rng);
  if (static_cast<Index>(R0.size()) > target) R0.resize(target);
  if (static_cast<Index>(C0.size()) > target) C0.resize(target);

  la::SampledMatrix<double> A{n1, n2, [&rec](Index i) { return rec.row(i); },
                              [&rec](Index j) { return rec.col(j); }};
  la::RsvdResult<double> svd = la::rsvd(A, R0, C0, r, rng);

  PhaseFactorization out;
  out.phase.U = std::move(svd.U);
  out.phase.V = svd.V * svd.S.asDiagonal();
  out.n_disc_rows = rec.n_disc_rows();
  out.n_disc_cols = rec.n_disc_cols();
  out.rows_evaluated = svd.rows_evaluated;
  out.cols_evaluated = svd.cols_evaluated;
  out.tau = tau;
  return out;
}

}  // namespace midbf::phase
