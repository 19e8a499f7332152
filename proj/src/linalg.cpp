#include "midbf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace midbf::la {
namespace {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Vector<S, Eigen::Dynamic>;

double abs2(double x) { return x * x; }
double abs2(const Cplx& x) { return std::norm(x); }

// Householder QR with column pivoting. Pivot = largest remaining column
// norm, ties to the lowest current position. Diagonal of R is made real,
// non-negative by a unitary phase fix at the end.
template <typename S>
PivotedQR<S> pqr_impl(Mat<S> A, Index max_rank) {
  const Index m = A.rows(), n = A.cols();
  Index steps = std::min(m, n);
  if (max_rank >= 0) steps = std::min(steps, max_rank);

  PivotedQR<S> out;
  out.perm.resize(n);
  std::iota(out.perm.begin(), out.perm.end(), Index{0});

  VecXd norm2(n), orig2(n);
  for (Index j = 0; j < n; ++j) norm2[j] = orig2[j] = A.col(j).squaredNorm();

  std::vector<S> beta(steps, S(0));
  Index r = 0;
  for (Index k = 0; k < steps; ++k) {
    Index piv = k;
    for (Index j = k + 1; j < n; ++j)
      if (norm2[j] > norm2[piv]) piv = j;
    if (piv != k) {
      A.col(k).swap(A.col(piv));
      std::swap(out.perm[k], out.perm[piv]);
      std::swap(norm2[k], norm2[piv]);
      std::swap(orig2[k], orig2[piv]);
    }

    const Index len = m - k;
    double xnorm = A.col(k).tail(len).norm();
    if (xnorm == 0.0) break;  // remaining block is exactly zero

    S alpha = A(k, k);
    double aa = std::sqrt(abs2(alpha));
    S phase = (aa == 0.0) ? S(1) : S(alpha / aa);
    S v0 = alpha + phase * xnorm;
    // v = x + phase*||x||*e1, scaled so v(0) = 1; H = I - beta v v^H
    A.col(k).tail(len - 1) /= v0;
    double v2 = 1.0 + A.col(k).tail(len - 1).squaredNorm();
    beta[k] = S(2.0 / v2);
    A(k, k) = -phase * xnorm;

    if (k + 1 < n) {
      // len == 1 still reflects: H = 1 - beta = -1 on the last row.
      Vec<S> v(len);
      v(0) = S(1);
      v.tail(len - 1) = A.col(k).tail(len - 1);
      auto trail = A.block(k, k + 1, len, n - k - 1);
      Vec<S> w = trail.adjoint() * v;
      trail.noalias() -= (beta[k] * v) * w.adjoint();
    }

    for (Index j = k + 1; j < n; ++j) {
      norm2[j] -= abs2(A(k, j));
      if (norm2[j] < 0.0 || norm2[j] <= 1e-12 * orig2[j]) {
        norm2[j] = (m - k - 1 > 0) ? A.col(j).tail(m - k - 1).squaredNorm() : 0.0;
        orig2[j] = norm2[j];
      }
    }
    r = k + 1;
  }

  out.rank = r;
  out.R = Mat<S>::Zero(r, n);
  for (Index i = 0; i < r; ++i)
    for (Index j = i; j < n; ++j) out.R(i, j) = A(i, j);

  out.Q = Mat<S>::Identity(m, r);
  for (Index k = r - 1; k >= 0; --k) {
    const Index len = m - k;
    Vec<S> v(len);
    v(0) = S(1);
    if (len > 1) v.tail(len - 1) = A.col(k).tail(len - 1);
    auto blk = out.Q.block(k, k, len, r - k);
    Vec<S> w = blk.adjoint() * v;
    blk.noalias() -= (beta[k] * v) * w.adjoint();
  }

  for (Index k = 0; k < r; ++k) {
    double d = std::sqrt(abs2(out.R(k, k)));
    if (d == 0.0) continue;
    S ph = S(out.R(k, k) / d);
    out.R.row(k) *= S(1) / ph;
    out.Q.col(k) *= ph;
  }
  return out;
}

template <typename S>
Mat<S> thin_q_impl(const Mat<S>& A) {
  Eigen::HouseholderQR<Mat<S>> qr(A);
  Index r = std::min(A.rows(), A.cols());
  return qr.householderQ() * Mat<S>::Identity(A.rows(), r);
}

template <typename S>
Mat<S> pinv_impl(const Mat<S>& A, double rel_cutoff, double* cond_out) {
  Eigen::JacobiSVD<Mat<S>> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) {
    if (cond_out) *cond_out = std::numeric_limits<double>::infinity();
    return Mat<S>::Zero(A.cols(), A.rows());
  }
  if (cond_out)
    *cond_out = sv(0) / std::max(sv(sv.size() - 1),
                                 std::numeric_limits<double>::min());
  VecXd inv = VecXd::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_cutoff * sv(0)) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() *
         svd.matrixU().adjoint();
}

template <typename S>
RsvdResult<S> rsvd_impl(const SampledMatrix<S>& A, const IndexVec& R0,
                        const IndexVec& C0, Index r, std::mt19937_64& rng) {
  const Index m = A.rows, n = A.cols;
  const Index s = static_cast<Index>(R0.size());
  RsvdResult<S> out;

  std::unordered_map<Index, Vec<S>> row_cache, col_cache;
  auto get_row = [&](Index i) -> const Vec<S>& {
    auto it = row_cache.find(i);
    if (it == row_cache.end()) {
      ++out.rows_evaluated;
      it = row_cache.emplace(i, A.row(i)).first;
    }
    return it->second;
  };
  auto get_col = [&](Index j) -> const Vec<S>& {
    auto it = col_cache.find(j);
    if (it == col_cache.end()) {
      ++out.cols_evaluated;
      it = col_cache.emplace(j, A.col(j)).first;
    }
    return it->second;
  };

  // Skeleton columns from the sampled rows, skeleton rows from the
  // sampled columns (pivoted QR of the slab / its adjoint).
  Mat<S> rows_slab(s, n);
  for (Index i = 0; i < s; ++i) rows_slab.row(i) = get_row(R0[i]).transpose();
  PivotedQR<S> qr_c = pqr_impl<S>(rows_slab, s);
  Index sc = std::min<Index>(s, qr_c.rank);

  Mat<S> cols_slab(m, s);
  for (Index j = 0; j < s; ++j) cols_slab.col(j) = get_col(C0[j]);
  PivotedQR<S> qr_r = pqr_impl<S>(cols_slab.adjoint(), s);
  Index sr = std::min<Index>(s, qr_r.rank);

  // Numerically zero slabs: the factorization is empty.
  if (sc == 0 || sr == 0) {
    out.U = Mat<S>::Zero(m, 0);
    out.S = VecXd(0);
    out.V = Mat<S>::Zero(n, 0);
    return out;
  }

  IndexVec pc(qr_c.perm.begin(), qr_c.perm.begin() + sc);
  IndexVec pr(qr_r.perm.begin(), qr_r.perm.begin() + sr);

  Mat<S> col_skel(m, sc);
  for (Index j = 0; j < sc; ++j) col_skel.col(j) = get_col(pc[j]);
  Mat<S> Q_col = thin_q_impl<S>(col_skel);

  Mat<S> row_skel(sr, n);
  for (Index i = 0; i < sr; ++i) row_skel.row(i) = get_row(pr[i]).transpose();
  Mat<S> Q_row = thin_q_impl<S>(Mat<S>(row_skel.adjoint()));

  // Enlarged index sets: skeleton indices plus an equal number of random
  // ones (overlap permitted).
  IndexVec I = pr, J = pc;
  for (Index i : rand_subset(m, sr, rng)) I.push_back(i);
  for (Index j : rand_subset(n, sc, rng)) J.push_back(j);

  Mat<S> QcI(static_cast<Index>(I.size()), Q_col.cols());
  for (size_t i = 0; i < I.size(); ++i) QcI.row(static_cast<Index>(i)) = Q_col.row(I[i]);
  Mat<S> QrJ(static_cast<Index>(J.size()), Q_row.cols());
  for (size_t j = 0; j < J.size(); ++j) QrJ.row(static_cast<Index>(j)) = Q_row.row(J[j]);

  Mat<S> AIJ(static_cast<Index>(I.size()), static_cast<Index>(J.size()));
  for (size_t i = 0; i < I.size(); ++i) {
    const Vec<S>& row = get_row(I[i]);
    for (size_t j = 0; j < J.size(); ++j)
      AIJ(static_cast<Index>(i), static_cast<Index>(j)) = row(J[j]);
  }

  double cond_c = 0.0, cond_r = 0.0;
  Mat<S> M = pinv_impl<S>(QcI, 1e-12, &cond_c) * AIJ *
             pinv_impl<S>(Mat<S>(QrJ.adjoint()), 1e-12, &cond_r);
  out.ill_conditioned = !(cond_c < 1e8) || !(cond_r < 1e8);

  Eigen::JacobiSVD<Mat<S>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Index rr = std::min<Index>(r, svd.singularValues().size());
  out.U = Q_col * svd.matrixU().leftCols(rr);
  out.V = Q_row * svd.matrixV().leftCols(rr);
  out.S = svd.singularValues().head(rr);
  return out;
}

}  // namespace

PivotedQR<double> pivoted_qr(const MatXd& A, Index max_rank) {
  return pqr_impl<double>(A, max_rank);
}
PivotedQR<Cplx> pivoted_qr(const MatXc& A, Index max_rank) {
  return pqr_impl<Cplx>(A, max_rank);
}

MatXd thin_q(const MatXd& A) { return thin_q_impl<double>(A); }
MatXc thin_q(const MatXc& A) { return thin_q_impl<Cplx>(A); }

MatXd pinv(const MatXd& A, double rel_cutoff) {
  return pinv_impl<double>(A, rel_cutoff, nullptr);
}
MatXc pinv(const MatXc& A, double rel_cutoff) {
  return pinv_impl<Cplx>(A, rel_cutoff, nullptr);
}

RsvdResult<double> rsvd(const SampledMatrix<double>& A, const IndexVec& R0,
                        const IndexVec& C0, Index r, std::mt19937_64& rng) {
  return rsvd_impl<double>(A, R0, C0, r, rng);
}
RsvdResult<Cplx> rsvd(const SampledMatrix<Cplx>& A, const IndexVec& R0,
                      const IndexVec& C0, Index r, std::mt19937_64& rng) {
  return rsvd_impl<Cplx>(A, R0, C0, r, rng);
}

Index id_rank(const VecXd& rdiag_abs, const RankSpec& spec) {
  Index m = rdiag_abs.size();
  if (m == 0 || rdiag_abs(0) == 0.0) return 0;
  while (m > 0 && rdiag_abs(m - 1) <= 1e-14 * rdiag_abs(0)) --m;
  Index k = m;
  if (spec.eps > 0.0) {
    for (Index i = 0; i < m; ++i) {
      if (rdiag_abs(i) <= spec.eps * rdiag_abs(0)) {
        k = i + 1;
        break;
      }
    }
  }
  if (spec.k_max > 0) k = std::min(k, spec.k_max);
  return k;
}

ColumnID cid_from_rows(const MatXc& rows_block, const RankSpec& spec) {
  ColumnID out;
  const Index n = rows_block.cols();
  PivotedQR<Cplx> qr = pivoted_qr(rows_block);
  VecXd diag(qr.rank);
  for (Index i = 0; i < qr.rank; ++i) diag(i) = std::abs(qr.R(i, i));
  Index k = id_rank(diag, spec);
  out.rank = k;
  out.skeleton.assign(qr.perm.begin(), qr.perm.begin() + k);

  MatXc Vp(k, n);
  Vp.leftCols(k) = MatXc::Identity(k, k);
  if (n > k) {
    auto R1 = qr.R.topLeftCorner(k, k);
    Vp.rightCols(n - k) =
        R1.template triangularView<Eigen::Upper>().solve(qr.R.topRightCorner(k, n - k));
  }
  out.V.resize(k, n);
  for (Index j = 0; j < n; ++j) out.V.col(qr.perm[j]) = Vp.col(j);
  return out;
}

RowID rid_from_cols(const MatXc& cols_block, const RankSpec& spec) {
  ColumnID cid = cid_from_rows(cols_block.transpose(), spec);
  RowID out;
  out.skeleton = std::move(cid.skeleton);
  out.W = cid.V.transpose();
  out.rank = cid.rank;
  return out;
}

IndexVec mock_chebyshev_rows(const VecXd& points, Index s) {
  const Index n = points.size();
  if (s >= n) {
    IndexVec all(n);
    std::iota(all.begin(), all.end(), Index{0});
    return all;
  }
  const double lo = points.minCoeff(), hi = points.maxCoeff();
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  std::vector<char> used(n, 0);
  IndexVec picked;
  picked.reserve(s);
  constexpr double kPi = 3.14159265358979323846;
  for (Index j = 0; j < s; ++j) {
    double node = mid + half * std::cos((2.0 * j + 1.0) * kPi / (2.0 * s));
    Index best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (used[i]) continue;
      double d = std::abs(points(i) - node);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    used[best] = 1;
    picked.push_back(best);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

IndexVec mock_chebyshev_points(const MatXd& points, Index s,
                               std::mt19937_64& rng) {
  const Index n = points.rows(), d = points.cols();
  if (s >= n) {
    IndexVec all(n);
    std::iota(all.begin(), all.end(), Index{0});
    return all;
  }
  Index c = 1;
  while (std::pow(static_cast<double>(c + 1), static_cast<double>(d)) <=
         static_cast<double>(s))
    ++c;  // largest c with c^d <= s
  VecXd lo(d), hi(d);
  for (Index k = 0; k < d; ++k) {
    lo(k) = points.col(k).minCoeff();
    hi(k) = points.col(k).maxCoeff();
  }
  constexpr double kPi = 3.14159265358979323846;
  Index total = 1;
  for (Index k = 0; k < d; ++k) total *= c;

  std::vector<char> used(n, 0);
  IndexVec picked;
  picked.reserve(s);
  VecXd node(d);
  for (Index t = 0; t < total; ++t) {
    Index rem = t;
    for (Index k = d - 1; k >= 0; --k) {
      Index j = rem % c;
      rem /= c;
      double mid = 0.5 * (lo(k) + hi(k)), half = 0.5 * (hi(k) - lo(k));
      node(k) = mid + half * std::cos((2.0 * j + 1.0) * kPi / (2.0 * c));
    }
    Index best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (used[i]) continue;
      double dist = (points.row(i).transpose() - node).squaredNorm();
      if (dist < bd) {
        bd = dist;
        best = i;
      }
    }
    used[best] = 1;
    picked.push_back(best);
  }
  // Random top-up to exactly s samples.
  IndexVec unused;
  for (Index i = 0; i < n; ++i)
    if (!used[i]) unused.push_back(i);
  while (static_cast<Index>(picked.size()) < s && !unused.empty()) {
    std::uniform_int_distribution<size_t> dist(0, unused.size() - 1);
    size_t pos = dist(rng);
    picked.push_back(unused[pos]);
    unused[pos] = unused.back();
    unused.pop_back();
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

IndexVec rand_subset(Index n, Index k, std::mt19937_64& rng) {
  k = std::min(k, n);
  IndexVec pool(n);
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> dist(i, n - 1);
    std::swap(pool[i], pool[dist(rng)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace midbf::la
