#include "midbf/phase1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace midbf::phase1d {

void recover_inplace(double* v, Index n, Index stride, double tau, int flag,
                     IndexVec* disc) {
  IndexVec D{0};
  auto at = [&](Index i) -> double& { return v[i * stride]; };
  if (n >= 4) {
    for (size_t c = 0; c < D.size(); ++c) {
      const Index st = D[c];
      if (!(flag == 1 && st == 0)) {
        if (st + 1 < n) at(st + 1) -= std::round(at(st + 1) - at(st));
        if (st + 2 < n)
          at(st + 2) -= std::round(at(st + 2) - 2.0 * at(st + 1) + at(st));
      }
      for (Index a = st + 3; a < n; ++a) {
        double d3 = at(a) - 3.0 * at(a - 1) + 3.0 * at(a - 2) - at(a - 3);
        at(a) -= std::round(d3);
        double res = at(a) - 3.0 * at(a - 1) + 3.0 * at(a - 2) - at(a - 3);
        if (std::abs(res) >= tau && a <= n - 4) {
          D.push_back(a);
          at(a) -= std::round(at(a) - at(a - 1));
          break;
        }
      }
    }
  }
  if (disc) *disc = std::move(D);
}

Recovered1D recover_vector_1d(const VecXd& u, double tau, int flag) {
  for (Index i = 0; i < u.size(); ++i)
    if (!(u(i) >= 0.0 && u(i) < 1.0))
      throw std::invalid_argument("recover_vector_1d: entries must lie in [0,1)");
  Recovered1D out;
  out.v = u;
  recover_inplace(out.v.data(), out.v.size(), 1, tau, flag, &out.disc);
  return out;
}

namespace {

IndexVec sorted_unique(IndexVec v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

RecoveredCross recover_matrix_1d(const PhaseAccess1D& A, const IndexVec& R,
                                 const IndexVec& C, double tau) {
  if (R.empty() || C.empty())
    throw std::invalid_argument("recover_matrix_1d: R and C must be nonempty");
  const Index N = A.nrows, M = A.ncols;
  RecoveredCross out;

  auto row_buf = [&](Index i) -> VecXd& {
    auto it = out.rows.find(i);
    if (it == out.rows.end()) it = out.rows.emplace(i, A.row(i)).first;
    return it->second;
  };
  auto col_buf = [&](Index j) -> VecXd& {
    auto it = out.cols.find(j);
    if (it == out.cols.end()) it = out.cols.emplace(j, A.col(j)).first;
    return it->second;
  };

  // Probes find the block partition.
  {
    VecXd& pc = col_buf(C[0]);
    recover_inplace(pc.data(), N, 1, tau, 0, &out.row_breaks);
    VecXd& pr = row_buf(R[0]);
    recover_inplace(pr.data(), M, 1, tau, 0, &out.col_breaks);
  }

  out.sampled_rows = R;
  out.sampled_rows.insert(out.sampled_rows.end(), out.row_breaks.begin(),
                          out.row_breaks.end());
  out.sampled_rows = sorted_unique(out.sampled_rows);
  out.sampled_cols = C;
  out.sampled_cols.insert(out.sampled_cols.end(), out.col_breaks.begin(),
                          out.col_breaks.end());
  out.sampled_cols = sorted_unique(out.sampled_cols);

  const IndexVec& Dr = out.row_breaks;
  const IndexVec& Dc = out.col_breaks;
  for (size_t s = 0; s < Dr.size(); ++s) {
    const Index r0 = Dr[s];
    const Index r1 = (s + 1 < Dr.size()) ? Dr[s + 1] : N;
    if (r1 <= r0) continue;  // empty block
    const Index h = r1 - r0;
    for (size_t t = 0; t < Dc.size(); ++t) {
      const Index c0 = Dc[t];
      const Index c1 = (t + 1 < Dc.size()) ? Dc[t + 1] : M;
      if (c1 <= c0) continue;
      const Index w = c1 - c0;

      // First row of the block anchors everything else.
      recover_inplace(row_buf(r0).data() + c0, w, 1, 1.0, 0, nullptr);
      // First three columns, anchored at the first row.
      for (Index a = 0; a < std::min<Index>(3, w); ++a) {
        VecXd& cb = col_buf(c0 + a);
        cb(r0) = row_buf(r0)(c0 + a);
        recover_inplace(cb.data() + r0, h, 1, 1.0, 0, nullptr);
      }
      // Rows 2-3, anchored at the first three columns.
      for (Index b = 1; b < std::min<Index>(3, h); ++b) {
        VecXd& rb = row_buf(r0 + b);
        for (Index a = 0; a < std::min<Index>(3, w); ++a)
          rb(c0 + a) = col_buf(c0 + a)(r0 + b);
        recover_inplace(rb.data() + c0, w, 1, 1.0, 1, nullptr);
      }
      // Remaining sampled rows, then remaining sampled columns.
      for (Index i : out.sampled_rows) {
        if (i < r0 + 3 || i >= r1) continue;
        VecXd& rb = row_buf(i);
        for (Index a = 0; a < std::min<Index>(3, w); ++a)
          rb(c0 + a) = col_buf(c0 + a)(i);
        recover_inplace(rb.data() + c0, w, 1, 1.0, 1, nullptr);
      }
      for (Index j : out.sampled_cols) {
        if (j < c0 + 3 || j >= c1) continue;
        VecXd& cb = col_buf(j);
        for (Index b = 0; b < std::min<Index>(3, h); ++b)
          cb(r0 + b) = row_buf(r0 + b)(j);
        recover_inplace(cb.data() + r0, h, 1, 1.0, 1, nullptr);
      }
    }
  }
  return out;
}

}  // namespace midbf::phase1d
