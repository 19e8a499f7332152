#include <doctest.h>

#include <random>

#include "midbf/linalg.hpp"

using namespace midbf;
using namespace midbf::la;

namespace {

MatXc random_rank_k(Index m, Index n, Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatXc A(m, k), B(k, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < k; ++j) A(i, j) = Cplx(g(rng), g(rng));
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < n; ++j) B(i, j) = Cplx(g(rng), g(rng));
  return A * B;
}

SampledMatrix<double> dense_sampler(const MatXd& A, Index* = nullptr) {
  SampledMatrix<double> s;
  s.rows = A.rows();
  s.cols = A.cols();
  s.row = [&A](Index i) -> VecXd { return A.row(i).transpose(); };
  s.col = [&A](Index j) -> VecXd { return A.col(j); };
  return s;
}

}  // namespace

TEST_CASE("pivoted QR reconstructs and orders the diagonal") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  MatXd A(40, 25);
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = g(rng);

  auto f = pivoted_qr(A);
  CHECK(f.rank == 25);
  MatXd AP(A.rows(), A.cols());
  for (Index j = 0; j < A.cols(); ++j) AP.col(j) = A.col(f.perm[j]);
  CHECK((AP - f.Q * f.R).norm() <= 1e-12 * A.norm());
  CHECK((f.Q.adjoint() * f.Q - MatXd::Identity(25, 25)).norm() <= 1e-12);
  for (Index i = 0; i < f.rank; ++i) {
    CHECK(f.R(i, i) >= 0.0);
    if (i > 0) CHECK(f.R(i, i) <= f.R(i - 1, i - 1) + 1e-10 * f.R(0, 0));
  }
  // Leading diagonal entry equals the largest column norm.
  double maxn = 0;
  for (Index j = 0; j < A.cols(); ++j) maxn = std::max(maxn, A.col(j).norm());
  CHECK(f.R(0, 0) == doctest::Approx(maxn).epsilon(1e-12));
}

TEST_CASE("pivoted QR picks descending diagonal of a diagonal matrix") {
  MatXd A = MatXd::Zero(5, 5);
  VecXd d(5);
  d << 3.0, 7.0, 1.0, 5.0, 2.0;
  for (Index i = 0; i < 5; ++i) A(i, i) = d(i);
  auto f = pivoted_qr(A);
  IndexVec want{1, 3, 0, 4, 2};
  CHECK(f.perm == want);
}

TEST_CASE("pivoted QR ties break to the lowest index") {
  MatXd A = MatXd::Identity(3, 3);
  auto f = pivoted_qr(A);
  IndexVec want{0, 1, 2};
  CHECK(f.perm == want);
}

TEST_CASE("pivoted QR respects max_rank and stops on zero blocks") {
  std::mt19937_64 rng(12);
  MatXc K = random_rank_k(30, 20, 4, rng);
  auto f = pivoted_qr(K, 3);
  CHECK(f.rank == 3);
  CHECK(f.Q.cols() == 3);
  auto g = pivoted_qr(K);  // rank-4 input: diagonal collapses after 4 steps
  for (Index i = 4; i < g.rank; ++i)
    CHECK(std::abs(g.R(i, i)) <= 1e-10 * std::abs(g.R(0, 0)));
}

TEST_CASE("complex pivoted QR reconstructs with real non-negative diagonal") {
  std::mt19937_64 rng(13);
  MatXc A = random_rank_k(20, 15, 15, rng);
  auto f = pivoted_qr(A);
  MatXc AP(A.rows(), A.cols());
  for (Index j = 0; j < A.cols(); ++j) AP.col(j) = A.col(f.perm[j]);
  CHECK((AP - f.Q * f.R).norm() <= 1e-11 * A.norm());
  for (Index i = 0; i < f.rank; ++i) {
    CHECK(f.R(i, i).imag() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(f.R(i, i).real() >= 0.0);
  }
}

TEST_CASE("thin_q spans the input columns") {
  std::mt19937_64 rng(14);
  MatXc A = random_rank_k(25, 8, 8, rng);
  MatXc Q = thin_q(A);
  CHECK(Q.cols() == 8);
  CHECK((Q.adjoint() * Q - MatXc::Identity(8, 8)).norm() <= 1e-12);
  CHECK((Q * (Q.adjoint() * A) - A).norm() <= 1e-11 * A.norm());
}

TEST_CASE("pinv satisfies the Moore-Penrose identities") {
  std::mt19937_64 rng(15);
  MatXc A = random_rank_k(12, 9, 4, rng);
  MatXc P = pinv(A);
  CHECK((A * P * A - A).norm() <= 1e-10 * A.norm());
  CHECK((P * A * P - P).norm() <= 1e-10 * P.norm());
  CHECK(((A * P).adjoint() - A * P).norm() <= 1e-10);
  CHECK(((P * A).adjoint() - P * A).norm() <= 1e-10);
}

TEST_CASE("rsvd of the all-ones matrix finds the exact top singular value") {
  MatXd A = MatXd::Ones(64, 64);
  auto s = dense_sampler(A);
  std::mt19937_64 rng(7);
  IndexVec R0 = rand_subset(64, 1, rng);
  IndexVec C0 = rand_subset(64, 1, rng);
  auto f = rsvd(s, R0, C0, 1, rng);
  REQUIRE(f.S.size() == 1);
  CHECK(f.S(0) == doctest::Approx(64.0).epsilon(1e-12));
  MatXd rec = f.U * f.S.asDiagonal() * f.V.transpose();
  CHECK((rec - A).norm() <= 1e-10 * A.norm());
}

TEST_CASE("rsvd recovers an exact low-rank matrix from few samples") {
  const Index m = 60, n = 50, r = 3, q = 2;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  MatXd A = MatXd::Zero(m, n);
  for (Index t = 0; t < r; ++t) {
    VecXd u(m), v(n);
    for (Index i = 0; i < m; ++i) u(i) = g(rng);
    for (Index j = 0; j < n; ++j) v(j) = g(rng);
    A += u * v.transpose();
  }
  auto s = dense_sampler(A);
  const Index ss = q * r;
  IndexVec R0 = rand_subset(m, ss, rng);
  IndexVec C0 = rand_subset(n, ss, rng);
  auto f = rsvd(s, R0, C0, r, rng);
  MatXd rec = f.U * f.S.asDiagonal() * f.V.transpose();
  CHECK((rec - A).norm() <= 1e-9 * A.norm());
  CHECK(!f.ill_conditioned);
  // Sampling complexity: a bounded multiple of the oversampled rank.
  CHECK(f.rows_evaluated <= 3 * ss);
  CHECK(f.cols_evaluated <= 2 * ss);
}

TEST_CASE("rsvd handles complex matrices with the U S V^H convention") {
  const Index m = 40, n = 45, r = 5, q = 2;
  std::mt19937_64 rng(22);
  MatXc A = random_rank_k(m, n, r, rng);
  SampledMatrix<Cplx> s;
  s.rows = m;
  s.cols = n;
  s.row = [&A](Index i) -> VecXc { return A.row(i).transpose(); };
  s.col = [&A](Index j) -> VecXc { return A.col(j); };
  IndexVec R0 = rand_subset(m, q * r, rng);
  IndexVec C0 = rand_subset(n, q * r, rng);
  auto f = rsvd(s, R0, C0, r, rng);
  MatXc rec = f.U * f.S.asDiagonal() * f.V.adjoint();
  CHECK((rec - A).norm() <= 1e-9 * A.norm());
}

TEST_CASE("id_rank follows the relative-diagonal rule with a zero guard") {
  VecXd d(5);
  d << 1.0, 1e-2, 1e-4, 1e-9, 1e-16;
  CHECK(id_rank(d, {10, 1e-3}) == 3);   // first entry at/below eps is kept
  CHECK(id_rank(d, {2, 1e-3}) == 2);    // hard cap wins
  CHECK(id_rank(d, {10, 0.0}) == 4);    // fixed rank, trailing zero dropped
  CHECK(id_rank(d, {3, 0.0}) == 3);
  VecXd z = VecXd::Zero(4);
  CHECK(id_rank(z, {4, 0.0}) == 0);
}

TEST_CASE("column ID interpolates exactly on rank-deficient input") {
  std::mt19937_64 rng(31);
  const Index m = 80, n = 40, k = 6;
  MatXc K = random_rank_k(m, n, k, rng);
  IndexVec rows = rand_subset(m, 3 * k, rng);
  MatXc slab(static_cast<Index>(rows.size()), n);
  for (size_t i = 0; i < rows.size(); ++i)
    slab.row(static_cast<Index>(i)) = K.row(rows[i]);
  ColumnID id = cid_from_rows(slab, {k, 0.0});
  REQUIRE(id.rank == k);
  REQUIRE(static_cast<Index>(id.skeleton.size()) == k);
  // V restricted to the skeleton columns is the identity.
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) {
      Cplx want = (a == b) ? Cplx(1, 0) : Cplx(0, 0);
      CHECK(std::abs(id.V(a, id.skeleton[b]) - want) <= 1e-12);
    }
  MatXc skel(m, k);
  for (Index j = 0; j < k; ++j) skel.col(j) = K.col(id.skeleton[j]);
  CHECK((skel * id.V - K).norm() <= 1e-9 * K.norm());
}

TEST_CASE("row ID is the transpose dual of the column ID") {
  std::mt19937_64 rng(32);
  const Index m = 50, n = 70, k = 5;
  MatXc K = random_rank_k(m, n, k, rng);
  IndexVec cols = rand_subset(n, 3 * k, rng);
  MatXc slab(m, static_cast<Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j)
    slab.col(static_cast<Index>(j)) = K.col(cols[j]);
  RowID id = rid_from_cols(slab, {k, 0.0});
  REQUIRE(id.rank == k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) {
      Cplx want = (a == b) ? Cplx(1, 0) : Cplx(0, 0);
      CHECK(std::abs(id.W(id.skeleton[a], b) - want) <= 1e-12);
    }
  MatXc skel(k, n);
  for (Index i = 0; i < k; ++i) skel.row(i) = K.row(id.skeleton[i]);
  CHECK((id.W * skel - K).norm() <= 1e-9 * K.norm());

  ColumnID dual = cid_from_rows(slab.transpose(), {k, 0.0});
  CHECK(dual.skeleton == id.skeleton);
  CHECK((dual.V.transpose() - id.W).norm() <= 1e-14);
}

TEST_CASE("adaptive ID truncates noisy tails") {
  std::mt19937_64 rng(33);
  const Index n = 60, k = 4;
  MatXc K = random_rank_k(30, n, k, rng);
  MatXc noise = random_rank_k(30, n, 30, rng);
  K += 1e-12 * (noise / noise.norm()) * K.norm();
  ColumnID id = cid_from_rows(K, {20, 1e-8});
  CHECK(id.rank >= k);
  CHECK(id.rank <= k + 2);
}

TEST_CASE("mock-Chebyshev rows on a uniform grid") {
  VecXd pts(10);
  for (Index i = 0; i < 10; ++i) pts(i) = static_cast<double>(i);
  IndexVec want{0, 3, 6, 9};
  CHECK(mock_chebyshev_rows(pts, 4) == want);

  VecXd two(2);
  two << 0.0, 1.0;
  IndexVec one{0};  // equidistant tie resolves to the lower index
  CHECK(mock_chebyshev_rows(two, 1) == one);

  IndexVec all{0, 1};
  CHECK(mock_chebyshev_rows(two, 5) == all);
}

TEST_CASE("mock-Chebyshev points are distinct, sorted, and seeded") {
  std::mt19937_64 rng(41);
  const Index n = 100;
  MatXd pts(n, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    pts(i, 0) = u(rng);
    pts(i, 1) = u(rng);
  }
  std::mt19937_64 r1(5), r2(5);
  IndexVec a = mock_chebyshev_points(pts, 17, r1);
  IndexVec b = mock_chebyshev_points(pts, 17, r2);
  CHECK(a == b);
  CHECK(static_cast<Index>(a.size()) == 17);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  for (Index i : a) CHECK((i >= 0 && i < n));
}

TEST_CASE("rand_subset draws distinct in-range indices") {
  std::mt19937_64 rng(51);
  IndexVec s = rand_subset(30, 12, rng);
  CHECK(static_cast<Index>(s.size()) == 12);
  IndexVec sorted = s;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  CHECK(sorted.front() >= 0);
  CHECK(sorted.back() < 30);
  CHECK(static_cast<Index>(rand_subset(5, 9, rng).size()) == 5);
}
