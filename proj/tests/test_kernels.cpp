#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "midbf/kernels.hpp"

using namespace midbf;
using namespace midbf::ker;

namespace {

Eigen::RowVectorXd pt2(double a, double b) {
  Eigen::RowVectorXd v(2);
  v << a, b;
  return v;
}

Eigen::RowVectorXd pt3(double a, double b, double c) {
  Eigen::RowVectorXd v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("elliptic 2D phase at hand-evaluated points") {
  CHECK(fio2d_phase(pt2(0, 0), pt2(0, 0)) == doctest::Approx(0.0));
  // x = 0: the dot term drops and only c1(0,0) = 2/16 survives.
  CHECK(fio2d_phase(pt2(0, 0), pt2(1, 0)) == doctest::Approx(0.125).epsilon(1e-14));
  // sin(pi/2)^2 = 1 makes c1 = 3/16; the dot term adds 1/4.
  CHECK(fio2d_phase(pt2(0.25, 0.25), pt2(1, 0)) ==
        doctest::Approx(0.25 + 0.1875).epsilon(1e-13));
  // cos(pi/2)^2 = 0 keeps c2 = 2/16.
  CHECK(fio2d_phase(pt2(0.25, 0.25), pt2(0, 1)) ==
        doctest::Approx(0.25 + 0.125).epsilon(1e-13));
}

TEST_CASE("product phase is the dot product with exact rank <= d") {
  CHECK(nufft_phase(pt3(1, 1, 1), pt3(1, 2, 3)) == 6.0);
  CHECK(nufft_phase(pt3(0, 0, 0), pt3(0.3, 0.7, 0.1)) == 0.0);

  MatXd X = random_points(60, 3, 11), Xi = random_points(60, 3, 12);
  MatXd Phi(60, 60);
  for (Index i = 0; i < 60; ++i)
    for (Index j = 0; j < 60; ++j) Phi(i, j) = nufft_phase(X.row(i), Xi.row(j));
  Eigen::JacobiSVD<MatXd> svd(Phi);
  CHECK(svd.singularValues()(3) <= 1e-12 * svd.singularValues()(0));
}

TEST_CASE("sphere distance phase: scale, symmetry, coincidence") {
  CHECK(helmholtz_phase(pt3(0, 0, 1), pt3(0, 0, 1), 640) == 0.0);
  // h = sqrt(100)/10 = 1 and antipodal unit vectors are 2 apart.
  CHECK(helmholtz_phase(pt3(0, 0, 1), pt3(0, 0, -1), 100) ==
        doctest::Approx(2.0).epsilon(1e-15));
  MatXd P = random_points(20, 3, 9);
  for (Index i = 0; i < P.rows(); ++i) P.row(i).normalize();
  for (Index i = 0; i + 1 < P.rows(); i += 2) {
    CHECK(helmholtz_phase(P.row(i), P.row(i + 1), 640) ==
          helmholtz_phase(P.row(i + 1), P.row(i), 640));
    CHECK(helmholtz_phase(P.row(i), P.row(i + 1), 640) ==
          doctest::Approx(std::sqrt(640.0) / 10.0 *
                          (P.row(i) - P.row(i + 1)).norm()));
  }
}

TEST_CASE("grid2d enumerates rows of the unit grid row-major") {
  MatXd X = grid2d(4);
  REQUIRE(X.rows() == 16);
  CHECK(X(0, 0) == 0.0);
  CHECK(X(7, 0) == doctest::Approx(0.25));  // p=7 -> (i,j)=(1,3)
  CHECK(X(7, 1) == doctest::Approx(0.75));
  CHECK(X(15, 0) == doctest::Approx(0.75));
  CHECK(X.maxCoeff() < 1.0);
}

TEST_CASE("random_points is seeded and lands in the unit box") {
  MatXd A = random_points(50, 3, 42), B = random_points(50, 3, 42);
  MatXd C = random_points(50, 3, 43);
  CHECK((A - B).cwiseAbs().maxCoeff() == 0.0);
  CHECK((A - C).cwiseAbs().maxCoeff() > 0.0);
  CHECK(A.minCoeff() >= 0.0);
  CHECK(A.maxCoeff() < 1.0);
}

TEST_CASE("sphere mesh: counts, unit norms, closed manifold") {
  for (int level = 0; level <= 3; ++level) {
    SphereMesh mesh = sphere_mesh(level);
    const Index pow4 = Index(1) << (2 * level);
    REQUIRE(mesh.vertices.rows() == 10 * pow4 + 2);
    REQUIRE(Index(mesh.faces.size()) == 20 * pow4);
    for (Index i = 0; i < mesh.vertices.rows(); ++i)
      CHECK(std::abs(mesh.vertices.row(i).norm() - 1.0) <= 1e-12);

    // Every edge is shared by exactly two triangles; Euler characteristic 2.
    std::map<std::pair<Index, Index>, int> edges;
    for (const auto& f : mesh.faces)
      for (int e = 0; e < 3; ++e)
        ++edges[std::minmax(f[e], f[(e + 1) % 3])];
    for (const auto& [edge, cnt] : edges) CHECK(cnt == 2);
    const Index E = static_cast<Index>(edges.size());
    CHECK(E == 30 * pow4);
    CHECK(mesh.vertices.rows() - E + Index(mesh.faces.size()) == 2);
  }

  // No duplicate vertices at level 2.
  SphereMesh m2 = sphere_mesh(2);
  double min_gap = 2.0;
  for (Index i = 0; i < m2.vertices.rows(); ++i)
    for (Index j = i + 1; j < m2.vertices.rows(); ++j)
      min_gap = std::min(min_gap,
                         (m2.vertices.row(i) - m2.vertices.row(j)).norm());
  CHECK(min_gap > 1e-3);

  CHECK_THROWS_AS(sphere_mesh(-1), std::invalid_argument);
  CHECK_THROWS_AS(sphere_mesh(9), std::invalid_argument);
}

TEST_CASE("face centers split into exactly even hemispheres off the equator") {
  for (int level : {1, 3}) {
    SphereMesh mesh = sphere_mesh(level);
    MatXd C = face_centers(mesh);
    REQUIRE(C.rows() == Index(mesh.faces.size()));
    double min_absz = 1.0;
    for (Index i = 0; i < C.rows(); ++i) {
      CHECK(std::abs(C.row(i).norm() - 1.0) <= 1e-12);
      min_absz = std::min(min_absz, std::abs(C(i, 2)));
    }
    CHECK(min_absz > 1e-3);

    SpherePoints sp = sphere_points(level);
    const Index half = 10 * (Index(1) << (2 * level));
    CHECK(sp.X.rows() == half);
    CHECK(sp.Omega.rows() == half);
    CHECK(sp.X.col(2).minCoeff() > 0.0);
    CHECK(sp.Omega.col(2).maxCoeff() < 0.0);
  }
}

TEST_CASE("accessor scenarios agree entrywise on a small kernel") {
  MatXd X = grid2d(6), Xi = grid2d(6);
  auto a1 = make_accessor(KernelKind::Fio2D, X, Xi, 1);
  auto a2 = make_accessor(KernelKind::Fio2D, X, Xi, 2);
  auto a3 = make_accessor(KernelKind::Fio2D, X, Xi, 3);
  MatXc K1 = a1.dense(), K2 = a2.dense(), K3 = a3.dense();
  CHECK((K1 - K2).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((K1 - K3).cwiseAbs().maxCoeff() <= 1e-12);
  for (Index i = 0; i < K1.rows(); ++i)
    for (Index j = 0; j < K1.cols(); ++j) {
      CHECK(std::abs(std::abs(K1(i, j)) - 1.0) <= 1e-14);
      CHECK(std::abs(K1(i, j) -
                     std::polar(1.0, 2 * M_PI * kernel_phase(KernelKind::Fio2D,
                                                             X, Xi, i, j))) <=
            1e-13);
    }

  // Matvec-only access recovers rows through K^T e_i (plain transpose).
  VecXc ei = VecXc::Zero(36);
  ei(7) = Cplx(1, 0);
  VecXc row7 = a2.apply_t(ei);
  for (Index j = 0; j < 36; ++j)
    CHECK(std::abs(row7(j) - K1(7, j)) <= 1e-12);

  // The mod-1 phase view agrees across scenarios.
  auto p1 = a1.phase_access(), p2 = a2.phase_access(), p3 = a3.phase_access();
  for (Index i : {Index(0), Index(17), Index(35)}) {
    VecXd r1 = p1.row(i), r2 = p2.row(i), r3 = p3.row(i);
    CHECK((r1 - r2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((r1 - r3).cwiseAbs().maxCoeff() <= 1e-12);
  }
  for (Index j : {Index(3), Index(20)}) {
    VecXd c1 = p1.col(j), c2 = p2.col(j), c3 = p3.col(j);
    CHECK((c1 - c2).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((c1 - c3).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("helmholtz accessor on hemisphere face centers") {
  SpherePoints sp = sphere_points(1);
  auto acc = make_accessor(KernelKind::Helmholtz, sp.X, sp.Omega, 1);
  REQUIRE(acc.nrows == 40);
  REQUIRE(acc.ncols == 40);
  const double h = std::sqrt(40.0) / 10.0;
  for (Index i : {Index(0), Index(13)})
    for (Index j : {Index(5), Index(39)}) {
      double phi = h * (sp.X.row(i) - sp.Omega.row(j)).norm();
      CHECK(std::abs(acc.entry(i, j) - std::polar(1.0, 2 * M_PI * phi)) <=
            1e-13);
    }
}

TEST_CASE("scenario 2 switches to a factorized backend past the dense cap") {
  const Index N = 4160;
  MatXd X = random_points(N, 2, 3), Xi = random_points(N, 2, 4);
  auto big = make_accessor(KernelKind::Nufft, X, Xi, 2);
  auto ref = make_accessor(KernelKind::Nufft, X, Xi, 1);
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 3; ++rep) {
    const Index j = static_cast<Index>(rng() % N);
    VecXc e = VecXc::Zero(N);
    e(j) = Cplx(1.0, 0.0);
    const VecXc got = big.apply(e);
    VecXc want(N);
    for (Index i = 0; i < N; ++i) want(i) = ref.entry(i, j);
    CHECK((got - want).norm() / want.norm() <= 1e-8);
    const Index i = static_cast<Index>(rng() % N);
    VecXc ei = VecXc::Zero(N);
    ei(i) = Cplx(1.0, 0.0);
    const VecXc gotr = big.apply_t(ei);
    VecXc wantr(N);
    for (Index jj = 0; jj < N; ++jj) wantr(jj) = ref.entry(i, jj);
    CHECK((gotr - wantr).norm() / wantr.norm() <= 1e-8);
  }
  CHECK_THROWS_AS(make_accessor(KernelKind::Nufft, X, Xi, 7),
                  std::invalid_argument);
}

TEST_CASE("accessor closures are safe for concurrent reads") {
  MatXd X = random_points(64, 3, 21), Xi = random_points(64, 3, 22);
  auto acc = make_accessor(KernelKind::Nufft, X, Xi, 2);
  auto pa = acc.phase_access();
  MatXd rows(8, 64);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < 8; ++i) rows.row(i) = pa.row(8 * i).transpose();
  for (int i = 0; i < 8; ++i)
    CHECK((rows.row(i).transpose() - pa.row(8 * i)).cwiseAbs().maxCoeff() ==
          0.0);
}
