#include "midbf/metrics.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>

#include "midbf/linalg.hpp"

namespace midbf::metrics {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

bf::EntryFn phase_entry_fn(const phase::LowRankPhase& ph) {
  auto U = std::make_shared<MatXd>(ph.U);
  auto V = std::make_shared<MatXd>(ph.V);
  return [U, V](Index i, Index j) {
    return std::polar(1.0, kTwoPi * U->row(i).dot(V->row(j)));
  };
}

double eps_b_of(const VecXc& g_b, const bf::EntryFn& K, const VecXc& f,
                Index nrows, std::uint64_t seed) {
  const Index N = g_b.size();
  const Index n = f.size();
  if (nrows < 1) throw std::invalid_argument("eps_b: need at least one sampled row");
  std::mt19937_64 rng(seed);
  IndexVec S;
  if (nrows >= N) {
    S.resize(N);
    for (Index i = 0; i < N; ++i) S[i] = i;
  } else {
    S = la::rand_subset(N, nrows, rng);
  }
  double num = 0.0, den = 0.0;
  for (Index i : S) {
    Cplx gd(0.0, 0.0);
    for (Index j = 0; j < n; ++j) gd += K(i, j) * f(j);
    num += std::norm(g_b(i) - gd);
    den += std::norm(gd);
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

double eps_b(const bf::Factorization& F, const bf::EntryFn& K, const VecXc& f,
             Index nrows, std::uint64_t seed) {
  return eps_b_of(bf::apply(F, f), K, f, nrows, seed);
}

double eps_K(const phase::LowRankPhase& ph, const bf::EntryFn& K,
             Index nsamp, std::uint64_t seed) {
  const Index nr = ph.U.rows();
  const Index nc = ph.V.rows();
  if (nsamp < 1) throw std::invalid_argument("eps_K: need at least one sample");
  std::mt19937_64 rng(seed);
  const auto draw = [&rng, nsamp](Index n) {
    IndexVec S;
    if (nsamp >= n) {
      S.resize(n);
      for (Index i = 0; i < n; ++i) S[i] = i;
    } else {
      S = la::rand_subset(n, nsamp, rng);
    }
    return S;
  };
  const IndexVec S1 = draw(nr);
  const IndexVec S2 = draw(nc);

  MatXc A(static_cast<Index>(S1.size()), static_cast<Index>(S2.size()));
  MatXc B(A.rows(), A.cols());
  for (Index q = 0; q < A.cols(); ++q)
    for (Index p = 0; p < A.rows(); ++p) {
      A(p, q) = K(S1[p], S2[q]);
      B(p, q) = std::polar(1.0, kTwoPi * ph.U.row(S1[p]).dot(ph.V.row(S2[q])));
    }
  Eigen::BDCSVD<MatXc> num(A - B);
  Eigen::BDCSVD<MatXc> den(A);
  const double d = den.singularValues()(0);
  if (d == 0.0) return num.singularValues()(0);
  return num.singularValues()(0) / d;
}

}  // namespace midbf::metrics
