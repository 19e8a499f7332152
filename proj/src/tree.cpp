#include "midbf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "midbf/geometry.hpp"

namespace midbf::tree {
namespace {

constexpr int kMaxDepth = 21;  // bits per coordinate in the Morton key

// Full-depth Morton key with the first coordinate in the most significant
// bit of each 2- or 3-bit level digit.
std::uint64_t deep_key(const double* t, int dim) {
  std::uint32_t c[3] = {0, 0, 0};
  for (int d = 0; d < dim; ++d) {
    double s = std::floor(std::ldexp(t[d], kMaxDepth));
    s = std::max(s, 0.0);
    c[d] = static_cast<std::uint32_t>(
        std::min<double>(s, std::ldexp(1.0, kMaxDepth) - 1));
  }
  // geo::morton* put their first argument in the low bit of each digit.
  return dim == 3 ? geo::morton3(c[2], c[1], c[0]) : geo::morton2(c[1], c[0]);
}

}  // namespace

ClusterTree build_tree(const MatXd& X, Index n0, int min_depth) {
  const Index n = X.rows();
  const int dim = static_cast<int>(X.cols());
  if (n < 1) throw std::invalid_argument("build_tree: empty point set");
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("build_tree: points must be 2D or 3D");
  if (n0 < 1) throw std::invalid_argument("build_tree: n0 must be positive");
  if (min_depth < 0 || min_depth > kMaxDepth)
    throw std::invalid_argument("build_tree: min_depth out of range");

  VecXd lo(dim);
  double ext = 0.0;
  for (int d = 0; d < dim; ++d) {
    lo(d) = X.col(d).minCoeff();
    ext = std::max(ext, X.col(d).maxCoeff() - lo(d));
  }
  if (ext <= 0.0) ext = 1.0;  // single point or fully coincident box

  std::vector<std::uint64_t> key(n);
  for (Index i = 0; i < n; ++i) {
    double t[3] = {0, 0, 0};
    for (int d = 0; d < dim; ++d) t[d] = (X(i, d) - lo(d)) / ext;
    key[i] = deep_key(t, dim);
  }

  ClusterTree T;
  T.dim = dim;
  T.n0 = n0;
  T.perm.resize(n);
  for (Index i = 0; i < n; ++i) T.perm[i] = i;
  std::sort(T.perm.begin(), T.perm.end(), [&](Index a, Index b) {
    return key[a] != key[b] ? key[a] < key[b] : a < b;
  });
  T.pos_of.resize(n);
  for (Index p = 0; p < n; ++p) T.pos_of[T.perm[p]] = p;

  auto prefix = [&](Index pos, int level) {
    return key[T.perm[pos]] >> (static_cast<unsigned>(kMaxDepth - level) * dim);
  };
  auto max_bucket = [&](int level) {
    Index widest = 0;
    for (Index b = 0; b < n;) {
      Index e = b + 1;
      while (e < n && prefix(e, level) == prefix(b, level)) ++e;
      widest = std::max(widest, e - b);
      b = e;
    }
    return widest;
  };

  int L = min_depth;
  while (L <= kMaxDepth && max_bucket(L) > n0) ++L;
  if (L > kMaxDepth)
    throw std::invalid_argument(
        "build_tree: more than n0 points coincide at maximum refinement");
  T.depth = L;

  T.levels.resize(L + 1);
  for (int level = 0; level <= L; ++level) {
    auto& nodes = T.levels[level];
    for (Index b = 0; b < n;) {
      Index e = b + 1;
      while (e < n && prefix(e, level) == prefix(b, level)) ++e;
      TreeNode node;
      node.code = prefix(b, level);
      node.begin = b;
      node.end = e;
      node.child.fill(-1);
      nodes.push_back(node);
      b = e;
    }
    if (level > 0) {
      // Both levels are Morton-sorted; walk parents alongside children.
      auto& up = T.levels[level - 1];
      Index p = 0;
      for (Index c = 0; c < static_cast<Index>(nodes.size()); ++c) {
        while (up[p].code != (nodes[c].code >> dim)) ++p;
        nodes[c].parent = p;
        up[p].child[nodes[c].code & ((1u << dim) - 1)] = c;
        ++up[p].nchild;
      }
    }
  }
  return T;
}

}  // namespace midbf::tree
