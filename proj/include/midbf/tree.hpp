// Hierarchical cluster tree over 2D/3D points: per-level bisection of the
// bounding square/cube, Morton-ordered nodes with contiguous point ranges,
// empty cells pruned. Both sides of a kernel factorization build one.
#pragma once

#include <array>
#include <cstdint>

#include "midbf/types.hpp"

namespace midbf::tree {

struct TreeNode {
  std::uint64_t code = 0;        // Morton cell id at this node's level
  Index parent = -1;             // position in the level above (-1 at root)
  Index begin = 0;               // contiguous range into perm: [begin, end)
  Index end = 0;
  std::array<Index, 8> child{};  // positions in the level below, -1 = none
  Index nchild = 0;
};

struct ClusterTree {
  int dim = 2;
  Index n0 = 0;
  int depth = 0;                            // leaf level L
  std::vector<std::vector<TreeNode>> levels;  // levels[0] = {root}
  IndexVec perm;    // perm[pos] = original point index, Morton-sorted
  IndexVec pos_of;  // inverse permutation

  Index npoints() const { return static_cast<Index>(perm.size()); }
  const std::vector<TreeNode>& leaves() const { return levels.back(); }
};

// Bisects each coordinate once per level until every node at the deepest
// level holds <= n0 points (at least min_depth levels; the first
// coordinate is the most significant bit of every level's cell digit, so
// in 2D the children of a cell order as: low-x1/low-x2, low-x1/high-x2,
// high-x1/low-x2, high-x1/high-x2). Coordinates are scaled by the largest
// bounding-box extent, keeping cells square. Throws when more than n0
// points share a cell at the maximum depth (21 bisections).
ClusterTree build_tree(const MatXd& X, Index n0, int min_depth = 0);

}  // namespace midbf::tree
