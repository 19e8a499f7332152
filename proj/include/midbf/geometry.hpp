// Recovery-path geometry: Delaunay triangulation of 2D/3D point sets,
// minimum spanning tree, breadth-first path matrix, and splitting of the
// path at detected discontinuities.
#pragma once

#include <array>
#include <string>

#include "midbf/types.hpp"

namespace midbf::geo {

struct WeightedGraph {
  Index n = 0;
  struct Edge {
    Index a, b;
    double w;
  };
  std::vector<Edge> edges;
  bool complete_fallback = false;  // set when degeneracy forced a complete graph
};

struct SpanningTree {
  Index root = 0;
  IndexVec parent;  // parent[root] == -1
  IndexVec depth;
};

// Rows (parent, node) in breadth-first order: depth-major, parents in
// discovery order, children ascending by index.
struct RecoveryPath {
  Index root = 0;
  std::vector<std::array<Index, 2>> steps;
};

// Cells of a Delaunay triangulation; d+1 vertex ids per cell (2D: the
// fourth slot is unused). Every open circum-hypersphere is empty.
struct Triangulation {
  Index n = 0;
  int dim = 0;
  std::vector<std::array<Index, 4>> cells;
};

// Incremental Bowyer-Watson with Morton insertion order and exactly
// filtered predicates. Degenerate global configurations (all collinear /
// coplanar) have no triangulation; callers fall back to a complete graph.
Triangulation delaunay_cells(const MatXd& X);

// Delaunay edge graph weighted by Euclidean distance; complete graph on
// degenerate input. Throws on duplicate points.
WeightedGraph delaunay_graph(const MatXd& X);

WeightedGraph complete_graph(const MatXd& X);

// Prim's algorithm. Throws if G is disconnected (message lists the
// component count).
SpanningTree mst(const WeightedGraph& G, Index root = 0);

RecoveryPath bfs_path(const SpanningTree& T);

// delaunay_graph -> mst (root 0) -> bfs_path.
RecoveryPath recovery_path(const MatXd& X);

// Detaches every node in D from its parent and re-traverses each subtree;
// D must contain P's root. Sub-paths are emitted in the order of first
// appearance in D.
std::vector<RecoveryPath> split_path(const RecoveryPath& P, const IndexVec& D);

// Exactly filtered geometric predicate signs (-1, 0, +1).
int orient2d_sign(const double* a, const double* b, const double* c);
int incircle2d_sign(const double* a, const double* b, const double* c,
                    const double* p);  // CCW (a,b,c): +1 = strictly inside
int orient3d_sign(const double* a, const double* b, const double* c,
                  const double* d);
int insphere3d_sign(const double* a, const double* b, const double* c,
                    const double* d, const double* p);  // positive tet: +1 = inside

// Bit-interleaved Z-order key (21 bits per coordinate).
uint64_t morton2(uint32_t x, uint32_t y);
uint64_t morton3(uint32_t x, uint32_t y, uint32_t z);

// Indices of X sorted by the Morton key of bounding-box-normalized
// coordinates; ties keep the lower index first.
IndexVec morton_order(const MatXd& X);

// Reads "x1,x2[,x3]" lines; '#' starts a comment line.
MatXd read_points_csv(const std::string& path);

}  // namespace midbf::geo
