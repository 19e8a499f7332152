#include "midbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace midbf::geo {
namespace {

uint64_t part1by1(uint64_t x) {
  x &= 0x1FFFFF;
  x = (x | (x << 16)) & 0x0000FFFF0000FFFFULL;
  x = (x | (x << 8)) & 0x00FF00FF00FF00FFULL;
  x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0FULL;
  x = (x | (x << 2)) & 0x3333333333333333ULL;
  x = (x | (x << 1)) & 0x5555555555555555ULL;
  return x;
}

uint64_t part1by2(uint64_t x) {
  x &= 0x1FFFFF;
  x = (x | (x << 32)) & 0x001F00000000FFFFULL;
  x = (x | (x << 16)) & 0x001F0000FF0000FFULL;
  x = (x | (x << 8)) & 0x100F00F00F00F00FULL;
  x = (x | (x << 4)) & 0x10C30C30C30C30C3ULL;
  x = (x | (x << 2)) & 0x1249249249249249ULL;
  return x;
}

void validate_points(const MatXd& X) {
  const Index n = X.rows(), d = X.cols();
  if (d < 1 || d > 3)
    throw std::invalid_argument("point set: dimension must be 1..3");
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      if (!std::isfinite(X(i, j)))
        throw std::invalid_argument("point set: non-finite coordinate");
  IndexVec idx(n);
  for (Index i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    for (Index j = 0; j < d; ++j) {
      if (X(a, j) < X(b, j)) return true;
      if (X(a, j) > X(b, j)) return false;
    }
    return a < b;
  });
  for (Index k = 1; k < n; ++k) {
    bool same = true;
    for (Index j = 0; j < d && same; ++j)
      same = std::abs(X(idx[k], j) - X(idx[k - 1], j)) <= 1e-12;
    if (same)
      throw std::invalid_argument("point set: duplicate points");
  }
}

double dist(const MatXd& X, Index a, Index b) {
  return (X.row(a) - X.row(b)).norm();
}

}  // namespace

uint64_t morton2(uint32_t x, uint32_t y) {
  return part1by1(x) | (part1by1(y) << 1);
}

uint64_t morton3(uint32_t x, uint32_t y, uint32_t z) {
  return part1by2(x) | (part1by2(y) << 1) | (part1by2(z) << 2);
}

IndexVec morton_order(const MatXd& X) {
  const Index n = X.rows(), d = X.cols();
  const uint32_t cells = (1u << 21) - 1;
  VecXd lo(d), hi(d);
  for (Index j = 0; j < d; ++j) {
    lo(j) = X.col(j).minCoeff();
    hi(j) = X.col(j).maxCoeff();
  }
  std::vector<std::pair<uint64_t, Index>> keys(n);
  for (Index i = 0; i < n; ++i) {
    uint32_t c[3] = {0, 0, 0};
    for (Index j = 0; j < d; ++j) {
      double span = hi(j) - lo(j);
      double u = span > 0 ? (X(i, j) - lo(j)) / span : 0.0;
      c[j] = static_cast<uint32_t>(
          std::min<double>(cells, std::floor(u * (cells + 1.0))));
    }
    keys[i] = {d == 3 ? morton3(c[0], c[1], c[2]) : morton2(c[0], c[1]), i};
  }
  std::sort(keys.begin(), keys.end());
  IndexVec order(n);
  for (Index i = 0; i < n; ++i) order[i] = keys[i].second;
  return order;
}

WeightedGraph complete_graph(const MatXd& X) {
  validate_points(X);
  WeightedGraph g;
  g.n = X.rows();
  g.complete_fallback = true;
  for (Index i = 0; i < g.n; ++i)
    for (Index j = i + 1; j < g.n; ++j)
      g.edges.push_back({i, j, dist(X, i, j)});
  return g;
}

WeightedGraph delaunay_graph(const MatXd& X) {
  validate_points(X);
  const Index n = X.rows();
  if (n < static_cast<Index>(X.cols()) + 1) return complete_graph(X);
  Triangulation tri = delaunay_cells(X);
  if (tri.cells.empty()) {
    std::cerr << "delaunay_graph: degenerate configuration, "
                 "falling back to the complete graph\n";
    return complete_graph(X);
  }
  WeightedGraph g;
  g.n = n;
  std::unordered_set<uint64_t> seen;
  seen.reserve(tri.cells.size() * 4);
  const int m = tri.dim + 1;
  for (const auto& cell : tri.cells) {
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        Index u = cell[a], v = cell[b];
        if (u > v) std::swap(u, v);
        uint64_t key = (static_cast<uint64_t>(u) << 32) | static_cast<uint64_t>(v);
        if (seen.insert(key).second) g.edges.push_back({u, v, dist(X, u, v)});
      }
  }
  return g;
}

SpanningTree mst(const WeightedGraph& G, Index root) {
  const Index n = G.n;
  std::vector<std::vector<std::pair<Index, double>>> adj(n);
  for (const auto& e : G.edges) {
    adj[e.a].push_back({e.b, e.w});
    adj[e.b].push_back({e.a, e.w});
  }
  SpanningTree T;
  T.root = root;
  T.parent.assign(n, -1);
  T.depth.assign(n, 0);
  std::vector<char> done(n, 0);
  using Item = std::tuple<double, Index, Index>;  // (weight, node, parent)
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  pq.push({0.0, root, -1});
  Index reached = 0;
  while (!pq.empty()) {
    auto [w, u, p] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    T.parent[u] = p;
    ++reached;
    for (auto [v, wv] : adj[u])
      if (!done[v]) pq.push({wv, v, u});
  }
  if (reached != n) {
    Index comps = 0;
    std::vector<char> vis(n, 0);
    for (Index s = 0; s < n; ++s) {
      if (vis[s]) continue;
      ++comps;
      std::vector<Index> stack{s};
      vis[s] = 1;
      while (!stack.empty()) {
        Index u = stack.back();
        stack.pop_back();
        for (auto [v, wv] : adj[u])
          if (!vis[v]) { vis[v] = 1; stack.push_back(v); }
      }
    }
    throw std::runtime_error("mst: graph disconnected (" +
                             std::to_string(comps) + " components)");
  }
  // Depths via repeated parent hops would be quadratic; resolve by BFS.
  std::vector<IndexVec> children(n);
  for (Index u = 0; u < n; ++u)
    if (T.parent[u] >= 0) children[T.parent[u]].push_back(u);
  std::queue<Index> q;
  q.push(root);
  while (!q.empty()) {
    Index u = q.front();
    q.pop();
    for (Index c : children[u]) {
      T.depth[c] = T.depth[u] + 1;
      q.push(c);
    }
  }
  return T;
}

RecoveryPath bfs_path(const SpanningTree& T) {
  const Index n = static_cast<Index>(T.parent.size());
  std::vector<IndexVec> children(n);
  for (Index u = 0; u < n; ++u)
    if (T.parent[u] >= 0) children[T.parent[u]].push_back(u);
  for (auto& c : children) std::sort(c.begin(), c.end());
  RecoveryPath P;
  P.root = T.root;
  std::queue<Index> q;
  q.push(T.root);
  while (!q.empty()) {
    Index u = q.front();
    q.pop();
    for (Index c : children[u]) {
      P.steps.push_back({u, c});
      q.push(c);
    }
  }
  return P;
}

RecoveryPath recovery_path(const MatXd& X) {
  return bfs_path(mst(delaunay_graph(X), 0));
}

std::vector<RecoveryPath> split_path(const RecoveryPath& P,
                                     const IndexVec& D) {
  std::unordered_set<Index> nodes{P.root};
  for (const auto& s : P.steps) nodes.insert(s[1]);
  IndexVec roots;
  std::unordered_set<Index> detached;
  for (Index d : D) {
    if (!nodes.count(d))
      throw std::invalid_argument("split_path: break index is not a node");
    if (detached.insert(d).second) roots.push_back(d);
  }
  if (!detached.count(P.root))
    throw std::invalid_argument("split_path: breaks must include the root");

  std::unordered_map<Index, IndexVec> children;
  for (const auto& s : P.steps) children[s[0]].push_back(s[1]);
  for (auto& [u, c] : children) std::sort(c.begin(), c.end());

  std::vector<RecoveryPath> out;
  for (Index r : roots) {
    RecoveryPath sub;
    sub.root = r;
    std::queue<Index> q;
    q.push(r);
    while (!q.empty()) {
      Index u = q.front();
      q.pop();
      auto it = children.find(u);
      if (it == children.end()) continue;
      for (Index c : it->second) {
        if (detached.count(c)) continue;
        sub.steps.push_back({u, c});
        q.push(c);
      }
    }
    out.push_back(std::move(sub));
  }
  return out;
}

MatXd read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open points file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::runtime_error("bad number in " + path + " line " +
                                 std::to_string(lineno));
      }
    }
    if (!rows.empty() && vals.size() != rows.front().size())
      throw std::runtime_error("inconsistent column count in " + path +
                               " line " + std::to_string(lineno));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("empty points file: " + path);
  MatXd X(static_cast<Index>(rows.size()),
          static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.cols(); ++j)
      X(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return X;
}

}  // namespace midbf::geo
