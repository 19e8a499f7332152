// Incremental Bowyer-Watson in 2D/3D with ghost simplices for the hull and
// floating-point filters backed by exact rational predicates.
#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "midbf/geometry.hpp"

namespace midbf::geo {
namespace {

using Q = mpq_class;

inline int dsign(double x) { return (x > 0) - (x < 0); }
inline int qsign(const Q& q) { return sgn(q); }

Q qdet3(const Q& a0, const Q& a1, const Q& a2, const Q& b0, const Q& b1,
        const Q& b2, const Q& c0, const Q& c1, const Q& c2) {
  return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) +
         a2 * (b0 * c1 - b1 * c0);
}

int orient2d_exact(const double* a, const double* b, const double* c) {
  Q acx(a[0]); acx -= c[0];
  Q acy(a[1]); acy -= c[1];
  Q bcx(b[0]); bcx -= c[0];
  Q bcy(b[1]); bcy -= c[1];
  return qsign(acx * bcy - acy * bcx);
}

int incircle2d_exact(const double* a, const double* b, const double* c,
                     const double* p) {
  Q ax(a[0]); ax -= p[0];
  Q ay(a[1]); ay -= p[1];
  Q bx(b[0]); bx -= p[0];
  Q by(b[1]); by -= p[1];
  Q cx(c[0]); cx -= p[0];
  Q cy(c[1]); cy -= p[1];
  return qsign(qdet3(ax, ay, ax * ax + ay * ay, bx, by, bx * bx + by * by, cx,
                     cy, cx * cx + cy * cy));
}

int orient3d_exact(const double* a, const double* b, const double* c,
                   const double* d) {
  Q r[3][3];
  const double* pts[3] = {b, c, d};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      r[i][j] = Q(pts[i][j]);
      r[i][j] -= a[j];
    }
  return qsign(qdet3(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2],
                     r[2][0], r[2][1], r[2][2]));
}

int insphere3d_exact(const double* a, const double* b, const double* c,
                     const double* d, const double* p) {
  const double* pts[4] = {a, b, c, d};
  Q r[4][4];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      r[i][j] = Q(pts[i][j]);
      r[i][j] -= p[j];
    }
    r[i][3] = r[i][0] * r[i][0] + r[i][1] * r[i][1] + r[i][2] * r[i][2];
  }
  // Expansion along the squared-norm column: signs (-1)^{i+3}.
  Q det = -r[0][3] * qdet3(r[1][0], r[1][1], r[1][2], r[2][0], r[2][1],
                           r[2][2], r[3][0], r[3][1], r[3][2]) +
          r[1][3] * qdet3(r[0][0], r[0][1], r[0][2], r[2][0], r[2][1], r[2][2],
                          r[3][0], r[3][1], r[3][2]) -
          r[2][3] * qdet3(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2],
                          r[3][0], r[3][1], r[3][2]) +
          r[3][3] * qdet3(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2],
                          r[2][0], r[2][1], r[2][2]);
  return -qsign(det);  // positive tetrahedra: det < 0 when p is inside
}

// Strictly inside the circumcircle of coplanar triangle (a,b,c), all in the
// same plane as p; evaluated after projecting out the dominant normal axis.
bool in_circumdisk_coplanar(const double* a, const double* b, const double* c,
                            const double* p) {
  Q u[3], v[3], n[3];
  for (int j = 0; j < 3; ++j) {
    u[j] = Q(b[j]); u[j] -= a[j];
    v[j] = Q(c[j]); v[j] -= a[j];
  }
  n[0] = u[1] * v[2] - u[2] * v[1];
  n[1] = u[2] * v[0] - u[0] * v[2];
  n[2] = u[0] * v[1] - u[1] * v[0];
  int drop = 0;
  Q best = abs(n[0]);
  for (int j = 1; j < 3; ++j) {
    Q m = abs(n[j]);
    if (m > best) { best = m; drop = j; }
  }
  if (qsign(best) == 0) return false;  // degenerate face
  int k0 = (drop + 1) % 3, k1 = (drop + 2) % 3;
  double a2[2] = {a[k0], a[k1]}, b2[2] = {b[k0], b[k1]};
  double c2[2] = {c[k0], c[k1]}, p2[2] = {p[k0], p[k1]};
  int inc = incircle2d_exact(a2, b2, c2, p2);
  int ori = orient2d_exact(a2, b2, c2);
  return inc * ori > 0;
}

// Strictly between a and b on their common line (collinearity established).
bool between_exact(const double* a, const double* b, const double* p, int dim) {
  Q d1(0), d2(0);
  for (int j = 0; j < dim; ++j) {
    Q pa(p[j]); pa -= a[j];
    Q ba(b[j]); ba -= a[j];
    Q pb(p[j]); pb -= b[j];
    Q ab(a[j]); ab -= b[j];
    d1 += pa * ba;
    d2 += pb * ab;
  }
  return qsign(d1) > 0 && qsign(d2) > 0;
}

constexpr Index GHOST = -1;

uint64_t pack2(Index u, Index v) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(u + 1)) << 32) |
         static_cast<uint32_t>(v + 1);
}

uint64_t pack3(Index u, Index v, Index w) {
  // Canonical cyclic rotation: smallest id first.
  if (v < u || w < u) {
    if (v < w) { Index t = u; u = v; v = w; w = t; }
    else { Index t = u; u = w; w = v; v = t; }
  }
  return (static_cast<uint64_t>(static_cast<uint32_t>(u + 1) & 0x1FFFFF) << 42) |
         (static_cast<uint64_t>(static_cast<uint32_t>(v + 1) & 0x1FFFFF) << 21) |
         (static_cast<uint32_t>(w + 1) & 0x1FFFFF);
}

class Delaunay2D {
 public:
  explicit Delaunay2D(const MatXd& X) : n_(X.rows()) {
    px_.resize(n_ * 2);
    for (Index i = 0; i < n_; ++i) {
      px_[2 * i] = X(i, 0);
      px_[2 * i + 1] = X(i, 1);
    }
    build(morton_order(X));
  }

  bool degenerate() const { return degenerate_; }

  std::vector<std::array<Index, 4>> cells() const {
    std::vector<std::array<Index, 4>> out;
    for (const Tri& t : tris_)
      if (t.alive && t.v[0] != GHOST && t.v[1] != GHOST && t.v[2] != GHOST)
        out.push_back({t.v[0], t.v[1], t.v[2], -1});
    return out;
  }

 private:
  struct Tri {
    std::array<Index, 3> v;
    bool alive = true;
  };

  const double* pt(Index i) const { return &px_[2 * i]; }

  int o2(Index a, Index b, const double* p) const {
    return orient2d_sign(pt(a), pt(b), p);
  }

  bool in_conflict(Index ti, const double* p) const {
    const Tri& t = tris_[ti];
    int g = -1;
    for (int k = 0; k < 3; ++k)
      if (t.v[k] == GHOST) g = k;
    if (g < 0)
      return incircle2d_sign(pt(t.v[0]), pt(t.v[1]), pt(t.v[2]), p) > 0;
    Index e0 = t.v[(g + 1) % 3], e1 = t.v[(g + 2) % 3];
    int s = o2(e0, e1, p);
    if (s > 0) return true;
    if (s < 0) return false;
    // Collinear with the hull edge: in conflict only strictly between.
    return between_exact(pt(e1), pt(e0), p, 2);
  }

  Index owner_of(Index u, Index v) const {
    auto it = owner_.find(pack2(u, v));
    if (it == owner_.end())
      throw std::logic_error("triangulation: missing edge owner");
    return it->second;
  }

  Index make_tri(Index a, Index b, Index c) {
    Index id = static_cast<Index>(tris_.size());
    tris_.push_back({{a, b, c}, true});
    owner_[pack2(a, b)] = id;
    owner_[pack2(b, c)] = id;
    owner_[pack2(c, a)] = id;
    return id;
  }

  void kill_tri(Index ti) {
    Tri& t = tris_[ti];
    owner_.erase(pack2(t.v[0], t.v[1]));
    owner_.erase(pack2(t.v[1], t.v[2]));
    owner_.erase(pack2(t.v[2], t.v[0]));
    t.alive = false;
  }

  Index seed(const double* p) const {
    Index t = hint_;
    size_t steps = 0, limit = 4 * tris_.size() + 16;
    while (true) {
      if (++steps > limit) break;
      const Tri& tr = tris_[t];
      bool crossed = false;
      for (int k = 0; k < 3; ++k) {
        Index u = tr.v[k], v = tr.v[(k + 1) % 3];
        if (u == GHOST || v == GHOST) continue;
        if (o2(u, v, p) < 0) {
          Index nb = owner_of(v, u);
          if (tris_[nb].v[0] == GHOST || tris_[nb].v[1] == GHOST ||
              tris_[nb].v[2] == GHOST)
            return nb;  // strictly outside the hull: ghost is in conflict
          t = nb;
          crossed = true;
          break;
        }
      }
      if (!crossed) return t;  // inside the closed triangle
    }
    for (Index i = 0; i < static_cast<Index>(tris_.size()); ++i)
      if (tris_[i].alive && in_conflict(i, p)) return i;
    throw std::logic_error("triangulation: no conflict simplex found");
  }

  void insert(Index pid) {
    const double* p = pt(pid);
    Index s = seed(p);
    if (!in_conflict(s, p)) {
      bool found = false;
      for (Index i = 0; i < static_cast<Index>(tris_.size()) && !found; ++i)
        if (tris_[i].alive && in_conflict(i, p)) { s = i; found = true; }
      if (!found)
        throw std::logic_error("triangulation: no conflict simplex found");
    }
    std::unordered_map<Index, int> status;  // 1 = cavity, 2 = kept
    std::vector<Index> cavity{s};
    status[s] = 1;
    std::vector<std::array<Index, 2>> boundary;
    for (size_t q = 0; q < cavity.size(); ++q) {
      const Tri t = tris_[cavity[q]];
      for (int k = 0; k < 3; ++k) {
        Index u = t.v[k], v = t.v[(k + 1) % 3];
        Index nb = owner_of(v, u);
        auto it = status.find(nb);
        int st = (it == status.end()) ? 0 : it->second;
        if (st == 0) {
          st = in_conflict(nb, p) ? 1 : 2;
          status[nb] = st;
          if (st == 1) cavity.push_back(nb);
        }
        if (st == 2) boundary.push_back({u, v});
      }
    }
    for (Index ti : cavity) kill_tri(ti);
    Index first = -1, first_real = -1;
    for (const auto& e : boundary) {
      Index id = make_tri(e[0], e[1], pid);
      if (first < 0) first = id;
      if (first_real < 0 && e[0] != GHOST && e[1] != GHOST) first_real = id;
    }
    // A real triangle keeps the next walk local.
    hint_ = (first_real >= 0) ? first_real : first;
  }

  void build(const IndexVec& order) {
    if (n_ < 3) {
      degenerate_ = true;
      return;
    }
    Index i0 = order[0], i1 = order[1], i2 = -1;
    size_t k2 = 2;
    for (; k2 < order.size(); ++k2) {
      if (orient2d_exact(pt(i0), pt(i1), pt(order[k2])) != 0) {
        i2 = order[k2];
        break;
      }
    }
    if (i2 < 0) {
      degenerate_ = true;
      return;
    }
    if (orient2d_exact(pt(i0), pt(i1), pt(i2)) < 0) std::swap(i1, i2);
    hint_ = make_tri(i0, i1, i2);
    make_tri(i1, i0, GHOST);
    make_tri(i2, i1, GHOST);
    make_tri(i0, i2, GHOST);
    for (size_t k = 2; k < order.size(); ++k) {
      if (k == k2) continue;  // seed vertex, possibly swapped for orientation
      insert(order[k]);
    }
  }

  Index n_;
  std::vector<double> px_;
  std::vector<Tri> tris_;
  std::unordered_map<uint64_t, Index> owner_;
  Index hint_ = 0;
  bool degenerate_ = false;
};

class Delaunay3D {
 public:
  explicit Delaunay3D(const MatXd& X) : n_(X.rows()) {
    px_.resize(n_ * 3);
    for (Index i = 0; i < n_; ++i)
      for (int j = 0; j < 3; ++j) px_[3 * i + j] = X(i, j);
    build(morton_order(X));
  }

  bool degenerate() const { return degenerate_; }

  std::vector<std::array<Index, 4>> cells() const {
    std::vector<std::array<Index, 4>> out;
    for (const Tet& t : tets_) {
      if (!t.alive) continue;
      bool ghost = false;
      for (int k = 0; k < 4; ++k) ghost |= (t.v[k] == GHOST);
      if (!ghost) out.push_back(t.v);
    }
    return out;
  }

 private:
  struct Tet {
    std::array<Index, 4> v;
    bool alive = true;
  };

  // Outward-directed faces by slot of the opposite vertex.
  static constexpr int kFace[4][3] = {
      {1, 2, 3},  // opposite slot 0
      {0, 3, 2},  // opposite slot 1
      {0, 1, 3},  // opposite slot 2
      {0, 2, 1}   // opposite slot 3
  };

  const double* pt(Index i) const { return &px_[3 * i]; }

  bool in_conflict(Index ti, const double* p) const {
    const Tet& t = tets_[ti];
    int g = -1;
    for (int k = 0; k < 4; ++k)
      if (t.v[k] == GHOST) g = k;
    if (g < 0)
      return insphere3d_sign(pt(t.v[0]), pt(t.v[1]), pt(t.v[2]), pt(t.v[3]),
                             p) > 0;
    Index f0 = t.v[kFace[g][0]], f1 = t.v[kFace[g][1]], f2 = t.v[kFace[g][2]];
    int s = orient3d_sign(pt(f0), pt(f1), pt(f2), p);
    if (s < 0) return true;  // ghost-owned face is directed inward
    if (s > 0) return false;
    return in_circumdisk_coplanar(pt(f0), pt(f1), pt(f2), p);
  }

  Index owner_of(Index u, Index v, Index w) const {
    auto it = owner_.find(pack3(u, v, w));
    if (it == owner_.end())
      throw std::logic_error("triangulation: missing face owner");
    return it->second;
  }

  Index make_tet(Index a, Index b, Index c, Index d) {
    Index id = static_cast<Index>(tets_.size());
    tets_.push_back({{a, b, c, d}, true});
    const std::array<Index, 4> v{a, b, c, d};
    for (int k = 0; k < 4; ++k)
      owner_[pack3(v[kFace[k][0]], v[kFace[k][1]], v[kFace[k][2]])] = id;
    return id;
  }

  void kill_tet(Index ti) {
    Tet& t = tets_[ti];
    for (int k = 0; k < 4; ++k)
      owner_.erase(
          pack3(t.v[kFace[k][0]], t.v[kFace[k][1]], t.v[kFace[k][2]]));
    t.alive = false;
  }

  Index seed(const double* p) const {
    Index t = hint_;
    size_t steps = 0, limit = 4 * tets_.size() + 16;
    while (true) {
      if (++steps > limit) break;
      const Tet& tr = tets_[t];
      bool ghost = false;
      for (int k = 0; k < 4; ++k) ghost |= (tr.v[k] == GHOST);
      if (ghost) break;  // walks stay among real tetrahedra
      bool crossed = false;
      for (int k = 0; k < 4; ++k) {
        Index f0 = tr.v[kFace[k][0]], f1 = tr.v[kFace[k][1]],
              f2 = tr.v[kFace[k][2]];
        if (orient3d_sign(pt(f0), pt(f1), pt(f2), p) > 0) {
          Index nb = owner_of(f0, f2, f1);
          bool nbg = false;
          for (int j = 0; j < 4; ++j) nbg |= (tets_[nb].v[j] == GHOST);
          if (nbg) return nb;  // strictly outside the hull
          t = nb;
          crossed = true;
          break;
        }
      }
      if (!crossed) return t;
    }
    for (Index i = 0; i < static_cast<Index>(tets_.size()); ++i)
      if (tets_[i].alive && in_conflict(i, p)) return i;
    throw std::logic_error("triangulation: no conflict simplex found");
  }

  void insert(Index pid) {
    const double* p = pt(pid);
    Index s = seed(p);
    if (!in_conflict(s, p)) {
      bool found = false;
      for (Index i = 0; i < static_cast<Index>(tets_.size()) && !found; ++i)
        if (tets_[i].alive && in_conflict(i, p)) { s = i; found = true; }
      if (!found)
        throw std::logic_error("triangulation: no conflict simplex found");
    }
    std::unordered_map<Index, int> status;
    std::vector<Index> cavity{s};
    status[s] = 1;
    std::vector<std::array<Index, 3>> boundary;
    for (size_t q = 0; q < cavity.size(); ++q) {
      const Tet t = tets_[cavity[q]];
      for (int k = 0; k < 4; ++k) {
        Index u = t.v[kFace[k][0]], v = t.v[kFace[k][1]], w = t.v[kFace[k][2]];
        Index nb = owner_of(u, w, v);
        auto it = status.find(nb);
        int st = (it == status.end()) ? 0 : it->second;
        if (st == 0) {
          st = in_conflict(nb, p) ? 1 : 2;
          status[nb] = st;
          if (st == 1) cavity.push_back(nb);
        }
        if (st == 2) boundary.push_back({u, v, w});
      }
    }
    for (Index ti : cavity) kill_tet(ti);
    Index first = -1, first_real = -1;
    for (const auto& f : boundary) {
      // Reversed boundary face plus the new point is positively oriented.
      Index id = make_tet(f[0], f[2], f[1], pid);
      if (first < 0) first = id;
      if (first_real < 0 && f[0] != GHOST && f[1] != GHOST && f[2] != GHOST)
        first_real = id;
    }
    hint_ = (first_real >= 0) ? first_real : first;
  }

  void build(const IndexVec& order) {
    if (n_ < 4) {
      degenerate_ = true;
      return;
    }
    Index i0 = order[0], i1 = order[1], i2 = -1, i3 = -1;
    size_t k = 2;
    for (; k < order.size(); ++k) {
      // Non-collinear: some projected 2x2 minor is nonzero.
      const double* a = pt(i0);
      const double* b = pt(i1);
      const double* c = pt(order[k]);
      bool collinear = true;
      for (int d0 = 0; d0 < 3 && collinear; ++d0)
        for (int d1 = d0 + 1; d1 < 3 && collinear; ++d1) {
          double a2[2] = {a[d0], a[d1]}, b2[2] = {b[d0], b[d1]},
                 c2[2] = {c[d0], c[d1]};
          if (orient2d_exact(a2, b2, c2) != 0) collinear = false;
        }
      if (!collinear) {
        i2 = order[k];
        break;
      }
    }
    if (i2 < 0) {
      degenerate_ = true;
      return;
    }
    for (size_t k3 = 2; k3 < order.size(); ++k3) {
      if (order[k3] == i2) continue;
      if (orient3d_exact(pt(i0), pt(i1), pt(i2), pt(order[k3])) != 0) {
        i3 = order[k3];
        break;
      }
    }
    if (i3 < 0) {
      degenerate_ = true;
      return;
    }
    if (orient3d_exact(pt(i0), pt(i1), pt(i2), pt(i3)) < 0) std::swap(i0, i1);
    hint_ = make_tet(i0, i1, i2, i3);
    const std::array<Index, 4> v{i0, i1, i2, i3};
    for (int f = 0; f < 4; ++f)
      make_tet(v[kFace[f][0]], v[kFace[f][1]], v[kFace[f][2]], GHOST);
    for (size_t q = 2; q < order.size(); ++q) {
      if (order[q] == i2 || order[q] == i3) continue;
      insert(order[q]);
    }
  }

  Index n_;
  std::vector<double> px_;
  std::vector<Tet> tets_;
  std::unordered_map<uint64_t, Index> owner_;
  Index hint_ = 0;
  bool degenerate_ = false;
};

constexpr int Delaunay3D::kFace[4][3];

}  // namespace

int orient2d_sign(const double* a, const double* b, const double* c) {
  double acx = a[0] - c[0], acy = a[1] - c[1];
  double bcx = b[0] - c[0], bcy = b[1] - c[1];
  double p1 = acx * bcy, p2 = acy * bcx;
  double det = p1 - p2;
  double mag = std::abs(p1) + std::abs(p2);
  if (std::abs(det) > 1e-14 * mag) return dsign(det);
  return orient2d_exact(a, b, c);
}

int incircle2d_sign(const double* a, const double* b, const double* c,
                    const double* p) {
  double ax = a[0] - p[0], ay = a[1] - p[1];
  double bx = b[0] - p[0], by = b[1] - p[1];
  double cx = c[0] - p[0], cy = c[1] - p[1];
  double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  double m0 = bx * cy - by * cx, m1 = ax * cy - ay * cx, m2 = ax * by - ay * bx;
  double det = a2 * m0 - b2 * m1 + c2 * m2;
  double mag = a2 * (std::abs(bx * cy) + std::abs(by * cx)) +
               b2 * (std::abs(ax * cy) + std::abs(ay * cx)) +
               c2 * (std::abs(ax * by) + std::abs(ay * bx));
  if (std::abs(det) > 1e-13 * mag) return dsign(det);
  return incircle2d_exact(a, b, c, p);
}

int orient3d_sign(const double* a, const double* b, const double* c,
                  const double* d) {
  double r[3][3];
  const double* pts[3] = {b, c, d};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = pts[i][j] - a[j];
  double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
               r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
               r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
  double mag = std::abs(r[0][0]) * (std::abs(r[1][1] * r[2][2]) +
                                    std::abs(r[1][2] * r[2][1])) +
               std::abs(r[0][1]) * (std::abs(r[1][0] * r[2][2]) +
                                    std::abs(r[1][2] * r[2][0])) +
               std::abs(r[0][2]) * (std::abs(r[1][0] * r[2][1]) +
                                    std::abs(r[1][1] * r[2][0]));
  if (std::abs(det) > 1e-13 * mag) return dsign(det);
  return orient3d_exact(a, b, c, d);
}

int insphere3d_sign(const double* a, const double* b, const double* c,
                    const double* d, const double* p) {
  const double* pts[4] = {a, b, c, d};
  double r[4][4];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) r[i][j] = pts[i][j] - p[j];
    r[i][3] = r[i][0] * r[i][0] + r[i][1] * r[i][1] + r[i][2] * r[i][2];
  }
  auto minor = [&](int i, int j, int k, double* mag) {
    double m = r[i][0] * (r[j][1] * r[k][2] - r[j][2] * r[k][1]) -
               r[i][1] * (r[j][0] * r[k][2] - r[j][2] * r[k][0]) +
               r[i][2] * (r[j][0] * r[k][1] - r[j][1] * r[k][0]);
    *mag = std::abs(r[i][0]) *
               (std::abs(r[j][1] * r[k][2]) + std::abs(r[j][2] * r[k][1])) +
           std::abs(r[i][1]) *
               (std::abs(r[j][0] * r[k][2]) + std::abs(r[j][2] * r[k][0])) +
           std::abs(r[i][2]) *
               (std::abs(r[j][0] * r[k][1]) + std::abs(r[j][1] * r[k][0]));
    return m;
  };
  double g0, g1, g2, g3;
  double m0 = minor(1, 2, 3, &g0), m1 = minor(0, 2, 3, &g1),
         m2 = minor(0, 1, 3, &g2), m3 = minor(0, 1, 2, &g3);
  // Cofactor expansion along the squared-norm column: signs (-1)^{i+3}.
  double det = -r[0][3] * m0 + r[1][3] * m1 - r[2][3] * m2 + r[3][3] * m3;
  double mag = r[0][3] * g0 + r[1][3] * g1 + r[2][3] * g2 + r[3][3] * g3;
  if (std::abs(det) > 1e-12 * mag) return -dsign(det);
  return insphere3d_exact(a, b, c, d, p);
}

Triangulation delaunay_cells(const MatXd& X) {
  Triangulation out;
  out.n = X.rows();
  out.dim = static_cast<int>(X.cols());
  if (out.dim == 2) {
    Delaunay2D dt(X);
    if (!dt.degenerate()) out.cells = dt.cells();
  } else if (out.dim == 3) {
    Delaunay3D dt(X);
    if (!dt.degenerate()) out.cells = dt.cells();
  } else {
    throw std::invalid_argument("delaunay_cells: dimension must be 2 or 3");
  }
  return out;
}

}  // namespace midbf::geo
