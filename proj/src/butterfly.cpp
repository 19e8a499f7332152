#include "midbf/butterfly.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace midbf::bf {
namespace {

using tree::ClusterTree;

// Schedule-independent stream derivation (splitmix64 finalizer), so that
// parallel construction draws the same samples as the serial reference.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t chain(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }

// One contiguous run of indices owned by a tree node at the current unit
// level. `begin` is the offset of the run inside its side's index space.
struct Unit {
  Index node = 0;
  Index begin = 0;
  IndexVec ids;
};

// One side (row or column space) of a system under compression.
struct Side {
  int unit_level = 0;
  std::vector<Unit> units;
  Index size = 0;
  Index off = 0;  // offset of this side's slice in the stage space
};

struct System {
  Side row, col;
};

// Position of the ancestor at `at_level` of a node at `from_level`.
Index ancestor(const ClusterTree& t, Index node, int from_level, int at_level) {
  Index p = node;
  for (int l = from_level; l > at_level; --l) p = t.levels[l][p].parent;
  return p;
}

// A part groups the consecutive units that share one ancestor at the split
// level; split_level <= 0 collapses the whole side into a single part.
struct Part {
  Index node = -1;
  Index ubegin = 0, uend = 0;  // unit range within the side
  IndexVec ids;                // concatenated global indices of the range
};

std::vector<Part> make_parts(const ClusterTree& t, const Side& side, int split_level) {
  std::vector<Part> parts;
  if (split_level <= 0 || side.units.empty()) {
    Part p;
    p.uend = static_cast<Index>(side.units.size());
    for (const Unit& u : side.units) p.ids.insert(p.ids.end(), u.ids.begin(), u.ids.end());
    parts.push_back(std::move(p));
    return parts;
  }
  if (side.unit_level < split_level)
    throw std::logic_error("compression sweep split below the current unit level");
  for (Index ui = 0; ui < static_cast<Index>(side.units.size()); ++ui) {
    const Unit& u = side.units[ui];
    const Index anc = ancestor(t, u.node, side.unit_level, split_level);
    if (parts.empty() || parts.back().node != anc) {
      Part p;
      p.node = anc;
      p.ubegin = ui;
      parts.push_back(std::move(p));
    }
    parts.back().uend = ui + 1;
    parts.back().ids.insert(parts.back().ids.end(), u.ids.begin(), u.ids.end());
  }
  return parts;
}

struct SweepSettings {
  int split_level = 0;         // <= 0: no split (single part per side)
  bool sample_points = false;  // mock-Chebyshev on coordinates vs random draw
  std::uint64_t salt = 0;
};

// Per-(row part, column part) compression output.
struct PairOut {
  std::vector<MatXc> rowW;        // row interpolation operator per row unit
  std::vector<IndexVec> rowSkel;  // kept global row ids per row unit
  std::vector<MatXc> colV;        // column interpolation operator per column unit
  std::vector<IndexVec> colSkel;
  IndexVec rhat, chat;  // stacked skeleton ids of the pair
};

struct SweepOut {
  Factor U, V;
  std::vector<SkeletonPair> pairs;
  Index mid_rows = 0, mid_cols = 0;
};

void process_pair(const EntryFn& K, const Side& rside, const Side& cside, const Part& A,
                  const Part& B, const MatXd& Omega, const Config& cfg,
                  const SweepSettings& st, std::uint64_t salt, PairOut& out) {
  const Index want = cfg.rank.k_max * cfg.t;
  const Index nru = A.uend - A.ubegin;
  const Index ncu = B.uend - B.ubegin;
  const Index nb = static_cast<Index>(B.ids.size());
  out.rowW.resize(nru);
  out.rowSkel.resize(nru);
  out.colV.resize(ncu);
  out.colSkel.resize(ncu);

  for (Index ui = 0; ui < nru; ++ui) {
    const Unit& u = rside.units[A.ubegin + ui];
    const Index nu = static_cast<Index>(u.ids.size());
    if (nu == 0 || nb == 0) {
      out.rowW[ui] = MatXc(nu, 0);
      continue;
    }
    std::mt19937_64 rng(chain(chain(salt, 0x726f77ull), static_cast<std::uint64_t>(ui)));
    const Index s = std::min(want, nb);
    IndexVec sel;
    if (st.sample_points) {
      MatXd P(nb, Omega.cols());
      for (Index c = 0; c < nb; ++c) P.row(c) = Omega.row(B.ids[c]);
      sel = la::mock_chebyshev_points(P, s, rng);
    } else if (s == nb) {
      sel.resize(nb);
      std::iota(sel.begin(), sel.end(), Index{0});
    } else {
      sel = la::rand_subset(nb, s, rng);
    }
    MatXc blk(nu, static_cast<Index>(sel.size()));
    for (Index c = 0; c < blk.cols(); ++c)
      for (Index r = 0; r < nu; ++r) blk(r, c) = K(u.ids[r], B.ids[sel[c]]);
    la::RowID rid = la::rid_from_cols(blk, cfg.rank);
    out.rowW[ui] = std::move(rid.W);
    out.rowSkel[ui].reserve(rid.skeleton.size());
    for (Index p : rid.skeleton) out.rowSkel[ui].push_back(u.ids[p]);
  }
  for (const IndexVec& s : out.rowSkel) out.rhat.insert(out.rhat.end(), s.begin(), s.end());

  const Index nr = static_cast<Index>(out.rhat.size());
  for (Index wi = 0; wi < ncu; ++wi) {
    const Unit& w = cside.units[B.ubegin + wi];
    const Index nw = static_cast<Index>(w.ids.size());
    if (nw == 0 || nr == 0) {
      out.colV[wi] = MatXc(0, nw);
      continue;
    }
    std::mt19937_64 rng(chain(chain(salt, 0x636f6cull), static_cast<std::uint64_t>(wi)));
    const Index s = std::min(want, nr);
    IndexVec sel;
    if (s == nr) {
      sel.resize(nr);
      std::iota(sel.begin(), sel.end(), Index{0});
    } else {
      sel = la::rand_subset(nr, s, rng);
    }
    MatXc blk(static_cast<Index>(sel.size()), nw);
    for (Index c = 0; c < nw; ++c)
      for (Index r = 0; r < blk.rows(); ++r) blk(r, c) = K(out.rhat[sel[r]], w.ids[c]);
    la::ColumnID cid = la::cid_from_rows(blk, cfg.rank);
    out.colV[wi] = std::move(cid.V);
    out.colSkel[wi].reserve(cid.skeleton.size());
    for (Index p : cid.skeleton) out.colSkel[wi].push_back(w.ids[p]);
  }
  for (const IndexVec& s : out.colSkel) out.chat.insert(out.chat.end(), s.begin(), s.end());
}

SweepOut run_sweep(const EntryFn& K, const ClusterTree& tx, const ClusterTree& tomega,
                   const MatXd& Omega, const Config& cfg, const std::vector<System>& systems,
                   const SweepSettings& st, Index stage_rows, Index stage_cols) {
  const Index nsys = static_cast<Index>(systems.size());
  std::vector<std::vector<Part>> rparts(nsys), cparts(nsys);
  for (Index s = 0; s < nsys; ++s) {
    rparts[s] = make_parts(tx, systems[s].row, st.split_level);
    cparts[s] = make_parts(tomega, systems[s].col, st.split_level);
  }

  // Flatten the (system, row part, column part) tasks; each draws its own
  // deterministic sample stream, so the schedule cannot change results.
  struct Task {
    Index sys, pa, pb;
  };
  std::vector<Task> tasks;
  std::vector<Index> base(nsys + 1, 0);
  for (Index s = 0; s < nsys; ++s) {
    for (Index pa = 0; pa < static_cast<Index>(rparts[s].size()); ++pa)
      for (Index pb = 0; pb < static_cast<Index>(cparts[s].size()); ++pb)
        tasks.push_back({s, pa, pb});
    base[s + 1] = static_cast<Index>(tasks.size());
  }
  const auto tid = [&](Index s, Index pa, Index pb) {
    return base[s] + pa * static_cast<Index>(cparts[s].size()) + pb;
  };

  std::vector<PairOut> outs(tasks.size());
  const bool par = cfg.exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(tasks.size()); ++ti) {
    const Task& tk = tasks[ti];
    const std::uint64_t salt =
        chain(chain(chain(st.salt, static_cast<std::uint64_t>(tk.sys)),
                    static_cast<std::uint64_t>(tk.pa)),
              static_cast<std::uint64_t>(tk.pb));
    process_pair(K, systems[tk.sys].row, systems[tk.sys].col, rparts[tk.sys][tk.pa],
                 cparts[tk.sys][tk.pb], Omega, cfg, st, salt, outs[ti]);
  }

  SweepOut R;
  // Middle-space layout: the slice of pair (a, b) sits at row segment
  // (system, b, a) and at column segment (system, a, b).
  std::vector<Index> rowOff(tasks.size(), 0), colOff(tasks.size(), 0);
  for (Index s = 0; s < nsys; ++s)
    for (Index pb = 0; pb < static_cast<Index>(cparts[s].size()); ++pb)
      for (Index pa = 0; pa < static_cast<Index>(rparts[s].size()); ++pa) {
        rowOff[tid(s, pa, pb)] = R.mid_rows;
        R.mid_rows += static_cast<Index>(outs[tid(s, pa, pb)].rhat.size());
      }
  for (Index s = 0; s < nsys; ++s)
    for (Index pa = 0; pa < static_cast<Index>(rparts[s].size()); ++pa)
      for (Index pb = 0; pb < static_cast<Index>(cparts[s].size()); ++pb) {
        colOff[tid(s, pa, pb)] = R.mid_cols;
        R.mid_cols += static_cast<Index>(outs[tid(s, pa, pb)].chat.size());
      }

  R.U.rows = stage_rows;
  R.U.cols = R.mid_rows;
  R.V.rows = R.mid_cols;
  R.V.cols = stage_cols;
  for (Index s = 0; s < nsys; ++s) {
    const Index ustart = static_cast<Index>(R.U.blocks.size());
    const Index vstart = static_cast<Index>(R.V.blocks.size());
    for (Index pa = 0; pa < static_cast<Index>(rparts[s].size()); ++pa)
      for (Index pb = 0; pb < static_cast<Index>(cparts[s].size()); ++pb) {
        const Index ti = tid(s, pa, pb);
        PairOut& po = outs[ti];
        const Part& A = rparts[s][pa];
        const Part& B = cparts[s][pb];
        Index run = 0;
        for (Index ui = 0; ui < static_cast<Index>(po.rowW.size()); ++ui) {
          MatXc& W = po.rowW[ui];
          const Index width = W.cols();
          if (W.rows() > 0 && width > 0) {
            const Unit& u = systems[s].row.units[A.ubegin + ui];
            R.U.blocks.push_back({systems[s].row.off + u.begin, rowOff[ti] + run, std::move(W)});
          }
          run += width;
        }
        run = 0;
        for (Index wi = 0; wi < static_cast<Index>(po.colV.size()); ++wi) {
          MatXc& V = po.colV[wi];
          const Index height = V.rows();
          if (height > 0 && V.cols() > 0) {
            const Unit& w = systems[s].col.units[B.ubegin + wi];
            R.V.blocks.push_back({colOff[ti] + run, systems[s].col.off + w.begin, std::move(V)});
          }
          run += height;
        }
        R.pairs.push_back({po.rhat, po.chat, rowOff[ti], colOff[ti]});
      }
    R.U.groups.emplace_back(ustart, static_cast<Index>(R.U.blocks.size()));
    R.V.groups.emplace_back(vstart, static_cast<Index>(R.V.blocks.size()));
  }
  return R;
}

Side leaf_side(const ClusterTree& t) {
  Side s;
  s.unit_level = t.depth;
  const auto& leaves = t.levels[t.depth];
  s.units.reserve(leaves.size());
  for (Index n = 0; n < static_cast<Index>(leaves.size()); ++n) {
    Unit u;
    u.node = n;
    u.begin = s.size;
    u.ids.assign(t.perm.begin() + leaves[n].begin, t.perm.begin() + leaves[n].end);
    s.size += static_cast<Index>(u.ids.size());
    s.units.push_back(std::move(u));
  }
  return s;
}

void check_inputs(const ClusterTree& tx, const ClusterTree& tomega, const MatXd& X,
                  const MatXd& Omega, const Config& cfg) {
  if (tx.dim != tomega.dim)
    throw std::invalid_argument("row and column trees have different dimensions");
  if (X.rows() != tx.npoints() || Omega.rows() != tomega.npoints())
    throw std::invalid_argument("point set sizes do not match the trees");
  if (X.cols() != tx.dim || Omega.cols() != tomega.dim)
    throw std::invalid_argument("point coordinates do not match the tree dimension");
  if (cfg.rank.k_max < 1) throw std::invalid_argument("rank cap must be positive");
  if (cfg.t < 1) throw std::invalid_argument("sampling oversize must be positive");
}

Sweep one_sweep(const EntryFn& K, const ClusterTree& tx, const ClusterTree& tomega,
                const MatXd& X, const MatXd& Omega, const Config& cfg, int split_level,
                std::uint64_t salt) {
  check_inputs(tx, tomega, X, Omega, cfg);
  std::vector<System> systems(1);
  systems[0].row = leaf_side(tx);
  systems[0].col = leaf_side(tomega);
  SweepSettings st;
  st.split_level = split_level;
  st.sample_points = true;
  st.salt = salt;
  SweepOut out = run_sweep(K, tx, tomega, Omega, cfg, systems, st, tx.npoints(),
                           tomega.npoints());
  Sweep w;
  w.U = std::move(out.U);
  w.V = std::move(out.V);
  w.pairs = std::move(out.pairs);
  w.mid_rows = out.mid_rows;
  w.mid_cols = out.mid_cols;
  return w;
}

Factor identity_factor(Index n) {
  Factor f;
  f.rows = f.cols = n;
  f.blocks.push_back({0, 0, MatXc::Identity(n, n)});
  f.groups.emplace_back(0, 1);
  return f;
}

// ---------------------------------------------------------------------------
// Recursive engine behind the full factorization.  Each sweep interpolates
// every row unit of a system against ONE column sample drawn from the whole
// column side of that system (and symmetrically for column units against the
// stacked row skeletons), so the middle keeps a single skeleton block per
// system.  The surviving indices are regrouped one tree level up and split
// into the child systems, which therefore share row (column) skeleton sets
// between siblings under the same parent pair.

// Per-(system, unit) interpolation result.
struct UnitID {
  MatXc M;        // interpolation operator: |unit| x k for rows, k x |unit| for columns
  IndexVec skel;  // kept global indices
};

struct CsOut {
  Factor U, V, S;
  Index mid_rows = 0, mid_cols = 0;
  std::vector<System> next;
};

// Draw up to `want` indices out of `pool`, spread over the coordinates
// P(pool, :) with a tensor Chebyshev pattern (random top-up inside).
IndexVec sample_ids(const IndexVec& pool, const MatXd& P, Index want, std::mt19937_64& rng) {
  const Index n = static_cast<Index>(pool.size());
  if (n <= want) return pool;
  MatXd C(n, P.cols());
  for (Index i = 0; i < n; ++i) C.row(i) = P.row(pool[i]);
  IndexVec sel = la::mock_chebyshev_points(C, want, rng);
  IndexVec out(sel.size());
  for (std::size_t i = 0; i < sel.size(); ++i) out[i] = pool[sel[i]];
  return out;
}

// One compressed side of a child system, keyed by its root node at `level`.
struct Frag {
  Index anc = -1;
  Side side;
};

// Regroup a compressed side one tree level up and cut it at the ancestors at
// `level`, which become the roots of the child systems.  When the merged
// units already sit at `level` the whole side collapses into a single unit.
std::vector<Frag> split_side(const ClusterTree& tr, const Side& old,
                             const std::vector<UnitID>& ids, int level, Index base_off) {
  std::vector<Frag> frags;
  Index run = 0;  // skeleton rows consumed so far
  for (Index ui = 0; ui < static_cast<Index>(old.units.size()); ++ui) {
    const Unit& u = old.units[ui];
    const Index anc = ancestor(tr, u.node, old.unit_level, level);
    if (frags.empty() || frags.back().anc != anc) {
      Frag f;
      f.anc = anc;
      f.side.unit_level = old.unit_level - 1;
      f.side.off = base_off + run;
      frags.push_back(std::move(f));
    }
    Side& ns = frags.back().side;
    const Index parent = tr.levels[old.unit_level][u.node].parent;
    if (ns.units.empty() || ns.units.back().node != parent) {
      Unit nu;
      nu.node = parent;
      nu.begin = ns.size;
      ns.units.push_back(std::move(nu));
    }
    const IndexVec& sk = ids[ui].skel;
    ns.units.back().ids.insert(ns.units.back().ids.end(), sk.begin(), sk.end());
    ns.size += static_cast<Index>(sk.size());
    run += static_cast<Index>(sk.size());
  }
  return frags;
}

// Systems are indexed row-root-major: s = a * nB + b.  `level` is the tree
// level of the child system roots (the sweep number); `last` materializes the
// middle blocks instead of preparing child systems.
CsOut shared_sweep(const EntryFn& K, const ClusterTree& tx, const ClusterTree& tomega,
                   const MatXd& X, const MatXd& Omega, const Config& cfg,
                   const std::vector<System>& systems, Index nB, int level, bool last,
                   std::uint64_t salt, Index stage_rows, Index stage_cols) {
  const Index nsys = static_cast<Index>(systems.size());
  const Index nA = nsys / std::max<Index>(nB, 1);
  const Index want = cfg.rank.k_max * cfg.t;
  const bool par = cfg.exec == Exec::Parallel;

  // Sibling systems share the physical layout of their common side.
  for (Index a = 0; a < nA; ++a)
    for (Index b = 1; b < nB; ++b)
      if (systems[a * nB + b].row.units.size() != systems[a * nB].row.units.size())
        throw std::logic_error("row unit layout differs between sibling systems");
  for (Index b = 0; b < nB; ++b)
    for (Index a = 1; a < nA; ++a)
      if (systems[a * nB + b].col.units.size() != systems[b].col.units.size())
        throw std::logic_error("column unit layout differs between sibling systems");

  // Column samples per system, drawn up front so that the parallel tasks
  // below stay schedule-independent.
  std::vector<IndexVec> csamp(nsys);
  for (Index s = 0; s < nsys; ++s) {
    IndexVec pool;
    pool.reserve(systems[s].col.size);
    for (const Unit& w : systems[s].col.units) pool.insert(pool.end(), w.ids.begin(), w.ids.end());
    std::mt19937_64 rng(chain(chain(salt, 0x73636f6cull), static_cast<std::uint64_t>(s)));
    csamp[s] = sample_ids(pool, Omega, want, rng);
  }

  // Row pass: one interpolation per (system, row unit).
  std::vector<std::vector<UnitID>> rids(nsys);
  std::vector<std::pair<Index, Index>> rtasks;
  for (Index s = 0; s < nsys; ++s) {
    rids[s].resize(systems[s].row.units.size());
    for (Index u = 0; u < static_cast<Index>(systems[s].row.units.size()); ++u)
      rtasks.emplace_back(s, u);
  }
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(rtasks.size()); ++ti) {
    const auto [s, ui] = rtasks[ti];
    const Unit& u = systems[s].row.units[ui];
    const Index nu = static_cast<Index>(u.ids.size());
    const Index nc = static_cast<Index>(csamp[s].size());
    UnitID& out = rids[s][ui];
    if (nu == 0 || nc == 0) {
      out.M = MatXc(nu, 0);
      continue;
    }
    MatXc blk(nu, nc);
    for (Index c = 0; c < nc; ++c)
      for (Index r = 0; r < nu; ++r) blk(r, c) = K(u.ids[r], csamp[s][c]);
    la::RowID rid = la::rid_from_cols(blk, cfg.rank);
    out.M = std::move(rid.W);
    out.skel.reserve(rid.skeleton.size());
    for (Index p : rid.skeleton) out.skel.push_back(u.ids[p]);
  }

  // Stacked row skeletons and the middle-space row layout (system-major).
  std::vector<IndexVec> rhat(nsys);
  std::vector<std::vector<Index>> ruoff(nsys);
  std::vector<Index> out_row_off(nsys, 0);
  Index mid_rows = 0;
  for (Index s = 0; s < nsys; ++s) {
    out_row_off[s] = mid_rows;
    ruoff[s].resize(rids[s].size(), 0);
    for (Index u = 0; u < static_cast<Index>(rids[s].size()); ++u) {
      ruoff[s][u] = static_cast<Index>(rhat[s].size());
      rhat[s].insert(rhat[s].end(), rids[s][u].skel.begin(), rids[s][u].skel.end());
    }
    mid_rows += static_cast<Index>(rhat[s].size());
  }

  // Row samples per system for the column pass.
  std::vector<IndexVec> rsamp(nsys);
  for (Index s = 0; s < nsys; ++s) {
    std::mt19937_64 rng(chain(chain(salt, 0x73726f77ull), static_cast<std::uint64_t>(s)));
    rsamp[s] = sample_ids(rhat[s], X, want, rng);
  }

  // Column pass: one interpolation per (system, column unit).
  std::vector<std::vector<UnitID>> cids(nsys);
  std::vector<std::pair<Index, Index>> ctasks;
  for (Index s = 0; s < nsys; ++s) {
    cids[s].resize(systems[s].col.units.size());
    for (Index w = 0; w < static_cast<Index>(systems[s].col.units.size()); ++w)
      ctasks.emplace_back(s, w);
  }
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::int64_t ti = 0; ti < static_cast<std::int64_t>(ctasks.size()); ++ti) {
    const auto [s, wi] = ctasks[ti];
    const Unit& w = systems[s].col.units[wi];
    const Index nw = static_cast<Index>(w.ids.size());
    const Index nr = static_cast<Index>(rsamp[s].size());
    UnitID& out = cids[s][wi];
    if (nw == 0 || nr == 0) {
      out.M = MatXc(0, nw);
      continue;
    }
    MatXc blk(nr, nw);
    for (Index c = 0; c < nw; ++c)
      for (Index r = 0; r < nr; ++r) blk(r, c) = K(rsamp[s][r], w.ids[c]);
    la::ColumnID cid = la::cid_from_rows(blk, cfg.rank);
    out.M = std::move(cid.V);
    out.skel.reserve(cid.skeleton.size());
    for (Index p : cid.skeleton) out.skel.push_back(w.ids[p]);
  }

  std::vector<IndexVec> chat(nsys);
  std::vector<std::vector<Index>> cuoff(nsys);
  std::vector<Index> out_col_off(nsys, 0);
  Index mid_cols = 0;
  for (Index s = 0; s < nsys; ++s) {
    out_col_off[s] = mid_cols;
    cuoff[s].resize(cids[s].size(), 0);
    for (Index w = 0; w < static_cast<Index>(cids[s].size()); ++w) {
      cuoff[s][w] = static_cast<Index>(chat[s].size());
      chat[s].insert(chat[s].end(), cids[s][w].skel.begin(), cids[s][w].skel.end());
    }
    mid_cols += static_cast<Index>(chat[s].size());
  }

  CsOut R;
  R.mid_rows = mid_rows;
  R.mid_cols = mid_cols;

  // U: for each (row root, unit), the sibling blocks reading the same input
  // rows form one group; a change of input span starts a new group.
  R.U.rows = stage_rows;
  R.U.cols = mid_rows;
  for (Index a = 0; a < nA; ++a) {
    const Index nu = static_cast<Index>(systems[a * nB].row.units.size());
    for (Index u = 0; u < nu; ++u) {
      Index gstart = static_cast<Index>(R.U.blocks.size());
      Index prev_off = -1;
      for (Index b = 0; b < nB; ++b) {
        const Index s = a * nB + b;
        MatXc& W = rids[s][u].M;
        if (W.rows() == 0 || W.cols() == 0) continue;
        const Index roff = systems[s].row.off + systems[s].row.units[u].begin;
        if (prev_off >= 0 && roff != prev_off) {
          R.U.groups.emplace_back(gstart, static_cast<Index>(R.U.blocks.size()));
          gstart = static_cast<Index>(R.U.blocks.size());
        }
        prev_off = roff;
        R.U.blocks.push_back({roff, out_row_off[s] + ruoff[s][u], std::move(W)});
      }
      if (gstart < static_cast<Index>(R.U.blocks.size()))
        R.U.groups.emplace_back(gstart, static_cast<Index>(R.U.blocks.size()));
    }
  }

  // V: mirrored over the column side.
  R.V.rows = mid_cols;
  R.V.cols = stage_cols;
  for (Index b = 0; b < nB; ++b) {
    const Index nw = static_cast<Index>(systems[b].col.units.size());
    for (Index w = 0; w < nw; ++w) {
      Index gstart = static_cast<Index>(R.V.blocks.size());
      Index prev_off = -1;
      for (Index a = 0; a < nA; ++a) {
        const Index s = a * nB + b;
        MatXc& V = cids[s][w].M;
        if (V.rows() == 0 || V.cols() == 0) continue;
        const Index coff = systems[s].col.off + systems[s].col.units[w].begin;
        if (prev_off >= 0 && coff != prev_off) {
          R.V.groups.emplace_back(gstart, static_cast<Index>(R.V.blocks.size()));
          gstart = static_cast<Index>(R.V.blocks.size());
        }
        prev_off = coff;
        R.V.blocks.push_back({out_col_off[s] + cuoff[s][w], coff, std::move(V)});
      }
      if (gstart < static_cast<Index>(R.V.blocks.size()))
        R.V.groups.emplace_back(gstart, static_cast<Index>(R.V.blocks.size()));
    }
  }

  if (last) {
    // Terminal sweep: one dense skeleton block per system.
    R.S.rows = mid_rows;
    R.S.cols = mid_cols;
    for (Index s = 0; s < nsys; ++s) {
      const Index nr = static_cast<Index>(rhat[s].size());
      const Index nc = static_cast<Index>(chat[s].size());
      if (nr == 0 || nc == 0) continue;
      MatXc blk(nr, nc);
      for (Index c = 0; c < nc; ++c)
        for (Index r = 0; r < nr; ++r) blk(r, c) = K(rhat[s][r], chat[s][c]);
      const Index gs = static_cast<Index>(R.S.blocks.size());
      R.S.blocks.push_back({out_row_off[s], out_col_off[s], std::move(blk)});
      R.S.groups.emplace_back(gs, gs + 1);
    }
  } else {
    // Child systems: all pairs of nodes one level below the current roots.
    const Index na2 = static_cast<Index>(tx.levels[level].size());
    const Index nb2 = static_cast<Index>(tomega.levels[level].size());
    R.next.resize(na2 * nb2);
    for (Index s = 0; s < nsys; ++s) {
      const auto rfr = split_side(tx, systems[s].row, rids[s], level, out_row_off[s]);
      const auto cfr = split_side(tomega, systems[s].col, cids[s], level, out_col_off[s]);
      for (const Frag& rf : rfr)
        for (const Frag& cf : cfr) {
          System& ns = R.next[rf.anc * nb2 + cf.anc];
          ns.row = rf.side;
          ns.col = cf.side;
        }
    }
  }
  return R;
}

// y (+)= F x or F^T x, accumulating blocks of each group in fixed order.
void apply_factor(const Factor& F, const MatXc& x, MatXc& y, bool transpose, bool par) {
  y.setZero(transpose ? F.cols : F.rows, x.cols());
  const std::int64_t ng = static_cast<std::int64_t>(F.groups.size());
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::int64_t g = 0; g < ng; ++g) {
    for (Index i = F.groups[g].first; i < F.groups[g].second; ++i) {
      const FactorBlock& b = F.blocks[i];
      if (!transpose)
        y.middleRows(b.row_off, b.M.rows()).noalias() +=
            b.M * x.middleRows(b.col_off, b.M.cols());
      else
        y.middleRows(b.col_off, b.M.cols()).noalias() +=
            b.M.transpose() * x.middleRows(b.row_off, b.M.rows());
    }
  }
}

MatXc apply_impl(const Factorization& F, const MatXc& fs, bool transpose) {
  const Index nin = transpose ? F.nrows : F.ncols;
  const Index nout = transpose ? F.ncols : F.nrows;
  if (fs.rows() != nin) throw std::invalid_argument("input length does not match the factorization");
  const IndexVec& in_perm = transpose ? F.row_perm : F.col_perm;
  const IndexVec& out_perm = transpose ? F.col_perm : F.row_perm;
  const bool par = F.cfg.exec == Exec::Parallel;

  MatXc v(nin, fs.cols());
  for (Index p = 0; p < nin; ++p) v.row(p) = fs.row(in_perm[p]);
  MatXc w;
  if (!transpose) {
    for (Index i = static_cast<Index>(F.factors.size()) - 1; i >= 0; --i) {
      apply_factor(F.factors[i], v, w, false, par);
      v.swap(w);
    }
  } else {
    for (Index i = 0; i < static_cast<Index>(F.factors.size()); ++i) {
      apply_factor(F.factors[i], v, w, true, par);
      v.swap(w);
    }
  }
  MatXc out(nout, fs.cols());
  for (Index p = 0; p < nout; ++p) out.row(out_perm[p]) = v.row(p);
  return out;
}

}  // namespace

Index Factor::nnz() const {
  Index n = 0;
  for (const FactorBlock& b : blocks) n += b.M.size();
  return n;
}

Index Factorization::total_nnz() const {
  Index n = 0;
  for (const Factor& f : factors) n += f.nnz();
  return n;
}

Index Factorization::max_factor_nnz() const {
  Index n = 0;
  for (const Factor& f : factors) n = std::max(n, f.nnz());
  return n;
}

double Factorization::nnz_bound(double c) const {
  const double k = static_cast<double>(cfg.rank.k_max);
  const double N = static_cast<double>(std::max(nrows, ncols));
  return c * k * k / static_cast<double>(std::max<Index>(n0, 1)) * N;
}

Sweep lrcs(const EntryFn& K, const tree::ClusterTree& tx, const tree::ClusterTree& tomega,
           const MatXd& X, const MatXd& Omega, const Config& cfg) {
  return one_sweep(K, tx, tomega, X, Omega, cfg, /*split_level=*/0,
                   chain(cfg.seed, 0x6c726373ull));
}

Sweep mscs(const EntryFn& K, const tree::ClusterTree& tx, const tree::ClusterTree& tomega,
           const MatXd& X, const MatXd& Omega, int level, const Config& cfg) {
  if (level < 1 || level > std::min(tx.depth, tomega.depth))
    throw std::invalid_argument("split level outside the tree depth");
  return one_sweep(K, tx, tomega, X, Omega, cfg, level, chain(cfg.seed, 0x6d736373ull));
}

Factorization idbf_factorize(const EntryFn& K, const tree::ClusterTree& tx,
                             const tree::ClusterTree& tomega, const MatXd& X,
                             const MatXd& Omega, const Config& cfg) {
  check_inputs(tx, tomega, X, Omega, cfg);
  if (tx.depth != tomega.depth)
    throw std::invalid_argument("butterfly factorization requires trees of equal depth");

  Factorization F;
  F.nrows = tx.npoints();
  F.ncols = tomega.npoints();
  F.L = tx.depth;
  F.h = (tx.depth + 1) / 2;
  F.n0 = tx.n0;
  F.cfg = cfg;
  F.row_perm = tx.perm;
  F.col_perm = tomega.perm;

  if (F.L == 0) {
    // Single-leaf trees: the kernel is stored densely between identities.
    Factor S;
    S.rows = F.nrows;
    S.cols = F.ncols;
    MatXc Kd(F.nrows, F.ncols);
    for (Index c = 0; c < F.ncols; ++c)
      for (Index r = 0; r < F.nrows; ++r) Kd(r, c) = K(F.row_perm[r], F.col_perm[c]);
    S.blocks.push_back({0, 0, std::move(Kd)});
    S.groups.emplace_back(0, 1);
    F.factors.push_back(identity_factor(F.nrows));
    F.factors.push_back(std::move(S));
    F.factors.push_back(identity_factor(F.ncols));
    return F;
  }

  const int T = F.L - F.h + 1;
  std::vector<System> systems(1);
  systems[0].row = leaf_side(tx);
  systems[0].col = leaf_side(tomega);
  Index nB = 1;
  Index stage_rows = F.nrows, stage_cols = F.ncols;

  std::vector<Factor> Us, Vs;
  Factor S;
  for (int t = 1; t <= T; ++t) {
    CsOut out = shared_sweep(K, tx, tomega, X, Omega, cfg, systems, nB, t, /*last=*/t == T,
                             chain(cfg.seed, static_cast<std::uint64_t>(t)), stage_rows,
                             stage_cols);
    Us.push_back(std::move(out.U));
    Vs.push_back(std::move(out.V));
    if (t == T) {
      S = std::move(out.S);
    } else {
      systems = std::move(out.next);
      nB = static_cast<Index>(tomega.levels[t].size());
      stage_rows = out.mid_rows;
      stage_cols = out.mid_cols;
    }
  }
  for (Factor& f : Us) F.factors.push_back(std::move(f));
  F.factors.push_back(std::move(S));
  for (auto it = Vs.rbegin(); it != Vs.rend(); ++it) F.factors.push_back(std::move(*it));
  return F;
}

VecXc apply(const Factorization& F, const VecXc& f) {
  return apply_impl(F, f, /*transpose=*/false).col(0);
}

VecXc apply_transpose(const Factorization& F, const VecXc& g) {
  return apply_impl(F, g, /*transpose=*/true).col(0);
}

MatXc apply(const Factorization& F, const MatXc& fs) { return apply_impl(F, fs, false); }

MatXc apply_transpose(const Factorization& F, const MatXc& gs) {
  return apply_impl(F, gs, true);
}

MatXc factor_dense(const Factor& F) {
  MatXc A = MatXc::Zero(F.rows, F.cols);
  for (const FactorBlock& b : F.blocks)
    A.block(b.row_off, b.col_off, b.M.rows(), b.M.cols()) += b.M;
  return A;
}

MatXc sweep_dense(const Sweep& W, const EntryFn& K) {
  MatXc S = MatXc::Zero(W.mid_rows, W.mid_cols);
  for (const SkeletonPair& p : W.pairs) {
    for (Index c = 0; c < static_cast<Index>(p.cols.size()); ++c)
      for (Index r = 0; r < static_cast<Index>(p.rows.size()); ++r)
        S(p.row_off + r, p.col_off + c) = K(p.rows[r], p.cols[c]);
  }
  return factor_dense(W.U) * S * factor_dense(W.V);
}

MatXc dense(const Factorization& F) {
  return apply_impl(F, MatXc::Identity(F.ncols, F.ncols), /*transpose=*/false);
}

}  // namespace midbf::bf
