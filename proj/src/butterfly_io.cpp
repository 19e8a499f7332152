#include "midbf/butterfly_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "factorization container I/O assumes a little-endian host");

namespace midbf::bf {
namespace {

constexpr char kMagic[8] = {'M', 'I', 'D', 'B', 'F', '0', '0', '1'};

void put_i64(std::ofstream& f, std::int64_t v) {
  f.write(reinterpret_cast<const char*>(&v), 8);
}

void put_u64(std::ofstream& f, std::uint64_t v) {
  f.write(reinterpret_cast<const char*>(&v), 8);
}

void put_f64(std::ofstream& f, double v) {
  f.write(reinterpret_cast<const char*>(&v), 8);
}

struct Reader {
  std::ifstream f;
  std::string path;

  void need(bool ok, const char* what) {
    if (!ok) throw std::runtime_error(std::string(what) + " in " + path);
  }
  std::int64_t i64() {
    std::int64_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 8);
    need(bool(f), "truncated container");
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 8);
    need(bool(f), "truncated container");
    return v;
  }
  double f64() {
    double v = 0;
    f.read(reinterpret_cast<char*>(&v), 8);
    need(bool(f), "truncated container");
    return v;
  }
  Index count(const char* what, Index max = Index{1} << 40) {
    const std::int64_t v = i64();
    need(v >= 0 && v <= max, what);
    return static_cast<Index>(v);
  }
};

}  // namespace

void save_factorization(const std::string& path, const Factorization& F) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(kMagic, 8);
  put_i64(f, F.nrows);
  put_i64(f, F.ncols);
  put_i64(f, F.L);
  put_i64(f, F.h);
  put_i64(f, F.n0);
  put_i64(f, F.cfg.rank.k_max);
  put_i64(f, F.cfg.t);
  put_f64(f, F.cfg.rank.eps);
  put_u64(f, F.cfg.seed);
  put_u64(f, F.cfg.exec == Exec::Parallel ? 1 : 0);
  put_i64(f, static_cast<std::int64_t>(F.factors.size()));
  for (Index p : F.row_perm) put_i64(f, p);
  for (Index p : F.col_perm) put_i64(f, p);
  for (const Factor& fac : F.factors) {
    put_i64(f, fac.rows);
    put_i64(f, fac.cols);
    put_i64(f, static_cast<std::int64_t>(fac.blocks.size()));
    put_i64(f, static_cast<std::int64_t>(fac.groups.size()));
    for (const FactorBlock& b : fac.blocks) {
      put_i64(f, b.row_off);
      put_i64(f, b.col_off);
      put_i64(f, b.M.rows());
      put_i64(f, b.M.cols());
    }
    for (const auto& g : fac.groups) {
      put_i64(f, g.first);
      put_i64(f, g.second);
    }
  }
  for (const Factor& fac : F.factors)
    for (const FactorBlock& b : fac.blocks)
      f.write(reinterpret_cast<const char*>(b.M.data()),
              static_cast<std::streamsize>(sizeof(Cplx) * b.M.size()));
  if (!f) throw std::runtime_error("short write to " + path);
}

Factorization load_factorization(const std::string& path) {
  Reader r{std::ifstream(path, std::ios::binary), path};
  if (!r.f) throw std::runtime_error("cannot open for reading: " + path);
  char magic[8];
  r.f.read(magic, 8);
  r.need(bool(r.f), "truncated container");
  r.need(std::memcmp(magic, kMagic, 8) == 0, "unrecognized container magic");

  Factorization F;
  F.nrows = r.count("bad row count");
  F.ncols = r.count("bad column count");
  F.L = static_cast<int>(r.count("bad level count", 64));
  F.h = static_cast<int>(r.count("bad stop level", 64));
  F.n0 = r.count("bad leaf size");
  F.cfg.rank.k_max = r.count("bad rank cap");
  F.cfg.t = r.count("bad sampling oversize");
  F.cfg.rank.eps = r.f64();
  F.cfg.seed = r.u64();
  F.cfg.exec = r.u64() ? Exec::Parallel : Exec::Serial;
  const Index nfac = r.count("bad factor count", 4096);

  F.row_perm.resize(F.nrows);
  for (Index i = 0; i < F.nrows; ++i) {
    F.row_perm[i] = r.count("bad row permutation entry");
    r.need(F.row_perm[i] < F.nrows, "row permutation out of range");
  }
  F.col_perm.resize(F.ncols);
  for (Index i = 0; i < F.ncols; ++i) {
    F.col_perm[i] = r.count("bad column permutation entry");
    r.need(F.col_perm[i] < F.ncols, "column permutation out of range");
  }

  F.factors.resize(nfac);
  for (Factor& fac : F.factors) {
    fac.rows = r.count("bad factor rows");
    fac.cols = r.count("bad factor cols");
    const Index nb = r.count("bad block count");
    const Index ng = r.count("bad group count");
    fac.blocks.resize(nb);
    for (FactorBlock& b : fac.blocks) {
      b.row_off = r.count("bad block row offset");
      b.col_off = r.count("bad block column offset");
      const Index m = r.count("bad block height");
      const Index n = r.count("bad block width");
      r.need(b.row_off + m <= fac.rows && b.col_off + n <= fac.cols,
             "block outside its factor");
      b.M.resize(m, n);
    }
    fac.groups.resize(ng);
    for (auto& g : fac.groups) {
      g.first = r.count("bad group begin");
      g.second = r.count("bad group end");
      r.need(g.first <= g.second && g.second <= nb, "group outside block table");
    }
  }
  for (Factor& fac : F.factors)
    for (FactorBlock& b : fac.blocks) {
      r.f.read(reinterpret_cast<char*>(b.M.data()),
               static_cast<std::streamsize>(sizeof(Cplx) * b.M.size()));
      r.need(bool(r.f), "truncated payload");
    }
  r.f.peek();
  r.need(r.f.eof(), "trailing bytes after payload");
  return F;
}

}  // namespace midbf::bf
