#include "midbf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "midbf/geometry.hpp"
#include "midbf/metrics.hpp"
#include "midbf/tree.hpp"

namespace midbf::expt {
namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t chain(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Points {
  MatXd X, Omega;
  int dim = 2;
};

Points build_points(const ExperimentConfig& cfg) {
  Points p;
  switch (cfg.kind) {
    case ker::KernelKind::Fio2D:
      p.X = ker::grid2d(cfg.n);
      p.Omega = p.X;
      p.dim = 2;
      break;
    case ker::KernelKind::Nufft: {
      const Index N = cfg.n * cfg.n * cfg.n;
      p.X = ker::random_points(N, 3, chain(cfg.seed, 0x58ull));
      p.Omega = ker::random_points(N, 3, chain(cfg.seed, 0x4f6d656761ull));
      p.dim = 3;
      break;
    }
    case ker::KernelKind::Helmholtz: {
      const ker::SpherePoints sp = ker::sphere_points(cfg.mesh_level);
      p.X = sp.X;
      p.Omega = sp.Omega;
      p.dim = 3;
      break;
    }
  }
  return p;
}

Index side_count(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ker::KernelKind::Fio2D:
      return cfg.n * cfg.n;
    case ker::KernelKind::Nufft:
      return cfg.n * cfg.n * cfg.n;
    case ker::KernelKind::Helmholtz:
      return 10 * (Index{1} << (2 * cfg.mesh_level));  // faces per hemisphere
  }
  return 0;
}

VecXc random_coefficients(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  VecXc f(n);
  for (Index i = 0; i < n; ++i) f(i) = Cplx(g(rng), g(rng));
  return f;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("experiment: n must be positive");
  if (cfg.mesh_level < 0 || cfg.mesh_level > 8)
    throw std::invalid_argument("experiment: mesh level must be in [0, 8]");
  if (cfg.r < 1) throw std::invalid_argument("experiment: phase rank must be positive");
  if (cfg.k < 1) throw std::invalid_argument("experiment: butterfly rank must be positive");
  if (!(cfg.tau > 0.0) || cfg.tau > 0.5)
    throw std::invalid_argument("experiment: tau must lie in (0, 1/2]");
  if (cfg.q < 1) throw std::invalid_argument("experiment: oversampling q must be positive");
  if (cfg.t < 1) throw std::invalid_argument("experiment: oversampling t must be positive");
  if (!(cfg.eps > 0.0) || cfg.eps >= 1.0)
    throw std::invalid_argument("experiment: tolerance must lie in (0, 1)");
  if (cfg.scenario < 1 || cfg.scenario > 3)
    throw std::invalid_argument("experiment: scenario must be 1, 2, or 3");
  if (cfg.n0 < 0) throw std::invalid_argument("experiment: leaf budget must be nonnegative");
  const Index N = side_count(cfg);
  if (N < 2) throw std::invalid_argument("experiment: need at least two points per side");
  if (cfg.r > N)
    throw std::invalid_argument("experiment: phase rank exceeds the point count");
  if (cfg.k > N)
    throw std::invalid_argument("experiment: butterfly rank exceeds the point count");
}

ExperimentResult run_experiment_full(const ExperimentConfig& cfg) {
  validate(cfg);
  Points pts = build_points(cfg);
  const Index N = pts.X.rows();

  // The accessor simulates an external system; its construction (which may
  // build a hidden operator) is not part of any timed stage.
  const ker::KernelAccessor acc =
      ker::make_accessor(cfg.kind, pts.X, pts.Omega, cfg.scenario);
  const phase::PhaseAccessorMD pa = acc.phase_access();

  ExperimentResult out;
  MetricsReport& m = out.report;
  m.N = N;
  m.dim = pts.dim;

  auto t0 = std::chrono::steady_clock::now();
  const geo::RecoveryPath P1 = geo::recovery_path(pts.X);
  const geo::RecoveryPath P2 = geo::recovery_path(pts.Omega);
  m.T_path = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rec_rng(chain(cfg.seed, 0x726563ull));
  out.phase = phase::low_rank_phase_factorization(pa, cfg.r, cfg.q, cfg.tau, P1, P2, rec_rng);
  m.T_rec = seconds_since(t0);
  m.n_disc_rows = out.phase.n_disc_rows;
  m.n_disc_cols = out.phase.n_disc_cols;
  m.tau_used = out.phase.tau;

  const bf::EntryFn Krec = metrics::phase_entry_fn(out.phase.phase);
  const Index n0 = cfg.n0 > 0 ? cfg.n0 : (Index{1} << (3 * pts.dim));

  t0 = std::chrono::steady_clock::now();
  tree::ClusterTree tx = tree::build_tree(pts.X, n0);
  tree::ClusterTree to = tree::build_tree(pts.Omega, n0);
  const int L = std::max(tx.depth, to.depth);
  if (tx.depth != L) tx = tree::build_tree(pts.X, n0, L);
  if (to.depth != L) to = tree::build_tree(pts.Omega, n0, L);
  bf::Config bcfg;
  bcfg.rank = {cfg.k, cfg.eps};
  bcfg.t = cfg.t;
  bcfg.seed = chain(cfg.seed, 0x666163ull);
  bcfg.exec = cfg.exec;
  out.F = bf::idbf_factorize(Krec, tx, to, pts.X, pts.Omega, bcfg);
  m.T_fac = seconds_since(t0);
  m.L = out.F.L;
  m.h = out.F.h;
  m.total_nnz = out.F.total_nnz();
  m.max_factor_nnz = out.F.max_factor_nnz();

  // Warm up once (first-touch of factor blocks), then report the best of
  // three timed applies so the fast stage is not dominated by timer noise.
  const VecXc f = random_coefficients(N, chain(cfg.seed, 0x66ull));
  VecXc g = bf::apply(out.F, f);
  m.T_app = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 3; ++rep) {
    t0 = std::chrono::steady_clock::now();
    g = bf::apply(out.F, f);
    m.T_app = std::min(m.T_app, seconds_since(t0));
  }

  // Reference access to the true kernel; metrics are instrumentation and
  // may evaluate entries regardless of the scenario under test.
  auto xp = std::make_shared<MatXd>(pts.X);
  auto op = std::make_shared<MatXd>(pts.Omega);
  const auto kind = cfg.kind;
  const bf::EntryFn Ktrue = [xp, op, kind](Index i, Index j) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::polar(1.0, kTwoPi * ker::kernel_phase(kind, *xp, *op, i, j));
  };

  const Index nsamp = std::min<Index>(256, N);
  m.eps_b = metrics::eps_b_of(g, Ktrue, f, nsamp, chain(cfg.seed, 0x657062ull));
  m.eps_K = metrics::eps_K(out.phase.phase, Ktrue, nsamp, chain(cfg.seed, 0x65704bull));

  // Direct-summation estimate from the sampled rows, scaled to all rows.
  {
    std::mt19937_64 rng(chain(cfg.seed, 0x5464ull));
    std::uniform_int_distribution<Index> pick(0, N - 1);
    Cplx sink(0, 0);
    t0 = std::chrono::steady_clock::now();
    for (Index s = 0; s < nsamp; ++s) {
      const Index i = pick(rng);
      Cplx accum(0, 0);
      for (Index j = 0; j < N; ++j) accum += Ktrue(i, j) * f(j);
      sink += accum;
    }
    const double sampled = seconds_since(t0);
    m.T_d = sampled * static_cast<double>(N) / static_cast<double>(nsamp);
    if (std::isnan(std::abs(sink))) m.T_d = -1.0;  // keep the sum observable
  }

  out.X = std::move(pts.X);
  out.Omega = std::move(pts.Omega);
  return out;
}

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  return run_experiment_full(cfg).report;
}

double loglog_slope(const std::vector<double>& sizes, const std::vector<double>& values) {
  if (sizes.size() != values.size() || sizes.size() < 2)
    throw std::invalid_argument("slope fit needs matching lists of at least two points");
  const double floor_v = 1e-12;
  double sx = 0, sy = 0;
  const Index n = static_cast<Index>(sizes.size());
  std::vector<double> xs(n), ys(n);
  for (Index i = 0; i < n; ++i) {
    if (!(sizes[i] > 0)) throw std::invalid_argument("slope fit needs positive sizes");
    xs[i] = std::log(sizes[i]);
    ys[i] = std::log(std::max(values[i], floor_v));
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double num = 0, den = 0;
  for (Index i = 0; i < n; ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  if (den == 0) throw std::invalid_argument("slope fit needs at least two distinct sizes");
  return num / den;
}

ScalingFit scaling_sweep(const std::vector<ExperimentConfig>& cfgs,
                         std::vector<MetricsReport>* reports) {
  if (cfgs.size() < 2)
    throw std::invalid_argument("scaling sweep needs at least two configurations");
  std::vector<double> Ns, path, rec, fac, app, dir, mem;
  for (const ExperimentConfig& cfg : cfgs) {
    const MetricsReport m = run_experiment(cfg);
    Ns.push_back(static_cast<double>(m.N));
    path.push_back(m.T_path);
    rec.push_back(m.T_rec);
    fac.push_back(m.T_fac);
    app.push_back(m.T_app);
    dir.push_back(m.T_d);
    mem.push_back(static_cast<double>(m.total_nnz));
    if (reports) reports->push_back(m);
  }
  ScalingFit fit;
  fit.path = loglog_slope(Ns, path);
  fit.rec = loglog_slope(Ns, rec);
  fit.fac = loglog_slope(Ns, fac);
  fit.app = loglog_slope(Ns, app);
  fit.direct = loglog_slope(Ns, dir);
  fit.memory = loglog_slope(Ns, mem);
  return fit;
}

std::string report_json(const MetricsReport& m) {
  nlohmann::json j;
  j["schema"] = "midbf-report/1";
  j["N"] = m.N;
  j["dim"] = m.dim;
  j["L"] = m.L;
  j["h"] = m.h;
  j["eps_b"] = m.eps_b;
  j["eps_K"] = m.eps_K;
  j["T_path"] = m.T_path;
  j["T_rec"] = m.T_rec;
  j["T_fac"] = m.T_fac;
  j["T_app"] = m.T_app;
  j["T_d"] = m.T_d;
  j["Td_over_Tapp"] = m.Td_over_Tapp();
  j["total_nnz"] = m.total_nnz;
  j["max_factor_nnz"] = m.max_factor_nnz;
  j["n_disc_rows"] = m.n_disc_rows;
  j["n_disc_cols"] = m.n_disc_cols;
  j["tau"] = m.tau_used;
  return j.dump(2) + "\n";
}

std::string report_csv_header() {
  return "N,dim,L,h,eps_b,eps_K,T_path,T_rec,T_fac,T_app,T_d,Td_over_Tapp,"
         "total_nnz,max_factor_nnz,n_disc_rows,n_disc_cols,tau\n";
}

std::string report_csv_row(const MetricsReport& m) {
  std::ostringstream os;
  os.precision(17);
  os << m.N << ',' << m.dim << ',' << m.L << ',' << m.h << ',' << m.eps_b << ','
     << m.eps_K << ',' << m.T_path << ',' << m.T_rec << ',' << m.T_fac << ','
     << m.T_app << ',' << m.T_d << ',' << m.Td_over_Tapp() << ',' << m.total_nnz
     << ',' << m.max_factor_nnz << ',' << m.n_disc_rows << ',' << m.n_disc_cols
     << ',' << m.tau_used << '\n';
  return os.str();
}

ker::KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "fio2d") return ker::KernelKind::Fio2D;
  if (name == "nufft") return ker::KernelKind::Nufft;
  if (name == "helmholtz") return ker::KernelKind::Helmholtz;
  throw std::invalid_argument("unknown kernel kind: " + name +
                              " (expected fio2d, nufft, or helmholtz)");
}

}  // namespace midbf::expt
