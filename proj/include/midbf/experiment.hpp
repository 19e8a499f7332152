// End-to-end experiment driver: builds the point sets for a kernel kind,
// recovers the phase through the configured access scenario, constructs the
// butterfly factorization of the recovered kernel, applies it, and reports
// accuracy metrics and per-stage wall times.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "midbf/butterfly.hpp"
#include "midbf/kernels.hpp"
#include "midbf/phase_md.hpp"
#include "midbf/types.hpp"

namespace midbf::expt {

struct ExperimentConfig {
  ker::KernelKind kind = ker::KernelKind::Fio2D;
  Index n = 16;        // points per dimension (grid kernels) or N^(1/d) target
  int mesh_level = 3;  // sphere refinement (helmholtz only)
  Index r = 20;        // phase factorization rank
  Index k = 30;        // butterfly rank cap
  double tau = 0.25;   // discontinuity detection threshold
  Index q = 2;         // recovery row/column oversampling
  Index t = 5;         // ID sample oversize
  Index n0 = 0;        // tree leaf budget; 0 picks 8^d
  double eps = 1e-9;   // adaptive ID tolerance
  std::uint64_t seed = 0;
  int scenario = 1;
  Exec exec = Exec::Parallel;
};

// Throws std::invalid_argument on out-of-range parameters or conflicts
// (e.g. a phase rank larger than the point count) before any work runs.
void validate(const ExperimentConfig& cfg);

struct MetricsReport {
  Index N = 0;          // points per side
  int dim = 0;
  int L = 0, h = 0;
  double eps_b = 0.0;   // factorized matvec vs direct summation, sampled rows
  double eps_K = 0.0;   // recovered kernel vs true kernel, sampled submatrix
  double T_path = 0.0;  // recovery path construction (seconds)
  double T_rec = 0.0;   // phase recovery + low-rank compression
  double T_fac = 0.0;   // butterfly factorization
  double T_app = 0.0;   // one factorized matvec
  double T_d = 0.0;     // direct summation estimate, scaled from sampled rows
  Index total_nnz = 0;
  Index max_factor_nnz = 0;
  Index n_disc_rows = 0, n_disc_cols = 0;
  double tau_used = 0.0;

  double Td_over_Tapp() const { return T_app > 0 ? T_d / T_app : 0.0; }
};

// Full pipeline; the returned factorization and phase can be reused (saved,
// applied to more vectors) without rerunning.
struct ExperimentResult {
  MetricsReport report;
  bf::Factorization F;
  phase::PhaseFactorization phase;
  MatXd X, Omega;
};

ExperimentResult run_experiment_full(const ExperimentConfig& cfg);
MetricsReport run_experiment(const ExperimentConfig& cfg);

// Least-squares slope of log(value) against log(N) per stage over a sweep.
struct ScalingFit {
  double path = 0, rec = 0, fac = 0, app = 0, direct = 0, memory = 0;
};

ScalingFit scaling_sweep(const std::vector<ExperimentConfig>& cfgs,
                         std::vector<MetricsReport>* reports = nullptr);

// Log-log least-squares slope helper (sizes and values must be positive).
double loglog_slope(const std::vector<double>& sizes,
                    const std::vector<double>& values);

// Machine-readable reports. The JSON schema is versioned "midbf-report/1".
std::string report_json(const MetricsReport& m);
std::string report_csv_header();
std::string report_csv_row(const MetricsReport& m);

// Parsing helpers shared with the CLI.
ker::KernelKind kernel_kind_from_name(const std::string& name);

}  // namespace midbf::expt
