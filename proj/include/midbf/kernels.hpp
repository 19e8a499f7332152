// Built-in oscillatory kernels (2D varying-ellipse transform, d-dimensional
// non-uniform Fourier product, Helmholtz single layer on the sphere), their
// point-set generators, and indirect-access wrappers that expose the kernel
// as entries, as matrix-vector products only, or as mod-1 phase rows.
#pragma once

#include <array>
#include <functional>
#include <memory>

#include "midbf/phase_md.hpp"
#include "midbf/types.hpp"

namespace midbf::ker {

// x.xi + sqrt(c1(x)^2 xi1^2 + c2(x)^2 xi2^2) with elliptic axis lengths
// c1 = (2 + sin(2 pi x1) sin(2 pi x2))/16, c2 = (2 + cos(2 pi x1) cos(2 pi x2))/16.
double fio2d_phase(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                   const Eigen::Ref<const Eigen::RowVectorXd>& xi);

// Plain dot product x.xi in any dimension.
double nufft_phase(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                   const Eigen::Ref<const Eigen::RowVectorXd>& xi);

// h * ||x - xi||_2 with h = sqrt(N)/10; N is the per-side point count.
double helmholtz_phase(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                       const Eigen::Ref<const Eigen::RowVectorXd>& xi, Index N);

// Row-major n x n grid: point i*n+j sits at (i/n, j/n).
MatXd grid2d(Index n);

// i.i.d. uniform draws from [0,1)^dim.
MatXd random_points(Index N, int dim, uint64_t seed);

// Triangle mesh on the unit sphere: an icosahedron refined `level` times by
// edge splitting, every new vertex projected back onto the sphere, and the
// whole mesh turned by a fixed generic rotation so that no vertex or face
// center lies on the z = 0 plane.
struct SphereMesh {
  MatXd vertices;  // unit norm, 10*4^level + 2 rows
  std::vector<std::array<Index, 3>> faces;  // 20*4^level triangles
  int level = 0;
};

SphereMesh sphere_mesh(int level);

// Triangle centroids projected onto the sphere, one row per face.
MatXd face_centers(const SphereMesh& mesh);

// Face centers split by the sign of the third coordinate: z >= 0 goes to X,
// the rest to Omega. The mesh rotation keeps every |z| well away from zero,
// so the halves are exactly even: 10*4^level points each.
struct SpherePoints {
  MatXd X, Omega;
};
SpherePoints sphere_points(int level);

enum class KernelKind { Fio2D, Nufft, Helmholtz };

// Indirect access to K = e^{2 pi i Phi}. Exactly one access mode is
// populated: scenario 1 exposes entries, scenario 2 exposes only K*f and
// K^T*g (backed by a hidden operator the pipeline never sees), and
// scenario 3 serves mod-1 phase rows and columns directly. All closures are
// read-only after construction and safe for concurrent calls.
struct KernelAccessor {
  Index nrows = 0, ncols = 0;
  int scenario = 1;
  std::function<Cplx(Index, Index)> entry;          // scenario 1
  std::function<VecXc(const VecXc&)> apply;         // scenario 2: K f
  std::function<VecXc(const VecXc&)> apply_t;       // scenario 2: K^T g
  std::function<VecXd(Index)> phase_row, phase_col; // scenario 3

  // Uniform mod-1 phase view for the recovery stage; rows and columns are
  // derived from whichever access mode the scenario allows.
  phase::PhaseAccessorMD phase_access() const;

  // Dense materialization for oracles in tests (walks the allowed mode).
  MatXc dense() const;
};

// Builds the accessor for the kernel kind over the given point sets. The
// Helmholtz h uses N = X.rows(). Scenario 2 keeps a hidden dense kernel up
// to 4096 points per side and a hidden pre-built factorization beyond that
// (matvecs are then accurate to about 1e-9 rather than machine precision).
KernelAccessor make_accessor(KernelKind kind, const MatXd& X, const MatXd& Xi,
                             int scenario);

// The phase value Phi(i, j) for the kind, not reduced mod 1.
double kernel_phase(KernelKind kind, const MatXd& X, const MatXd& Xi, Index i,
                    Index j);

}  // namespace midbf::ker
