// Common scalar/matrix aliases used across the library.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace midbf {

using Index = Eigen::Index;
using Cplx = std::complex<double>;

using VecXd = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using MatXd = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;

using IndexVec = std::vector<Index>;

// Execution policy for kernels that also have a serial reference path.
enum class Exec { Serial, Parallel };

}  // namespace midbf
