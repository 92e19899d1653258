#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>

namespace salab {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;

/// Tolerance used for structural identities (J^2 = -I, unitarity, isotropy of samples).
inline constexpr double kStructuralTol = 1e-10;
/// Relative singular-value threshold for rank and chart decisions.
inline constexpr double kRankTol = 1e-8;
/// Principal-angle cosine threshold: cos > 1 - kIntersectTol counts as a shared direction.
inline constexpr double kIntersectTol = 1e-8;
/// Isotropy threshold when accepting a computed subspace as selfadjoint.
inline constexpr double kLagrangianTol = 1e-8;

inline double hermitian_residual(const CMat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace salab
