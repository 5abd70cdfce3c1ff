#pragma once

#include <complex>

#include <Eigen/Dense>

namespace clockprobe {

inline constexpr int kNumGroundStates = 16;

using Complex = std::complex<double>;
// Operator on the 16-dimensional Cs ground manifold, in registry order.
using Operator = Eigen::Matrix<Complex, kNumGroundStates, kNumGroundStates>;

// Spin-F angular-momentum matrices embedded in the F block of the manifold
// (zero elsewhere). Basis order follows state_registry().
Operator spin_x(int f);
Operator spin_y(int f);
Operator spin_z(int f);
// Projector onto the F block.
Operator block_projector(int f);

// ||A - A^dagger||_F / max(||A||_F, tiny)
double hermiticity_defect(const Operator& a);

// Frobenius inner product tr(A^dagger B).
Complex hs_inner(const Operator& a, const Operator& b);

}  // namespace clockprobe
