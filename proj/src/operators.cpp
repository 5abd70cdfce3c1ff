#include "clockprobe/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace clockprobe {
namespace {

int block_offset(int f) {
  if (f == 3) return 0;
  if (f == 4) return 7;
  throw std::domain_error("ground F must be 3 or 4");
}

}  // namespace

Operator spin_z(int f) {
  Operator op = Operator::Zero();
  const int off = block_offset(f);
  for (int m = -f; m <= f; ++m) op(off + m + f, off + m + f) = m;
  return op;
}

Operator spin_x(int f) {
  Operator op = Operator::Zero();
  const int off = block_offset(f);
  for (int m = -f; m < f; ++m) {
    // <m+1|F_+|m>
    const double c = std::sqrt(static_cast<double>(f * (f + 1) - m * (m + 1)));
    op(off + m + 1 + f, off + m + f) = 0.5 * c;
    op(off + m + f, off + m + 1 + f) = 0.5 * c;
  }
  return op;
}

Operator spin_y(int f) {
  Operator op = Operator::Zero();
  const int off = block_offset(f);
  const Complex i(0.0, 1.0);
  for (int m = -f; m < f; ++m) {
    const double c = std::sqrt(static_cast<double>(f * (f + 1) - m * (m + 1)));
    op(off + m + 1 + f, off + m + f) = -0.5 * i * c;
    op(off + m + f, off + m + 1 + f) = 0.5 * i * c;
  }
  return op;
}

Operator block_projector(int f) {
  Operator op = Operator::Zero();
  const int off = block_offset(f);
  for (int k = 0; k < 2 * f + 1; ++k) op(off + k, off + k) = 1.0;
  return op;
}

double hermiticity_defect(const Operator& a) {
  const double n = a.norm();
  const double d = (a - a.adjoint()).norm();
  return n > 1e-300 ? d / n : d;
}

Complex hs_inner(const Operator& a, const Operator& b) { return (a.adjoint() * b).trace(); }

}  // namespace clockprobe
