#pragma once

#include "clockprobe/half_int.hpp"

namespace clockprobe {

// Wigner 3j symbol (j1 j2 j3; m1 m2 m3).
//
// Evaluated from the Racah formula in exact rational arithmetic and rounded
// once at the end. Returns exactly 0 when the triangle rule or m1+m2+m3 = 0
// fails. Throws std::domain_error for negative j, |m| > j, or j - m not an
// integer.
double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3);

// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}. Returns exactly 0 when any of the
// four triads fails the triangle rule.
double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);

// Cs 6S1/2 -> 6P1/2 hyperfine dipole matrix element <eF mE| d_q |gF mF> in
// units of the reduced element <J'=1/2||d||J=1/2>.
struct DipoleElement {
  HalfInt ground_f;
  HalfInt ground_m;
  HalfInt excited_f;
  HalfInt excited_m;
  int q = 0;  // spherical component, mE = mF + q
  double amplitude = 0.0;
};

// Throws std::domain_error if gF or eF is not 3 or 4, or |q| > 1.
DipoleElement dipole_element(HalfInt ground_f, HalfInt ground_m, HalfInt excited_f,
                             HalfInt excited_m, int q);

// Integer-argument convenience for the Cs D1 line.
double dipole_amplitude(int ground_f, int ground_m, int excited_f, int excited_m, int q);

}  // namespace clockprobe
