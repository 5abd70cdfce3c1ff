#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "clockprobe/angular_momentum.hpp"

using namespace clockprobe;

namespace {

HalfInt I(int v) { return HalfInt::integer(v); }
HalfInt H(int twice) { return HalfInt::twice(twice); }

}  // namespace

TEST(HalfInt, ArithmeticIsExact) {
  EXPECT_EQ((H(7) + H(1)).twice_value(), 8);
  EXPECT_TRUE((H(7) + H(1)).is_integer());
  EXPECT_EQ((H(7) + H(1)).as_int(), 4);
  EXPECT_DOUBLE_EQ(H(-3).value(), -1.5);
  EXPECT_EQ(abs(H(-5)), H(5));
  EXPECT_EQ(H(9).str(), "9/2");
  EXPECT_LT(H(3), I(2));
}

TEST(Wigner3j, KnownValues) {
  EXPECT_NEAR(wigner3j(I(1), I(1), I(0), I(0), I(0), I(0)), -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(wigner3j(H(1), H(1), I(1), H(1), H(-1), I(0)), 1.0 / std::sqrt(6.0), 1e-15);
  // Frozen from sympy.physics.wigner.
  EXPECT_NEAR(wigner3j(I(4), I(1), I(3), I(-1), I(0), I(1)), -0.24397501823713329, 1e-15);
  EXPECT_NEAR(wigner3j(H(9), H(7), I(1), H(3), H(-1), I(-1)), -0.20412414523193151, 1e-15);
  EXPECT_NEAR(wigner3j(I(4), I(4), I(4), I(2), I(-1), I(-1)), 0.14135069854804390, 1e-15);
  EXPECT_NEAR(wigner3j(I(2), I(2), I(2), I(0), I(0), I(0)), -0.23904572186687873, 1e-15);
}

TEST(Wigner3j, SelectionRuleZerosAreExact) {
  EXPECT_EQ(wigner3j(I(1), I(1), I(3), I(0), I(0), I(0)), 0.0);  // triangle
  EXPECT_EQ(wigner3j(I(1), I(1), I(1), I(1), I(0), I(0)), 0.0);  // m sum
  EXPECT_EQ(wigner3j(I(4), I(1), I(4), I(0), I(0), I(0)), 0.0);  // odd j sum with m = 0
}

TEST(Wigner3j, RejectsMalformedPairs) {
  EXPECT_THROW(wigner3j(I(1), I(1), I(1), I(2), I(-2), I(0)), std::domain_error);
  EXPECT_THROW(wigner3j(I(1), I(1), I(0), H(1), H(-1), I(0)), std::domain_error);
  EXPECT_THROW(wigner3j(I(-1), I(1), I(0), I(0), I(0), I(0)), std::domain_error);
}

TEST(Wigner3j, EvenPermutationSymmetry) {
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b)
      for (int c = std::abs(a - b); c <= a + b; ++c)
        for (int m1 = -a; m1 <= a; ++m1)
          for (int m2 = -b; m2 <= b; ++m2) {
            const int m3 = -m1 - m2;
            if (std::abs(m3) > c) continue;
            const double v = wigner3j(I(a), I(b), I(c), I(m1), I(m2), I(m3));
            EXPECT_EQ(v, wigner3j(I(b), I(c), I(a), I(m2), I(m3), I(m1)));
            EXPECT_EQ(v, wigner3j(I(c), I(a), I(b), I(m3), I(m1), I(m2)));
          }
}

TEST(Wigner3j, Orthogonality) {
  // sum_{m1,m2} (2 j3 + 1) (j1 j2 j3; m1 m2 m3)(j1 j2 j3'; m1 m2 m3) = delta
  for (int tj1 = 0; tj1 <= 8; ++tj1)
    for (int tj2 = 0; tj2 <= 8; ++tj2)
      for (int tj3 = std::abs(tj1 - tj2); tj3 <= tj1 + tj2; tj3 += 2)
        for (int tj3p = std::abs(tj1 - tj2); tj3p <= tj1 + tj2; tj3p += 2)
          for (int tm3 = -std::min(tj3, tj3p); tm3 <= std::min(tj3, tj3p); tm3 += 2) {
            double sum = 0.0;
            for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2) {
              const int tm2 = -tm1 - tm3;
              if (std::abs(tm2) > tj2) continue;
              sum += (tj3 + 1) * wigner3j(H(tj1), H(tj2), H(tj3), H(tm1), H(tm2), H(tm3)) *
                     wigner3j(H(tj1), H(tj2), H(tj3p), H(tm1), H(tm2), H(tm3));
            }
            EXPECT_NEAR(sum, tj3 == tj3p ? 1.0 : 0.0, 1e-12);
          }
}

TEST(Wigner6j, KnownValues) {
  EXPECT_NEAR(wigner6j(H(1), H(1), I(1), H(1), H(1), I(1)), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(wigner6j(I(1), I(1), I(1), I(1), I(1), I(1)), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(wigner6j(I(2), I(2), I(2), I(2), I(2), I(2)), -0.042857142857142857, 1e-15);
  EXPECT_NEAR(wigner6j(H(1), I(4), H(7), I(4), H(1), I(1)), -0.15214515486254614, 1e-15);
  EXPECT_NEAR(wigner6j(H(1), I(3), H(7), I(4), H(1), I(1)), 0.20412414523193151, 1e-15);
}

TEST(Wigner6j, TriadViolationGivesZero) {
  EXPECT_EQ(wigner6j(I(1), I(1), I(3), I(1), I(1), I(1)), 0.0);
  EXPECT_EQ(wigner6j(H(1), H(1), I(1), H(1), H(1), I(2)), 0.0);
}

TEST(Wigner6j, ColumnPermutationInvariance) {
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; b <= 3; ++b)
      for (int c = 0; c <= 3; ++c)
        for (int d = 0; d <= 2; ++d)
          for (int e = 0; e <= 2; ++e)
            for (int f = 0; f <= 2; ++f) {
              const double v = wigner6j(I(a), I(b), I(c), I(d), I(e), I(f));
              EXPECT_EQ(v, wigner6j(I(b), I(a), I(c), I(e), I(d), I(f)));
              EXPECT_EQ(v, wigner6j(I(a), I(c), I(b), I(d), I(f), I(e)));
              // Swapping upper and lower entries in two columns.
              EXPECT_EQ(v, wigner6j(I(d), I(e), I(c), I(a), I(b), I(f)));
            }
}

TEST(DipoleElement, ForbiddenClockPiTransition) {
  const DipoleElement e = dipole_element(I(4), I(0), I(4), I(0), 0);
  EXPECT_EQ(e.amplitude, 0.0);
  EXPECT_EQ(dipole_amplitude(3, 0, 3, 0, 0), 0.0);
}

TEST(DipoleElement, SelectionRuleMismatchIsZero) {
  EXPECT_EQ(dipole_amplitude(4, 4, 4, 4, 1), 0.0);
  EXPECT_EQ(dipole_amplitude(4, 0, 3, 1, 0), 0.0);
}

TEST(DipoleElement, FrozenOracleValues) {
  // <F' m'|d_q|F m> = (-1)^(F'-m') (F' 1 F; -m' q m)(-1)^(J'+I+F+1) sqrt((2F'+1)(2F+1)) {J' F' I; F J 1},
  // evaluated symbolically with sympy.
  EXPECT_NEAR(dipole_amplitude(4, 0, 3, 0, 0), std::sqrt(6.0) / 6.0, 1e-15);
  EXPECT_NEAR(dipole_amplitude(4, 0, 4, 1, 1), -std::sqrt(15.0) / 12.0, 1e-15);
  EXPECT_NEAR(dipole_amplitude(3, 0, 4, 0, 0), std::sqrt(6.0) / 6.0, 1e-15);
  EXPECT_NEAR(dipole_amplitude(3, 0, 3, 1, 1), 0.25, 1e-15);
  EXPECT_NEAR(dipole_amplitude(4, 4, 3, 3, -1), -std::sqrt(42.0) / 12.0, 1e-15);
  EXPECT_NEAR(dipole_amplitude(3, -3, 4, -4, -1), std::sqrt(42.0) / 12.0, 1e-15);
  EXPECT_NEAR(dipole_amplitude(4, 2, 4, 2, 0), std::sqrt(6.0) / 12.0, 1e-15);
}

TEST(DipoleElement, LineStrengthSumRuleIsUniform) {
  for (int f : {3, 4})
    for (int m = -f; m <= f; ++m) {
      double s = 0.0;
      for (int fe : {3, 4})
        for (int q = -1; q <= 1; ++q) {
          const int me = m + q;
          if (std::abs(me) > fe) continue;
          const double a = dipole_amplitude(f, m, fe, me, q);
          s += a * a;
        }
      EXPECT_NEAR(s, 0.5, 1e-12) << "F=" << f << " m=" << m;
    }
}

TEST(DipoleElement, RejectsOtherManifolds) {
  EXPECT_THROW(dipole_element(I(2), I(0), I(3), I(0), 0), std::domain_error);
  EXPECT_THROW(dipole_element(I(4), I(0), I(5), I(0), 0), std::domain_error);
  EXPECT_THROW(dipole_element(I(4), I(0), I(4), I(2), 2), std::domain_error);
}

TEST(DipoleElement, RecordsQuantumNumbers) {
  const DipoleElement e = dipole_element(I(3), I(1), I(4), I(2), 1);
  EXPECT_EQ(e.ground_f, I(3));
  EXPECT_EQ(e.excited_m, I(2));
  EXPECT_EQ(e.q, 1);
  EXPECT_NE(e.amplitude, 0.0);
}
