#include "clockprobe/angular_momentum.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace clockprobe {
namespace {

namespace mp = boost::multiprecision;
using Rational = mp::cpp_rational;
using BigInt = mp::cpp_int;

// All arguments are in doubled units; n2 must be even and nonnegative.
BigInt factorial_twice(int n2) {
  BigInt r = 1;
  for (int k = 2; k <= n2 / 2; ++k) r *= k;
  return r;
}

bool triangle(int a2, int b2, int c2) {
  return a2 + b2 - c2 >= 0 && a2 - b2 + c2 >= 0 && -a2 + b2 + c2 >= 0 &&
         (a2 + b2 + c2) % 2 == 0;
}

// Delta(abc)^2 ... as a rational (not square-rooted).
Rational triangle_coefficient(int a2, int b2, int c2) {
  return Rational(factorial_twice(a2 + b2 - c2) * factorial_twice(a2 - b2 + c2) *
                      factorial_twice(-a2 + b2 + c2),
                  factorial_twice(a2 + b2 + c2 + 2));
}

// sign(sum) * sqrt(sum^2 * prefactor) rounded to double.
double signed_sqrt(const Rational& sum, const Rational& prefactor) {
  if (sum == 0) return 0.0;
  using Float = mp::cpp_bin_float_50;
  Float sq = Float(Rational(sum * sum * prefactor));
  double mag = static_cast<double>(mp::sqrt(sq));
  return sum > 0 ? mag : -mag;
}

void check_pair(HalfInt j, HalfInt m) {
  if (j.twice_value() < 0) throw std::domain_error("negative angular momentum " + j.str());
  if (std::abs(m.twice_value()) > j.twice_value())
    throw std::domain_error("|m| > j for j=" + j.str() + ", m=" + m.str());
  if ((j.twice_value() - m.twice_value()) % 2 != 0)
    throw std::domain_error("j - m not integer for j=" + j.str() + ", m=" + m.str());
}

using Key = std::uint64_t;

std::optional<Key> pack(std::array<int, 6> v, int tag) {
  Key k = static_cast<Key>(tag);
  for (int x : v) {
    if (x < -120 || x > 120) return std::nullopt;
    k = (k << 8) | static_cast<Key>(x + 128);
  }
  return k;
}

class SymbolCache {
public:
  std::optional<double> find(Key k) const {
    std::shared_lock lock(mutex_);
    auto it = map_.find(k);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  void store(Key k, double v) {
    std::unique_lock lock(mutex_);
    map_.emplace(k, v);
  }

private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, double> map_;
};

SymbolCache& cache() {
  static SymbolCache c;
  return c;
}

double racah_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0 || !triangle(j1, j2, j3)) return 0.0;

  // Summation bounds in doubled units; every bound differs from k by an integer.
  const int kmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  const int kmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  Rational sum = 0;
  for (int k = kmin; k <= kmax; k += 2) {
    BigInt den = factorial_twice(k) * factorial_twice(j3 - j2 + k + m1) *
                 factorial_twice(j3 - j1 + k - m2) * factorial_twice(j1 + j2 - j3 - k) *
                 factorial_twice(j1 - k - m1) * factorial_twice(j2 - k + m2);
    Rational term(1, den);
    sum += ((k / 2) % 2 == 0) ? term : Rational(-term);
  }
  Rational prefactor = triangle_coefficient(j1, j2, j3) *
                       Rational(factorial_twice(j1 + m1) * factorial_twice(j1 - m1) *
                                factorial_twice(j2 + m2) * factorial_twice(j2 - m2) *
                                factorial_twice(j3 + m3) * factorial_twice(j3 - m3));
  // (-1)^(j1 - j2 - m3)
  const int phase = (j1 - j2 - m3) / 2;
  double v = signed_sqrt(sum, prefactor);
  return (phase % 2 == 0) ? v : -v;
}

double racah_6j(int j1, int j2, int j3, int j4, int j5, int j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) ||
      !triangle(j4, j5, j3))
    return 0.0;
  const int a1 = j1 + j2 + j3, a2 = j1 + j5 + j6, a3 = j4 + j2 + j6, a4 = j4 + j5 + j3;
  const int b1 = j1 + j2 + j4 + j5, b2 = j2 + j3 + j5 + j6, b3 = j3 + j1 + j6 + j4;
  const int tmin = std::max({a1, a2, a3, a4});
  const int tmax = std::min({b1, b2, b3});
  Rational sum = 0;
  for (int t = tmin; t <= tmax; t += 2) {
    BigInt den = factorial_twice(t - a1) * factorial_twice(t - a2) * factorial_twice(t - a3) *
                 factorial_twice(t - a4) * factorial_twice(b1 - t) * factorial_twice(b2 - t) *
                 factorial_twice(b3 - t);
    Rational term(factorial_twice(t + 2), den);
    sum += ((t / 2) % 2 == 0) ? term : Rational(-term);
  }
  Rational prefactor = triangle_coefficient(j1, j2, j3) * triangle_coefficient(j1, j5, j6) *
                       triangle_coefficient(j4, j2, j6) * triangle_coefficient(j4, j5, j3);
  return signed_sqrt(sum, prefactor);
}

}  // namespace

double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  check_pair(j1, m1);
  check_pair(j2, m2);
  check_pair(j3, m3);
  const std::array<int, 6> v{j1.twice_value(), j2.twice_value(), j3.twice_value(),
                             m1.twice_value(), m2.twice_value(), m3.twice_value()};
  const auto key = pack(v, 3);
  if (key) {
    if (auto hit = cache().find(*key)) return *hit;
  }
  const double r = racah_3j(v[0], v[1], v[2], v[3], v[4], v[5]);
  if (key) cache().store(*key, r);
  return r;
}

double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  for (HalfInt j : {j1, j2, j3, j4, j5, j6})
    if (j.twice_value() < 0) throw std::domain_error("negative angular momentum " + j.str());
  const std::array<int, 6> v{j1.twice_value(), j2.twice_value(), j3.twice_value(),
                             j4.twice_value(), j5.twice_value(), j6.twice_value()};
  const auto key = pack(v, 6);
  if (key) {
    if (auto hit = cache().find(*key)) return *hit;
  }
  const double r = racah_6j(v[0], v[1], v[2], v[3], v[4], v[5]);
  if (key) cache().store(*key, r);
  return r;
}

DipoleElement dipole_element(HalfInt ground_f, HalfInt ground_m, HalfInt excited_f,
                             HalfInt excited_m, int q) {
  const auto is_cs_f = [](HalfInt f) {
    return f == HalfInt::integer(3) || f == HalfInt::integer(4);
  };
  if (!is_cs_f(ground_f) || !is_cs_f(excited_f))
    throw std::domain_error("Cs D1 hyperfine levels are F=3,4; got " + ground_f.str() + " -> " +
                            excited_f.str());
  if (q < -1 || q > 1) throw std::domain_error("spherical component q must be -1, 0 or +1");
  check_pair(ground_f, ground_m);
  check_pair(excited_f, excited_m);

  DipoleElement e{ground_f, ground_m, excited_f, excited_m, q, 0.0};
  if (excited_m != ground_m + HalfInt::integer(q)) return e;

  const HalfInt j = HalfInt::twice(1);
  const HalfInt jp = HalfInt::twice(1);
  const HalfInt nuc = HalfInt::twice(7);
  const HalfInt one = HalfInt::integer(1);
  const int f = ground_f.as_int();
  const int fp = excited_f.as_int();

  // <F'||d||F> = (-1)^(J'+I+F+1) sqrt((2F'+1)(2F+1)) {J' F' I; F J 1} <J'||d||J>
  const int reduced_phase = (jp + nuc + ground_f + one).as_int();
  double reduced = std::sqrt(static_cast<double>((2 * fp + 1) * (2 * f + 1))) *
                   wigner6j(jp, excited_f, nuc, ground_f, j, one);
  if (reduced_phase % 2 != 0) reduced = -reduced;

  // <F' m'|d_q|F m> = (-1)^(F'-m') (F' 1 F; -m' q m) <F'||d||F>
  const int phase = (excited_f - excited_m).as_int();
  double three_j =
      wigner3j(excited_f, one, ground_f, -excited_m, HalfInt::integer(q), ground_m);
  if (phase % 2 != 0) three_j = -three_j;
  e.amplitude = three_j * reduced;
  return e;
}

double dipole_amplitude(int ground_f, int ground_m, int excited_f, int excited_m, int q) {
  return dipole_element(HalfInt::integer(ground_f), HalfInt::integer(ground_m),
                        HalfInt::integer(excited_f), HalfInt::integer(excited_m), q)
      .amplitude;
}

}  // namespace clockprobe
