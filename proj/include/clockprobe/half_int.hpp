#pragma once

#include <compare>
#include <cstdlib>
#include <string>

namespace clockprobe {

// Angular-momentum quantum number stored doubled so half-integers are exact.
class HalfInt {
public:
  constexpr HalfInt() = default;

  static constexpr HalfInt twice(int doubled) { return HalfInt(doubled); }
  static constexpr HalfInt integer(int value) { return HalfInt(2 * value); }

  constexpr int twice_value() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  // Only valid when is_integer().
  constexpr int as_int() const { return twice_ / 2; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }

  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const {
    if (is_integer()) return std::to_string(as_int());
    return std::to_string(twice_) + "/2";
  }

private:
  constexpr explicit HalfInt(int doubled) : twice_(doubled) {}
  int twice_ = 0;
};

constexpr HalfInt abs(HalfInt h) { return h.twice_value() < 0 ? -h : h; }

}  // namespace clockprobe
