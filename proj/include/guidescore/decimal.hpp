#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace guidescore {

// Signed fixed-point decimal with four fractional digits. Clause points are
// sums of values like 3, -0.5 or 2.25, so keeping them in integer ticks makes
// earned/max totals exact and reports byte-reproducible.
class Points {
 public:
  static constexpr std::int64_t kScale = 10000;

  constexpr Points() = default;
  static constexpr Points from_ticks(std::int64_t ticks) {
    Points p;
    p.ticks_ = ticks;
    return p;
  }
  static constexpr Points whole(std::int64_t units) { return from_ticks(units * kScale); }
  // Rounds half away from zero to the nearest tick.
  static Points from_double(double value);

  constexpr std::int64_t ticks() const { return ticks_; }
  double to_double() const { return static_cast<double>(ticks_) / kScale; }
  // Shortest decimal rendering: "2.5", "-3", "0.0625".
  std::string to_string() const;

  constexpr bool is_zero() const { return ticks_ == 0; }
  constexpr int sign() const { return ticks_ > 0 ? 1 : (ticks_ < 0 ? -1 : 0); }
  constexpr Points abs() const { return from_ticks(ticks_ < 0 ? -ticks_ : ticks_); }

  constexpr Points operator-() const { return from_ticks(-ticks_); }
  constexpr Points& operator+=(Points o) {
    ticks_ += o.ticks_;
    return *this;
  }
  constexpr Points& operator-=(Points o) {
    ticks_ -= o.ticks_;
    return *this;
  }
  friend constexpr Points operator+(Points a, Points b) { return a += b; }
  friend constexpr Points operator-(Points a, Points b) { return a -= b; }
  friend constexpr auto operator<=>(Points, Points) = default;

 private:
  std::int64_t ticks_ = 0;
};

}  // namespace guidescore
