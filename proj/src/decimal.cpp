#include "guidescore/decimal.hpp"

#include <cmath>

namespace guidescore {

Points Points::from_double(double value) {
  return from_ticks(static_cast<std::int64_t>(std::llround(value * kScale)));
}

std::string Points::to_string() const {
  const std::int64_t mag = ticks_ < 0 ? -ticks_ : ticks_;
  std::string out = ticks_ < 0 ? "-" : "";
  out += std::to_string(mag / kScale);
  std::int64_t frac = mag % kScale;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 4 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out;
}

}  // namespace guidescore
