#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace bfep {

/// Monetary amounts are kept in integer cents so cost accounting stays exact.
using Money = std::int64_t;

constexpr Money kMoneyInfinity = std::numeric_limits<Money>::max();

inline Money money_from_dollars(double dollars) {
  return static_cast<Money>(std::llround(dollars * 100.0));
}

inline double money_to_dollars(Money cents) { return static_cast<double>(cents) / 100.0; }

inline std::string money_to_string(Money cents) {
  const bool neg = cents < 0;
  const std::int64_t a = neg ? -cents : cents;
  std::string s = (neg ? "-$" : "$") + std::to_string(a / 100);
  const auto frac = a % 100;
  if (frac != 0) {
    s += ".";
    if (frac < 10) s += "0";
    s += std::to_string(frac);
  }
  return s;
}

}  // namespace bfep
