#pragma once

#include <array>
#include <random>

#include "core/fields.hpp"

namespace omh::testing {

inline std::array<double, 6> random_state(std::mt19937_64& rng, double lo = -1.0,
                                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::array<double, 6> x;
  for (auto& v : x) v = u(rng);
  return x;
}

inline double max3(const std::array<double, 3>& a) {
  return std::max({std::fabs(a[0]), std::fabs(a[1]), std::fabs(a[2])});
}

}  // namespace omh::testing
