#pragma once

// Seeded random scenarios for property tests and the `gen` CLI mode.
// Draws use std::mt19937_64 with explicit bit-to-double conversion, so a seed
// gives the same instance on every platform.

#include <cstddef>
#include <cstdint>
#include <random>

#include "ehcrn/model.hpp"

namespace ehcrn {

struct GenRanges {
  double direct_gain_lo = 0.05, direct_gain_hi = 0.5;
  double cross_gain_hi = 0.2;
  double noise = 0.1;
  double arrival_hi = 3.0;    // nats per entry
  double harvest_hi = 20.0;   // joules per entry
  double price_lo = 0.5, price_hi = 2.0;
  double cost_cap_hi = 20.0;
  double sir_hi = 0.05;
  double slot_seconds = 1.0;
};

/// Uniform in [0, 1) from the top 53 bits.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_draw(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_draw(rng);
}

Scenario random_scenario(std::uint64_t seed, std::size_t n_su, std::size_t horizon,
                         CostCapScope scope = CostCapScope::Total, const GenRanges& r = {});

}  // namespace ehcrn
