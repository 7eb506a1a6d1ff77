#include "ehcrn/generate.hpp"

namespace ehcrn {

Scenario random_scenario(std::uint64_t seed, std::size_t n_su, std::size_t horizon,
                         CostCapScope scope, const GenRanges& r) {
  std::mt19937_64 rng(seed);
  const std::size_t users = n_su + 1;
  ScenarioData d;
  d.n_su = n_su;
  d.horizon = horizon;
  d.slot_seconds = r.slot_seconds;
  d.noise_watts = r.noise;
  d.gain.assign(users, std::vector<std::vector<double>>(users, std::vector<double>(horizon)));
  for (std::size_t j = 0; j < users; ++j) {
    for (std::size_t i = 0; i < users; ++i) {
      for (std::size_t l = 0; l < horizon; ++l) {
        d.gain[j][i][l] = i == j ? uniform_draw(rng, r.direct_gain_lo, r.direct_gain_hi)
                                 : uniform_draw(rng, 0.0, r.cross_gain_hi);
      }
    }
  }
  d.arrivals.assign(users, std::vector<double>(horizon));
  d.harvest.assign(users, std::vector<double>(horizon));
  for (std::size_t i = 0; i < users; ++i) {
    for (std::size_t l = 0; l < horizon; ++l) {
      d.arrivals[i][l] = uniform_draw(rng, 0.0, r.arrival_hi);
      d.harvest[i][l] = uniform_draw(rng, 0.0, r.harvest_hi);
    }
  }
  d.price.resize(horizon);
  for (double& c : d.price) c = uniform_draw(rng, r.price_lo, r.price_hi);
  d.cost_cap = uniform_draw(rng, 0.0, r.cost_cap_hi);
  d.cost_cap_scope = scope;
  d.sir_threshold = uniform_draw(rng, 0.0, r.sir_hi);
  return Scenario(std::move(d));
}

}  // namespace ehcrn
