#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ehcrn/generate.hpp"
#include "ehcrn/model.hpp"
#include "ehcrn/scenario_io.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(EHCRN_SOURCE_DIR) / "fixtures" / (name + ".json");
}

inline ehcrn::io::ScenarioFile load_fixture(const std::string& name) {
  return ehcrn::io::load_scenario(fixture(name));
}

// Zero gains/arrivals/harvests, unit prices, noise 0.1, tau 1.
inline ehcrn::ScenarioData blank_data(std::size_t n_su, std::size_t horizon) {
  ehcrn::ScenarioData d;
  d.n_su = n_su;
  d.horizon = horizon;
  d.slot_seconds = 1.0;
  d.noise_watts = 0.1;
  const std::size_t users = n_su + 1;
  d.gain.assign(users, std::vector<std::vector<double>>(users, std::vector<double>(horizon, 0.0)));
  d.arrivals.assign(users, std::vector<double>(horizon, 0.0));
  d.harvest.assign(users, std::vector<double>(horizon, 0.0));
  d.price.assign(horizon, 1.0);
  d.cost_cap = 0.0;
  d.cost_cap_scope = ehcrn::CostCapScope::Total;
  d.sir_threshold = 0.01;
  return d;
}

// Golden-section search for the maximum of a unimodal f on [lo, hi], with
// the endpoints checked separately since one-slot optima often sit on a bound.
inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double xtol = 1e-12) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc >= fd) {
      b = d; d = c; fd = fc;
      c = b - r * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + r * (b - a); fd = f(d);
    }
  }
  double x = 0.5 * (a + b);
  double best = f(x);
  if (f(lo) >= best) { x = lo; best = f(lo); }
  if (f(hi) > best) x = hi;
  return x;
}

// Random schedule for `user` inside its harvested-energy budget, not
// necessarily feasible for the data constraint.
inline std::vector<double> random_powers(std::mt19937_64& rng, const ehcrn::Scenario& sc,
                                         std::size_t user, double scale = 1.0) {
  auto pb = ehcrn::prefix_bounds(sc, user);
  std::vector<double> p(sc.horizon());
  double used = 0.0;
  for (std::size_t l = 0; l < sc.horizon(); ++l) {
    double room = std::max(0.0, pb.energy_cum[l] / sc.tau() - used);
    p[l] = scale * room * ehcrn::unit_draw(rng);
    used += p[l];
  }
  return p;
}

inline ehcrn::Profile random_profile(std::mt19937_64& rng, const ehcrn::Scenario& sc,
                                     double scale = 1.0) {
  ehcrn::Profile p = ehcrn::zero_profile(sc);
  for (std::size_t u = 0; u < sc.n_users(); ++u) p[u].power = random_powers(rng, sc, u, scale);
  p[0].battery = p[0].power;  // battery-only split
  return p;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
