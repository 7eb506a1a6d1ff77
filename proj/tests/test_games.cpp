#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>

#include "ehcrn/games.hpp"
#include "ehcrn/generate.hpp"
#include "support.hpp"

using namespace ehcrn;
using doctest::Approx;

namespace {

// fig2 with every PU <-> SU coupling removed
Scenario decoupled_fig2() {
  ScenarioData d = testing::load_fixture("fig2").scenario.data();
  for (std::size_t i = 1; i <= d.n_su; ++i) {
    for (auto& g : d.gain[0][i]) g = 0.0;
    for (auto& g : d.gain[i][0]) g = 0.0;
  }
  return Scenario(d);
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("one secondary user settles in one sweep") {
  Scenario sc = random_scenario(42, 1, 3);
  Profile init = zero_profile(sc);
  init[0].power = {3, 1, 2};
  auto r = lower_ne(sc, init);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.history.size() == 1);
  auto br = su_best_response(sc, 1, interference_vector(init, sc, 1));
  CHECK(testing::max_abs_diff(r.schedules[1].power, br.schedule.power) == 0.0);
}

TEST_CASE("Algorithm 1 on the fig1 fixture") {
  for (const char* name : {"fig1", "fig1_caption"}) {
    CAPTURE(name);
    auto f = testing::load_fixture(name);
    auto r = lower_ne(f.scenario, io::initial_profile(f));
    CHECK(r.converged);
    CHECK(r.iterations <= 20);
    CHECK(r.max_deviation_gain <= 1e-6);
    for (std::size_t i = 1; i < f.scenario.n_users(); ++i)
      CHECK(check_feasible(f.scenario, r.schedules, i).feasible);
  }
}

TEST_CASE("Jacobi and Gauss-Seidel agree on fig1") {
  auto f = testing::load_fixture("fig1");
  NeOptions jac;
  jac.order = SweepOrder::Jacobi;
  auto gs = lower_ne(f.scenario, io::initial_profile(f));
  auto ja = lower_ne(f.scenario, io::initial_profile(f), jac);
  REQUIRE(ja.converged);
  CHECK(ja.max_deviation_gain <= 1e-6);
  for (std::size_t i = 1; i < 3; ++i)
    CHECK(testing::max_abs_diff(gs.schedules[i].power, ja.schedules[i].power) <= 1e-3);
}

TEST_CASE("converged lower equilibria are feasible and stable") {
  std::mt19937_64 rng(9);
  std::size_t converged = 0;
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    Scenario sc = random_scenario(seed + 4000, 1 + seed % 3, 1 + seed % 3);
    Profile init = zero_profile(sc);
    for (double& p : init[0].power) p = uniform_draw(rng, 0.0, 30.0);
    auto r = lower_ne(sc, init);
    CHECK(r.history.size() == r.iterations);
    for (std::size_t i = 1; i < sc.n_users(); ++i)
      CHECK(check_feasible(sc, r.schedules, i).feasible);
    if (!r.converged) continue;
    ++converged;
    CHECK(r.max_deviation_gain <= 1e-6);
    CHECK(r.schedules[0].power == init[0].power);
  }
  CHECK(converged >= 70);
}

TEST_CASE("decoupled NEO settles after its first PU update") {
  Scenario sc = decoupled_fig2();
  auto f = testing::load_fixture("fig2");
  NeoOptions o;
  o.eta = 1.0;
  auto r = neo(sc, io::initial_profile(f), o);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  Profile zeros = zero_profile(sc);
  auto pu = pu_best_response(sc, zeros);
  CHECK(testing::max_abs_diff(r.schedules[0].power, pu.schedule.power) <= 1e-5);
}

TEST_CASE("NEO on fig2 reaches the published utilities") {
  auto f = testing::load_fixture("fig2");
  std::size_t iters[2];
  int k = 0;
  for (double eta : {0.9, 0.3}) {
    NeoOptions o;
    o.eta = eta;
    auto r = neo(f.scenario, io::initial_profile(f), o);
    REQUIRE(r.converged);
    CHECK(std::abs(r.utilities[0] - 1.7620) <= 5e-3);
    CHECK(std::abs(r.utilities[1] - 0.7111) <= 5e-3);
    CHECK(std::abs(r.utilities[2] - 0.7938) <= 5e-3);
    for (const auto& rec : r.history) CHECK(rec.pu_iterate_feasible);
    for (std::size_t i = 0; i < f.scenario.n_users(); ++i)
      CHECK(check_feasible(f.scenario, r.schedules, i).feasible);
    iters[k++] = r.iterations;
  }
  CHECK(iters[1] > iters[0]);
}

TEST_CASE("converged NEO point is a fixed point") {
  auto f = testing::load_fixture("fig2");
  NeoOptions o;
  o.eta = 0.9;
  auto r = neo(f.scenario, io::initial_profile(f), o);
  REQUIRE(r.converged);
  auto ne = lower_ne(f.scenario, r.schedules);
  auto pu = pu_best_response(f.scenario, ne.schedules);
  CHECK(testing::max_abs_diff(pu.schedule.power, r.schedules[0].power) <= o.tol_neo / o.eta);
}

TEST_CASE("NEO iterates stay admissible on random instances") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Scenario sc = random_scenario(seed + 6000, 1 + seed % 2, 1 + seed % 3);
    NeoOptions o;
    o.eta = 0.5;
    auto r = neo(sc, zero_profile(sc), o);
    for (const auto& rec : r.history) CHECK(rec.pu_iterate_feasible);
    CHECK(pu_schedule_admissible(sc, r.schedules[0]));
    for (std::size_t i = 0; i < sc.n_users(); ++i) CHECK(check_feasible(sc, r.schedules, i).feasible);
  }
}

TEST_CASE("NEO reruns are bit-identical") {
  auto f = testing::load_fixture("fig2");
  NeoOptions o;
  o.eta = 0.9;
  auto a = neo(f.scenario, io::initial_profile(f), o);
  auto b = neo(f.scenario, io::initial_profile(f), o);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    CHECK(same_bits(a.history[k].utilities, b.history[k].utilities));
    CHECK(a.history[k].max_change == b.history[k].max_change);
  }
  for (std::size_t i = 0; i < a.schedules.size(); ++i)
    CHECK(same_bits(a.schedules[i].power, b.schedules[i].power));
}

TEST_CASE("NEO rejects bad inputs") {
  auto f = testing::load_fixture("fig2");
  NeoOptions o;
  for (double eta : {0.0, -0.5, 1.5}) {
    o.eta = eta;
    CHECK_THROWS_AS(neo(f.scenario, io::initial_profile(f), o), DomainError);
  }
  o.eta = 0.5;
  Profile p = io::initial_profile(f);
  p[0].power = {1e5, 0, 0};  // far above battery plus the cost cap
  CHECK_THROWS_AS(neo(f.scenario, p, o), DomainError);
  p = io::initial_profile(f);
  p.pop_back();
  CHECK_THROWS_AS(neo(f.scenario, p, o), DomainError);
}

TEST_CASE("NEO surfaces an infeasible PU program") {
  auto d = testing::blank_data(1, 2);
  d.arrivals[0] = {0, 0};      // PU has no data, so any SIR floor is unmeetable in rate terms
  d.arrivals[1] = {3, 3};
  d.harvest[1] = {50, 50};
  d.gain[0][0] = {0.2, 0.2};
  d.gain[1][1] = {0.3, 0.3};
  d.gain[1][0] = {0.1, 0.1};
  Scenario sc(d);
  CHECK_THROWS_AS(neo(sc, zero_profile(sc), {}), InfeasibleError);
}
