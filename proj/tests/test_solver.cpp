#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ehcrn/games.hpp"
#include "ehcrn/generate.hpp"
#include "ehcrn/oracle.hpp"
#include "ehcrn/solver.hpp"
#include "support.hpp"

using namespace ehcrn;
using doctest::Approx;

namespace {

std::vector<double> random_interference(std::mt19937_64& rng, std::size_t L, double hi) {
  std::vector<double> v(L);
  for (double& x : v) x = uniform_draw(rng, 0.0, hi);
  return v;
}

double su_value(const Scenario& sc, std::size_t user, const std::vector<double>& p,
                const std::vector<double>& interf) {
  return discounted_throughput(rates_against(sc, user, p, interf), sc);
}

}  // namespace

TEST_CASE("SU with no data sends nothing") {
  auto d = testing::blank_data(1, 3);
  d.harvest[1] = {50, 10, 10};
  d.gain[1][1] = {0.3, 0.2, 0.1};
  Scenario sc(d);
  auto rep = su_best_response(sc, 1, {0, 0, 0});
  CHECK(rep.status == SolveStatus::Optimal);
  CHECK(rep.objective == 0.0);
  for (double p : rep.schedule.power) CHECK(p == 0.0);
}

TEST_CASE("single data-limited slot gives e^Q - 1") {
  for (double Q : {0.3, 1.0, 2.5, 4.0}) {
    auto d = testing::blank_data(1, 1);
    d.arrivals[1] = {Q};
    d.harvest[1] = {1e6};
    d.gain[1][1] = {1.0};
    d.noise_watts = 1.0;
    Scenario sc(d);
    auto rep = su_best_response(sc, 1, {0.0});
    CHECK(rep.status == SolveStatus::Optimal);
    CHECK(rep.schedule.power[0] == Approx(std::expm1(Q)).epsilon(1e-8));
    CHECK(rep.objective == Approx(0.5 * Q).epsilon(1e-9));
  }
}

TEST_CASE("zero direct gain pins the slot power") {
  auto d = testing::blank_data(1, 3);
  d.arrivals[1] = {2, 2, 2};
  d.harvest[1] = {30, 30, 30};
  d.gain[1][1] = {0.2, 0.0, 0.3};
  Scenario sc(d);
  auto rep = su_best_response(sc, 1, {0.5, 0.5, 0.5});
  CHECK(rep.status == SolveStatus::Optimal);
  CHECK(rep.schedule.power[1] == 0.0);
  CHECK(rep.schedule.power[0] > 0.0);
}

TEST_CASE("SU solutions are feasible, certified and locally optimal") {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const std::size_t L = 1 + seed % 4;
    Scenario sc = random_scenario(seed, 2, L);
    const std::size_t user = 1 + seed % 2;
    auto I = random_interference(rng, L, 5.0);
    auto rep = su_best_response(sc, user, I);
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.kkt_residual <= 1e-7);
    CHECK(check_feasible(sc, rep.schedule, I, Role::Secondary).feasible);
    CHECK(rep.objective == Approx(su_value(sc, user, rep.schedule.power, I)).epsilon(1e-12));

    const double f0 = rep.objective;
    for (std::size_t l = 0; l < L; ++l) {
      for (double sign : {-1.0, 1.0}) {
        auto p = rep.schedule.power;
        p[l] = std::max(0.0, p[l] * (1.0 + sign * 1e-4) + sign * 1e-4);
        PowerSchedule s{user, p, {}, {}};
        if (!check_feasible(sc, s, I, Role::Secondary, 0.0).feasible) continue;
        CHECK(su_value(sc, user, p, I) <= f0 + 1e-8 * std::max(1.0, f0));
      }
    }
  }
}

TEST_CASE("SU objective never drops when harvest grows") {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t L = 1 + seed % 3;
    Scenario sc = random_scenario(seed + 300, 1, L);
    auto I = random_interference(rng, L, 3.0);
    ScenarioData d = sc.data();
    for (double& e : d.harvest[1]) e += uniform_draw(rng, 0.0, 10.0);
    const double before = su_best_response(sc, 1, I).objective;
    const double after = su_best_response(Scenario(d), 1, I).objective;
    CHECK(after >= before - 1e-8 * std::max(1.0, before));
  }
}

TEST_CASE("SU solver against the grid oracle") {
  std::mt19937_64 rng(21);
  const double h = 0.2;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t L = 1 + seed % 2;
    Scenario sc = random_scenario(seed + 700, 2, L);
    auto I = random_interference(rng, L, 4.0);
    auto rep = su_best_response(sc, 1, I);
    auto orc = oracle::su_best_response(sc, 1, I, {h});
    const double gap = rep.objective - orc.objective;
    CHECK(gap >= -1e-9);
    CHECK(gap <= oracle::lipschitz_gap(sc, 1, I, h) + 1e-9);
  }
}

TEST_CASE("PU with nothing to send and no interference stays off") {
  auto d = testing::blank_data(1, 3);
  d.harvest[0] = {100, 0, 0};
  d.gain[0][0] = {0.2, 0.2, 0.2};
  d.cost_cap = 50;
  Scenario sc(d);
  auto rep = pu_best_response(sc, std::vector<double>{0, 0, 0});
  CHECK(rep.status == SolveStatus::Optimal);
  CHECK(rep.objective == 0.0);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(rep.schedule.grid[l] == 0.0);
    CHECK(rep.schedule.battery[l] == 0.0);
  }
}

TEST_CASE("PU SIR floor with no supply is infeasible") {
  auto d = testing::blank_data(1, 3);
  d.arrivals[0] = {5, 0, 0};
  d.gain[0][0] = {0.2, 0.2, 0.2};
  d.cost_cap = 0;
  Scenario sc(d);
  auto rep = pu_best_response(sc, std::vector<double>{0, 3.0, 0});
  CHECK(rep.status == SolveStatus::Infeasible);
  CHECK_FALSE(rep.message.empty());
}

TEST_CASE("PU saturates at the arrival bound with a large cap") {
  auto f = testing::load_fixture("fig3");
  ScenarioData d = f.scenario.data();
  d.cost_cap = 50000;
  Scenario sc(d);
  Profile p = io::initial_profile(f);
  auto ne = lower_ne(sc, p);
  REQUIRE(ne.converged);
  auto rep = pu_best_response(sc, ne.schedules);
  CHECK(rep.status == SolveStatus::Optimal);
  CHECK(rep.objective == Approx(5.0).epsilon(1e-6));
  CHECK(check_feasible(sc, rep.schedule, interference_vector(ne.schedules, sc, 0),
                       Role::Primary).feasible);
}

TEST_CASE("PU solutions are feasible and monotone in the cap") {
  std::mt19937_64 rng(4);
  std::size_t solved = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const std::size_t L = 1 + seed % 4;
    Scenario sc = random_scenario(seed + 900, 2, L);
    auto I = random_interference(rng, L, 2.0);
    auto rep = pu_best_response(sc, I);
    if (rep.status == SolveStatus::Infeasible) continue;
    ++solved;
    REQUIRE(rep.status == SolveStatus::Optimal);
    CHECK(rep.kkt_residual <= 1e-7);
    CHECK(check_feasible(sc, rep.schedule, I, Role::Primary).feasible);

    ScenarioData d = sc.data();
    d.cost_cap *= 1.0 + unit_draw(rng);
    auto wider = pu_best_response(Scenario(d), I);
    REQUIRE(wider.status == SolveStatus::Optimal);
    CHECK(wider.objective >= rep.objective - 1e-8 * std::max(1.0, rep.objective));
  }
  CHECK(solved > 60);
}

TEST_CASE("PU solver against the grid oracle") {
  std::mt19937_64 rng(31);
  const double h = 0.25;
  std::size_t compared = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t L = 1 + seed % 2;
    Scenario sc = random_scenario(seed + 1200, 1, L);
    auto I = random_interference(rng, L, 2.0);
    auto rep = pu_best_response(sc, I);
    auto orc = oracle::pu_best_response(sc, I, {h});
    if (rep.status == SolveStatus::Infeasible) {
      CHECK(std::isinf(orc.objective));
      continue;
    }
    ++compared;
    const double gap = rep.objective - orc.objective;
    CHECK(gap >= -1e-9);
    CHECK(gap <= oracle::lipschitz_gap(sc, 0, I, h) + 1e-9);
  }
  CHECK(compared > 15);
}

TEST_CASE("canonical split matches the cheapest split") {
  std::mt19937_64 rng(12);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t L = 1 + seed % 3;
    Scenario sc = random_scenario(seed + 1500, 1, L);
    auto power = testing::random_powers(rng, sc, 0, 2.0);
    auto split = canonical_split(sc, power);
    auto lp = oracle::min_cost_split(sc, power);
    REQUIRE(lp.feasible);
    CHECK(split.cost == Approx(lp.cost).epsilon(1e-12).scale(1.0));
    CHECK(std::abs(split.cost - lp.cost) <= 1e-9 * std::max(1.0, lp.cost));
    for (std::size_t l = 0; l < L; ++l) {
      CHECK(split.grid[l] >= 0.0);
      CHECK(split.battery[l] >= 0.0);
      CHECK(split.grid[l] + split.battery[l] == Approx(power[l]));
    }
  }
}

TEST_CASE("canonical split drains the battery on expensive slots first") {
  auto d = testing::blank_data(1, 3);
  d.harvest[0] = {10, 0, 0};
  d.price = {1.0, 3.0, 2.0};
  Scenario sc(d);
  auto s = canonical_split(sc, {8, 8, 8});
  CHECK(s.battery == std::vector<double>{0, 8, 2});
  CHECK(s.grid == std::vector<double>{8, 0, 6});
  CHECK(s.cost == Approx(20.0));
  auto sched = primary_schedule(sc, {8, 8, 8});
  CHECK(sched.grid == s.grid);
}
