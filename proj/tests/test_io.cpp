#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ehcrn/games.hpp"
#include "ehcrn/generate.hpp"
#include "ehcrn/scenario_io.hpp"
#include "support.hpp"

using namespace ehcrn;

namespace {

std::string error_of(const std::string& text) {
  try {
    io::parse_scenario(text);
  } catch (const DomainError& e) {
    return e.what();
  }
  return {};
}

std::string fig2_text() {
  std::ifstream in(testing::fixture("fig2"));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string with(const std::string& key, const nlohmann::json& value) {
  auto doc = nlohmann::json::parse(fig2_text());
  doc[key] = value;
  return doc.dump();
}

}  // namespace

TEST_CASE("every fixture loads") {
  for (const char* name : {"fig1", "fig1_caption", "fig2", "fig3"}) {
    CAPTURE(name);
    auto f = testing::load_fixture(name);
    CHECK(f.name == name);
    CHECK(f.scenario.n_su() == 2);
    CHECK(f.scenario.horizon() == 3);
    CHECK(f.scenario.tau() == 1.0);
    CHECK(f.scenario.noise() == 0.1);
    CHECK(f.initial.has_value());
  }
}

TEST_CASE("fig1 parameters") {
  const Scenario& sc = testing::load_fixture("fig1").scenario;
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(sc.gain(1, 1, l) == std::vector<double>{0.1, 0.15, 0.13}[l]);
    CHECK(sc.harvest(1, l) == std::vector<double>{360, 350, 340}[l]);
    CHECK(sc.arrival(1, l) == std::vector<double>{1, 2, 1}[l]);
  }
  auto f = testing::load_fixture("fig1");
  CHECK(f.initial->pu_power == std::vector<double>{100, 100, 100});
  CHECK(testing::load_fixture("fig1_caption").initial->pu_power == std::vector<double>{20, 20, 20});
}

TEST_CASE("fig2 parameters") {
  auto f = testing::load_fixture("fig2");
  const Scenario& sc = f.scenario;
  CHECK(sc.sir_threshold() == 0.01);
  CHECK(sc.cost_cap() == 100.0);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(sc.price(l) == std::vector<double>{1, 1.2, 0.9}[l]);
    CHECK(sc.arrival(0, l) == std::vector<double>{3, 5, 8}[l]);
    CHECK(sc.harvest(0, l) == std::vector<double>{600, 500, 450}[l]);
  }
  CHECK(f.run.eta == 0.9);
}

TEST_CASE("fig3 sweep defaults") {
  auto f = testing::load_fixture("fig3");
  CHECK(f.run.sweep_var == "cost_cap");
  CHECK(f.run.sweep_values.size() == 14);
  CHECK(f.run.sweep_values.front() == 0.0);
  CHECK(f.run.sweep_values.back() == 50000.0);
  std::vector<double> rates = {3, 4, 3};
  for (std::size_t l = 0; l < 3; ++l) CHECK(f.scenario.arrival(0, l) == rates[l]);
}

TEST_CASE("schema errors name the field") {
  CHECK(error_of(with("arrivals_nats", nlohmann::json::array())).rfind("arrivals_nats", 0) == 0);
  CHECK(error_of(with("harvest_joules", {{1, 2, 3}, {1, 2}, {1, 2, 3}})).rfind("harvest_joules[1]", 0) == 0);
  CHECK(error_of(with("price_per_joule", {1, "x", 1})).rfind("price_per_joule[1]", 0) == 0);
  CHECK(error_of(with("noise_watts", 0)).rfind("noise_watts", 0) == 0);
  CHECK(error_of(with("cost_cap_scope", "weekly")).rfind("cost_cap_scope", 0) == 0);
  CHECK(error_of(with("n_su", -1)).rfind("n_su", 0) == 0);
  CHECK(error_of(with("run", 3)).rfind("run", 0) == 0);
  CHECK(error_of(with("name", 5)).rfind("name", 0) == 0);
  CHECK(error_of("{").rfind("scenario", 0) == 0);
  CHECK(error_of("[]").rfind("scenario", 0) == 0);
  auto doc = nlohmann::json::parse(fig2_text());
  doc.erase("sir_threshold");
  CHECK(error_of(doc.dump()).rfind("sir_threshold: missing", 0) == 0);
  doc = nlohmann::json::parse(fig2_text());
  doc["initial"]["pu_power_watts"] = {1, 2};
  CHECK(error_of(doc.dump()).rfind("initial.pu_power_watts", 0) == 0);
  CHECK_THROWS_AS(io::load_scenario("/nonexistent/file.json"), DomainError);
}

TEST_CASE("dump then parse is the identity") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    io::ScenarioFile f{"r" + std::to_string(seed),
                       random_scenario(seed, 1 + seed % 3, 1 + seed % 4,
                                       seed % 2 ? CostCapScope::Total : CostCapScope::Average),
                       std::nullopt, {}};
    if (seed % 3 == 0) f.run.eta = 0.25;
    auto back = io::parse_scenario(io::dump_scenario(f));
    CHECK(back.scenario == f.scenario);
    CHECK(back.name == f.name);
    CHECK(back.run.eta == f.run.eta);
  }
  auto fig = testing::load_fixture("fig3");
  auto again = io::parse_scenario(io::dump_scenario(fig));
  CHECK(again.scenario == fig.scenario);
  CHECK(again.initial->pu_power == fig.initial->pu_power);
  CHECK(again.run.sweep_values == fig.run.sweep_values);

  const auto path = std::filesystem::temp_directory_path() / "ehcrn_roundtrip.json";
  io::save_scenario(fig, path);
  CHECK(io::load_scenario(path).scenario == fig.scenario);
  std::filesystem::remove(path);
}

TEST_CASE("initial_profile") {
  auto f = testing::load_fixture("fig1");
  Profile p = io::initial_profile(f);
  CHECK(p[0].power == std::vector<double>{100, 100, 100});
  CHECK(p[2].power == std::vector<double>{350, 350, 350});
  CHECK_FALSE(p[0].has_split());
  f.initial.reset();
  for (const auto& s : io::initial_profile(f))
    for (double v : s.power) CHECK(v == 0.0);
}

TEST_CASE("format_number") {
  CHECK(io::format_number(1.7620640531234) == "1.762064053");
  CHECK(io::format_number(0.0) == "0");
  CHECK(io::format_number(300.0) == "300");
  CHECK(io::format_number(-2.5) == "-2.5");
  CHECK(io::format_number(1.0 / 3.0) == "0.3333333333");
  CHECK(io::format_number(12345678901.0) == "1.23456789e+10");
}

TEST_CASE("CSV headers") {
  auto f = testing::load_fixture("fig2");
  const Scenario& sc = f.scenario;
  Profile p = io::initial_profile(f);
  p[0] = primary_schedule(sc, p[0].power);
  auto tr = roll_trajectory(sc, p);
  std::ostringstream u, t, h;
  io::write_utilities_csv(u, sc, utilities_of(sc, p), tr);
  io::write_trajectory_csv(t, sc, p, tr);
  IterationRecord rec;
  rec.iteration = 1;
  rec.utilities = {1, 2, 3};
  io::write_history_csv(h, {rec}, 3);
  CHECK(u.str().rfind("user,role,utility_T,mean_delay_D\n0,PU,", 0) == 0);
  CHECK(t.str().rfind("user,slot,queue_nats,battery_joules,budget,rate_nats_per_s,"
                      "interference_watts,power_watts,grid_watts,battery_watts\n", 0) == 0);
  CHECK(h.str() == "iteration,T0,T1,T2,max_change,inner_iterations,pu_iterate_feasible\n1,1,2,3,0,0,1\n");
  // 3 users x (L + 1) rows plus the header
  std::size_t lines = 0;
  for (char c : t.str()) lines += c == '\n';
  CHECK(lines == 1 + 3 * 4);
  CHECK(t.str().find("\n1,4,") != std::string::npos);
}
