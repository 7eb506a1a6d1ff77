#pragma once

// Scenario files (JSON) and CSV emitters.
//
// Scenario document:
//   {
//     "name": "fig2",
//     "n_su": 2, "horizon": 3,
//     "slot_seconds": 1.0, "noise_watts": 0.1,
//     "gain_tx_rx": [[[..L..] x (N+1) receivers] x (N+1) transmitters],
//     "arrivals_nats": [[..L..] x (N+1)],       // index 0 = initial buffer
//     "harvest_joules": [[..L..] x (N+1)],      // index 0 = initial battery
//     "price_per_joule": [..L..],
//     "cost_cap": 100, "cost_cap_scope": "average" | "total",
//     "sir_threshold": 0.01,
//     "initial": {                               // optional
//       "pu_power_watts": [..L..],
//       "su_power_watts": [[..L..] x N]
//     },
//     "run": { "eta": 0.9, "sweep_var": "cost_cap", "sweep_values": [...] }   // optional
//   }

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ehcrn/games.hpp"
#include "ehcrn/model.hpp"
#include "ehcrn/online.hpp"

namespace ehcrn::io {

struct InitialPoint {
  std::vector<double> pu_power;
  std::vector<std::vector<double>> su_power;
};

struct RunDefaults {
  std::optional<double> eta;
  std::optional<std::string> sweep_var;
  std::vector<double> sweep_values;
};

struct ScenarioFile {
  std::string name;
  Scenario scenario;
  std::optional<InitialPoint> initial;
  RunDefaults run;
};

/// Throws DomainError naming the offending field on schema violations.
ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::filesystem::path& path);

std::string dump_scenario(const ScenarioFile& file);
void save_scenario(const ScenarioFile& file, const std::filesystem::path& path);

/// Starting profile: the file's initial point when present, zeros otherwise.
Profile initial_profile(const ScenarioFile& file);

/// 10 significant digits, '.' decimal point, locale independent.
std::string format_number(double v);

void write_utilities_csv(std::ostream& os, const Scenario& sc, const std::vector<double>& utilities,
                         const std::vector<Trajectory>& trajectories);
void write_trajectory_csv(std::ostream& os, const Scenario& sc, const Profile& profile,
                          const std::vector<Trajectory>& trajectories);
void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history,
                       std::size_t n_users);

}  // namespace ehcrn::io
