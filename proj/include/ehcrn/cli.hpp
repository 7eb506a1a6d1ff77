#pragma once

// Front end shared by the `ehcrn` tool and the tests: runs one mode on a
// scenario file and writes its artifacts to an output directory.
//
// Artifacts (all CSV numbers with 10 significant digits):
//   alg1 / neo / gog:
//     utilities.csv   user,role,utility_T,mean_delay_D
//     trajectory.csv  user,slot,queue_nats,battery_joules,budget,rate_nats_per_s,
//                     interference_watts,power_watts,grid_watts,battery_watts
//                     (slot L+1 is the terminal state, power columns empty)
//     history.csv     iteration,T0..TN,max_change,inner_iterations,pu_iterate_feasible
//                     (gog: one row per slot, running utilities, inner = outer iterations)
//     summary.json    mode, converged, iterations, utilities, delays, diagnostics
//   sweep:
//     sweep.csv       value,neo_eta,neo_converged,neo_iterations,neo_T0..neo_TN,
//                     gog_T0..gog_TN
//     point_<k>/      neo_* and gog_* copies of the single-run artifacts
//   gen:
//     scenario.json   random instance drawn from --seed

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ehcrn::cli {

enum class Mode { Alg1, Neo, Gog, Sweep, Gen };

enum ExitCode : int {
  kOk = 0,
  kValidationError = 2,
  kInfeasible = 3,
  kNotConverged = 4,
};

struct RunConfig {
  Mode mode = Mode::Neo;
  std::filesystem::path scenario;
  std::filesystem::path out_dir = "out";
  std::optional<double> eta;           // overrides the scenario file's run.eta
  std::optional<double> tol_ne;
  std::optional<double> tol_neo;
  std::optional<double> tol_gog;       // outer (PU) tolerance of the per-slot game
  std::optional<std::size_t> max_iter; // outer iterations / sweeps
  bool jacobi = false;
  std::string sweep_var;               // cost_cap | sir_threshold | noise_watts; empty: file, else cost_cap
  std::vector<double> sweep_values;    // empty: take run.sweep_values from the file
  bool eta_backoff = true;             // sweep: halve eta when NEO does not converge
  bool oracle_check = false;
  std::uint64_t seed = 1;
  std::size_t gen_n_su = 2;
  std::size_t gen_horizon = 3;
};

Mode parse_mode(const std::string& s);

/// "start:stop:step" (inclusive when stop lands on the grid).
std::vector<double> parse_range(const std::string& s);

/// Executes the configured mode. Progress and the summary go to `log`.
/// Returns an ExitCode; artifacts are written even when not converged.
int run(const RunConfig& config, std::ostream& log);

}  // namespace ehcrn::cli
