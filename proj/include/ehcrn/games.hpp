#pragma once

// Off-line equilibrium procedures.
//
// lower_ne: iterated best response among the secondary users for a fixed PU
// schedule. neo: the PU alternates between letting the SUs settle at their
// equilibrium and re-optimizing its own (grid, battery) schedule against the
// interference they produce, moving a fraction eta towards the re-optimized
// schedule each round.

#include <cstddef>
#include <optional>
#include <vector>

#include "ehcrn/model.hpp"
#include "ehcrn/solver.hpp"

namespace ehcrn {

enum class SweepOrder { GaussSeidel, Jacobi };

struct NeOptions {
  double tol_ne = 1e-6;          // max elementwise power change per sweep
  std::size_t max_sweeps = 500;
  double ne_slack = 1e-6;        // allowed unilateral-deviation gain at a converged point
  SweepOrder order = SweepOrder::GaussSeidel;
  SolverOptions solver;
};

struct NeoOptions {
  double eta = 1.0;
  double tol_neo = 1e-5;         // max PU power change per outer iteration
  std::size_t max_outer = 500;
  NeOptions ne;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<double> utilities;  // all users, index 0 = PU
  double max_change = 0.0;        // SU sweep: max SU power change; NEO: max PU power change
  std::size_t inner_sweeps = 0;   // NEO only: sweeps of the lower equilibrium
  bool pu_iterate_feasible = true;  // NEO only: battery / cost / nonnegativity of P0^k
};

struct EquilibriumResult {
  Profile schedules;
  std::vector<double> utilities;
  std::vector<IterationRecord> history;
  bool converged = false;
  std::size_t iterations = 0;
  /// Largest gain any SU could obtain by deviating unilaterally from the
  /// returned profile (one extra best response each).
  double max_deviation_gain = 0.0;
  std::vector<double> deviation_gain;
};

/// Discounted throughput of every user for a profile.
std::vector<double> utilities_of(const Scenario& sc, const Profile& profile);

/// Iterated best response of the SUs given the PU schedule in `init[0]`.
/// `init` SU rows are the starting point; pass zero_profile() with the PU row
/// set for the default start.
EquilibriumResult lower_ne(const Scenario& sc, const Profile& init, const NeOptions& opts = {});

/// Unilateral-deviation gain of every SU at `profile` (index 0 unused).
std::vector<double> deviation_gains(const Scenario& sc, const Profile& profile,
                                    const SolverOptions& opts = {});

/// NE-based re-optimization loop. `init` supplies the initial PU schedule
/// (with its grid/battery split) and the initial SU powers.
/// Throws InfeasibleError when the PU program has no feasible point.
EquilibriumResult neo(const Scenario& sc, const Profile& init, const NeoOptions& opts = {});

/// True when the PU schedule satisfies every constraint that does not depend
/// on SU powers: nonnegativity, battery causality, grid-cost cap, V + W = P.
bool pu_schedule_admissible(const Scenario& sc, const PowerSchedule& pu, double tol = kFeasibilityTol);

}  // namespace ehcrn
