#pragma once

// Brute-force reference implementations for small instances (L <= 3).
// Nothing here calls into the interior-point solver; schedules are found by
// exhaustive enumeration over a power grid, with the binding values of the
// causality constraints injected as extra candidates.

#include <cstddef>
#include <vector>

#include "ehcrn/model.hpp"
#include "ehcrn/online.hpp"

namespace ehcrn::oracle {

struct GridSpec {
  double step = 1.0;                   // power resolution (W)
  std::size_t max_evaluations = 10'000'000;
  bool descending = false;             // enumeration order; results do not depend on it
};

struct OracleResult {
  PowerSchedule schedule;
  double objective = 0.0;
  std::size_t evaluated = 0;  // leaves visited
};

/// Maximizes T_user against fixed interference over grid schedules.
/// Ties go to the lexicographically smallest power vector.
OracleResult su_best_response(const Scenario& sc, std::size_t user,
                              const std::vector<double>& interf, const GridSpec& grid);

/// PU counterpart: grid over P0; a schedule is admissible when some split
/// meets battery causality and the grid-cost cap (checked by an exact
/// vertex-enumeration LP), plus data causality and the SIR floor.
OracleResult pu_best_response(const Scenario& sc, const std::vector<double>& pu_interf,
                              const GridSpec& grid);

/// Cheapest grid cost of serving `power` (battery prefix causality, 0 <= W <= P),
/// and the battery part achieving it. Solved by enumerating LP vertices, so it
/// is meant for short horizons only.
struct SplitLp {
  bool feasible = false;
  double cost = 0.0;
  std::vector<double> battery;
};
SplitLp min_cost_split(const Scenario& sc, const std::vector<double>& power);

/// Largest loss in T from rounding every slot power down to the grid:
/// step * tau * sum_l discount(l) * g_ii[l] / (noise + interf[l]).
double lipschitz_gap(const Scenario& sc, std::size_t user, const std::vector<double>& interf,
                     double step);

struct OracleNe {
  Profile schedules;
  bool converged = false;  // grid fixed point reached
  bool cycled = false;     // a profile repeated without being a fixed point
  std::size_t sweeps = 0;
  /// Per SU: grid best response value minus current value at the returned
  /// profile (0 at a certified grid fixed point).
  std::vector<double> certificate;
};

/// Gauss-Seidel iteration of grid best responses among the SUs with the PU
/// schedule in `init` held fixed.
OracleNe ne(const Scenario& sc, const Profile& init, const GridSpec& grid,
            std::size_t max_sweeps = 200);

/// One-slot game on a grid: SUs and the PU take turns (SUs in index order,
/// then the PU) playing grid best responses of the one-slot programs until
/// no one moves. The PU ranks candidates by SIR shortfall, then by served
/// rate min(capacity, Q/tau), then by smaller power.
struct SlotNe {
  std::vector<double> power;  // all users
  bool converged = false;
  std::size_t rounds = 0;
};
SlotNe slot_ne(const SlotState& s, double step, double grid_hard_cap = 1e9,
               std::size_t max_rounds = 500);

}  // namespace ehcrn::oracle
