#pragma once

// Best responses for the two structured concave programs:
//   * a secondary user maximizing its discounted throughput under energy and
//     data causality, for a fixed interference vector;
//   * the primary user re-optimizing (grid, battery) power for fixed SU powers,
//     additionally bound by the grid-cost cap and its SIR floor.
//
// Both are solved in the rate domain: with r_l the slot rate and a_l the
// effective channel gain, power is expm1(r_l)/a_l, the objective is linear and
// energy causality becomes a sum of convex exponentials.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehcrn/model.hpp"

namespace ehcrn {

enum class SolveStatus { Optimal, MaxIter, Infeasible };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double tol_kkt = 1e-7;
  double tol_obj = 1e-8;         // relative
  double barrier_gap = 1e-10;    // relative duality gap targeted by the barrier path
  double mu_factor = 10.0;
  std::size_t max_newton = 200;  // per centering step
  double grid_hard_cap = 1e9;    // grid power bound in zero-price slots
};

struct SolveReport {
  PowerSchedule schedule;
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::MaxIter;
  std::string message;
};

class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Best response of secondary user `user` against interference `interf`.
SolveReport su_best_response(const Scenario& sc, std::size_t user,
                             const std::vector<double>& interf,
                             const SolverOptions& opts = {});

/// PU re-optimization for the given profile's SU powers (entry 0 is ignored).
SolveReport pu_best_response(const Scenario& sc, const Profile& profile,
                             const SolverOptions& opts = {});

/// Same, with the PU interference given directly.
SolveReport pu_best_response(const Scenario& sc, const std::vector<double>& pu_interf,
                             const SolverOptions& opts = {});

struct GridSplit {
  std::vector<double> grid;
  std::vector<double> battery;
  double cost = 0.0;
};

/// Cheapest way to supply `power` from battery and grid under energy
/// causality: battery energy goes to the most expensive slots first (earliest
/// slot on price ties), so the grid covers the cheapest slots. The grid-cost
/// cap is not enforced here; compare `cost` with the horizon budget.
GridSplit canonical_split(const Scenario& sc, const std::vector<double>& power);

/// A PU schedule for total power `power` using the canonical split.
PowerSchedule primary_schedule(const Scenario& sc, const std::vector<double>& power);

}  // namespace ehcrn
