#pragma once

// Online play: every slot the PU and SUs run a one-slot Stackelberg game with
// closed-form greedy responses, the PU amortizing its remaining grid budget
// uniformly over the remaining slots. Only the current slot's state is visible
// to the per-slot routines.

#include <cstddef>
#include <vector>

#include "ehcrn/games.hpp"
#include "ehcrn/model.hpp"

namespace ehcrn {

/// Everything realized up to and including slot `slot`, nothing later.
struct SlotState {
  std::size_t slot = 0;        // zero-based
  std::size_t slots_left = 1;  // this slot included
  double tau = 1.0;
  double noise = 0.0;
  double sir_threshold = 0.0;
  double price = 0.0;
  double budget = 0.0;                     // PU grid budget at the start of the slot
  std::vector<double> queue;               // per user
  std::vector<double> battery;             // per user
  std::vector<std::vector<double>> gain;   // [tx][rx] in this slot
  std::vector<double> arrivals;            // arriving during this slot, per user
  std::vector<double> harvest;             // harvested during this slot, per user

  std::size_t n_users() const noexcept { return queue.size(); }
};

struct GogOptions {
  double tol_inner = 1e-8;
  double tol_outer = 1e-7;
  std::size_t max_inner = 1000;
  std::size_t max_outer = 1000;
  double grid_hard_cap = 1e9;  // grid share in zero-price slots
};

/// Greedy SU power: drain the queue if the battery allows, else the battery.
double su_greedy(const SlotState& s, std::size_t user, double interf);

struct PuGreedy {
  double power = 0.0;
  double grid = 0.0;
  double battery = 0.0;
  bool sir_binding = false;  // power raised to the SIR floor
  bool sir_unmet = false;    // floor above what battery + budget share can supply
};

/// Grid power the PU may buy this slot: budget / (slots_left * price).
double grid_share(const SlotState& s, double grid_hard_cap = 1e9);

PuGreedy pu_greedy(const SlotState& s, double interf, double grid_hard_cap = 1e9);

/// Interference at `user` from the one-slot powers of everyone else.
double slot_interference(const SlotState& s, const std::vector<double>& power, std::size_t user);

struct SlotOutcome {
  std::vector<double> power;  // all users
  double grid = 0.0;
  double battery = 0.0;
  bool converged = false;
  std::size_t outer_iterations = 0;
  std::size_t inner_sweeps = 0;
  bool sir_binding = false;
  bool sir_unmet = false;
};

/// Nested greedy fixed point for one slot starting from PU power `init_pu`.
SlotOutcome gog_slot(const SlotState& s, double init_pu, const GogOptions& opts = {});

struct GogResult {
  EquilibriumResult equilibrium;     // history: one record per slot
  std::vector<Trajectory> trajectories;
  std::vector<SlotOutcome> slots;
};

/// Builds the state of slot `slot` from the scenario and the running
/// queue/battery/budget values.
SlotState make_slot_state(const Scenario& sc, std::size_t slot, const std::vector<double>& queue,
                          const std::vector<double>& battery, double budget);

/// Plays every slot in order, committing powers and updating queues,
/// batteries and the grid budget. Served data per slot is capped by the
/// queue content.
GogResult gog_run(const Scenario& sc, const GogOptions& opts = {});

}  // namespace ehcrn
