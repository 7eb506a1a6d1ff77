#include "ehcrn/online.hpp"

#include <algorithm>
#include <cmath>

namespace ehcrn {

double su_greedy(const SlotState& s, std::size_t user, double interf) {
  const double g = s.gain.at(user).at(user);
  if (g <= 0.0) return 0.0;
  const double energy_cap = s.battery.at(user) / s.tau;
  const double data_cap = std::expm1(s.queue.at(user) / s.tau) * (s.noise + interf) / g;
  return std::max(0.0, std::min(energy_cap, data_cap));
}

double grid_share(const SlotState& s, double grid_hard_cap) {
  if (s.price <= 0.0) return grid_hard_cap;
  const double share = std::max(s.budget, 0.0) / (static_cast<double>(s.slots_left) * s.price);
  return std::min(share, grid_hard_cap);
}

PuGreedy pu_greedy(const SlotState& s, double interf, double grid_hard_cap) {
  PuGreedy out;
  const double share = grid_share(s, grid_hard_cap);
  const double supply = s.battery.at(kPrimaryUser) / s.tau + share;
  const double g = s.gain.at(kPrimaryUser).at(kPrimaryUser);
  const double data_cap =
      g > 0.0 ? std::expm1(s.queue.at(kPrimaryUser) / s.tau) * (s.noise + interf) / g : 0.0;
  double p = std::max(0.0, std::min(supply, data_cap));
  const double floor = s.sir_threshold * interf;
  if (p < floor) {
    out.sir_binding = true;
    out.sir_unmet = floor > supply;
    p = std::min(floor, supply);
  }
  out.power = p;
  out.grid = std::min(p, share);
  out.battery = p - out.grid;
  return out;
}

double slot_interference(const SlotState& s, const std::vector<double>& power, std::size_t user) {
  double sum = 0.0;
  for (std::size_t j = 0; j < power.size(); ++j) {
    if (j != user) sum += power[j] * s.gain.at(j).at(user);
  }
  return sum;
}

SlotOutcome gog_slot(const SlotState& s, double init_pu, const GogOptions& opts) {
  const std::size_t users = s.n_users();
  SlotOutcome out;
  out.power.assign(users, 0.0);
  out.power[kPrimaryUser] = init_pu;

  // A PU move the SUs cannot hear leaves their responses valid.
  bool pu_heard = false;
  for (std::size_t i = 1; i < users; ++i) pu_heard = pu_heard || s.gain.at(kPrimaryUser).at(i) > 0.0;

  PuGreedy pu;
  for (std::size_t k = 1; k <= opts.max_outer; ++k) {
    // SU game for the current PU power (Gauss-Seidel sweeps)
    for (std::size_t m = 1; m <= opts.max_inner; ++m) {
      double stale = 0.0;
      for (std::size_t i = 1; i < users; ++i) {
        const double p = su_greedy(s, i, slot_interference(s, out.power, i));
        if (i >= 2) stale = std::max(stale, std::abs(p - out.power[i]));
        out.power[i] = p;
      }
      ++out.inner_sweeps;
      if (stale <= opts.tol_inner) break;
    }
    pu = pu_greedy(s, slot_interference(s, out.power, kPrimaryUser), opts.grid_hard_cap);
    const double delta = std::abs(pu.power - out.power[kPrimaryUser]);
    out.power[kPrimaryUser] = pu.power;
    out.outer_iterations = k;
    if (delta <= opts.tol_outer || !pu_heard) {
      out.converged = true;
      break;
    }
  }
  out.grid = pu.grid;
  out.battery = pu.battery;
  out.sir_binding = pu.sir_binding;
  out.sir_unmet = pu.sir_unmet;
  return out;
}

SlotState make_slot_state(const Scenario& sc, std::size_t slot, const std::vector<double>& queue,
                          const std::vector<double>& battery, double budget) {
  const std::size_t users = sc.n_users();
  const std::size_t L = sc.horizon();
  SlotState s;
  s.slot = slot;
  s.slots_left = L - slot;
  s.tau = sc.tau();
  s.noise = sc.noise();
  s.sir_threshold = sc.sir_threshold();
  s.price = sc.price(slot);
  s.budget = budget;
  s.queue = queue;
  s.battery = battery;
  s.gain.assign(users, std::vector<double>(users, 0.0));
  s.arrivals.assign(users, 0.0);
  s.harvest.assign(users, 0.0);
  for (std::size_t j = 0; j < users; ++j) {
    for (std::size_t i = 0; i < users; ++i) s.gain[j][i] = sc.gain(j, i, slot);
    if (slot + 1 < L) {
      s.arrivals[j] = sc.arrival(j, slot + 1);
      s.harvest[j] = sc.harvest(j, slot + 1);
    }
  }
  return s;
}

GogResult gog_run(const Scenario& sc, const GogOptions& opts) {
  const std::size_t users = sc.n_users();
  const std::size_t L = sc.horizon();
  const double tau = sc.tau();
  GogResult res;
  EquilibriumResult& eq = res.equilibrium;
  eq.schedules = zero_profile(sc);
  res.trajectories.resize(users);
  for (std::size_t i = 0; i < users; ++i) {
    Trajectory& t = res.trajectories[i];
    t.queue.assign(L + 1, 0.0);
    t.battery.assign(L + 1, 0.0);
    t.rates.assign(L, 0.0);
    t.interference.assign(L, 0.0);
    t.queue[0] = sc.arrival(i, 0);
    t.battery[0] = sc.harvest(i, 0);
  }
  Trajectory& pu_traj = res.trajectories[kPrimaryUser];
  pu_traj.budget.assign(L + 1, 0.0);
  pu_traj.budget[0] = sc.online_budget();

  std::vector<double> queue(users), battery(users);
  double prev_pu = 0.0;
  eq.converged = true;
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t i = 0; i < users; ++i) {
      queue[i] = res.trajectories[i].queue[l];
      battery[i] = res.trajectories[i].battery[l];
    }
    const SlotState s = make_slot_state(sc, l, queue, battery, pu_traj.budget[l]);
    SlotOutcome o = gog_slot(s, prev_pu, opts);
    prev_pu = o.power[kPrimaryUser];
    eq.converged = eq.converged && o.converged;

    for (std::size_t i = 0; i < users; ++i) {
      Trajectory& t = res.trajectories[i];
      const double interf = slot_interference(s, o.power, i);
      const double capacity = instant_rate(o.power[i], s.gain[i][i], s.noise, interf);
      const double served = std::min(capacity, std::max(s.queue[i], 0.0) / tau);
      const double drain = i == kPrimaryUser ? o.battery : o.power[i];
      t.interference[l] = interf;
      t.rates[l] = served;
      t.queue[l + 1] = s.queue[i] - served * tau + s.arrivals[i];
      t.battery[l + 1] = s.battery[i] - drain * tau + s.harvest[i];
      eq.schedules[i].power[l] = o.power[i];
    }
    eq.schedules[kPrimaryUser].grid[l] = o.grid;
    eq.schedules[kPrimaryUser].battery[l] = o.battery;
    pu_traj.budget[l + 1] = pu_traj.budget[l] - s.price * o.grid;

    IterationRecord rec;
    rec.iteration = l + 1;
    rec.inner_sweeps = o.outer_iterations;
    rec.utilities.resize(users);
    for (std::size_t i = 0; i < users; ++i) {
      // running utility: slots not yet played contribute zero rate
      rec.utilities[i] = discounted_throughput(res.trajectories[i].rates, sc);
    }
    eq.history.push_back(std::move(rec));
    res.slots.push_back(std::move(o));
  }
  eq.iterations = L;
  eq.utilities.resize(users);
  for (std::size_t i = 0; i < users; ++i) {
    eq.utilities[i] = discounted_throughput(res.trajectories[i].rates, sc);
  }
  return res;
}

}  // namespace ehcrn
