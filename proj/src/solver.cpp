#include "ehcrn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ehcrn/barrier.hpp"

namespace ehcrn {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::MaxIter:
      return "max-iter";
    case SolveStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kPinned = static_cast<std::size_t>(-1);

barrier::Options barrier_options(const SolverOptions& o) {
  barrier::Options b;
  b.mu_factor = o.mu_factor;
  b.gap_tol = o.barrier_gap;
  b.max_newton = o.max_newton;
  return b;
}

SolveStatus finish_status(const barrier::Result& r, const SolverOptions& o) {
  if (r.status == barrier::Status::Infeasible) return SolveStatus::Infeasible;
  if (r.status == barrier::Status::Optimal && r.kkt_residual <= o.tol_kkt) return SolveStatus::Optimal;
  return SolveStatus::MaxIter;
}

// Largest eps in {1, 1/2, 1/4, ...} that makes x = eps on all variables
// strictly feasible; empty when none is found.
std::vector<double> uniform_interior(const barrier::Problem& p) {
  double eps = 1.0;
  for (int k = 0; k < 80; ++k, eps *= 0.5) {
    std::vector<double> x(p.n, eps);
    bool ok = true;
    for (const auto& c : p.constraints) {
      if (!(c.value(x) < 0.0)) {
        ok = false;
        break;
      }
    }
    if (ok) return x;
  }
  return {};
}

}  // namespace

GridSplit canonical_split(const Scenario& sc, const std::vector<double>& power) {
  const std::size_t L = sc.horizon();
  const double tau = sc.tau();
  const PrefixBounds pb = prefix_bounds(sc, kPrimaryUser);
  GridSplit s;
  s.battery.assign(L, 0.0);
  s.grid.assign(L, 0.0);

  std::vector<std::size_t> order(L);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sc.price(a) > sc.price(b); });

  // headroom[m] = energy_cum[m]/tau - sum_{k<=m} battery[k]
  std::vector<double> headroom(L);
  for (std::size_t m = 0; m < L; ++m) headroom[m] = pb.energy_cum[m] / tau;
  for (std::size_t l : order) {
    const double want = std::max(power.at(l), 0.0);
    double room = want;
    for (std::size_t m = l; m < L; ++m) room = std::min(room, headroom[m]);
    room = std::max(room, 0.0);
    s.battery[l] = room;
    for (std::size_t m = l; m < L; ++m) headroom[m] -= room;
  }
  for (std::size_t l = 0; l < L; ++l) {
    s.grid[l] = std::max(power[l], 0.0) - s.battery[l];
    s.cost += sc.price(l) * s.grid[l];
  }
  return s;
}

PowerSchedule primary_schedule(const Scenario& sc, const std::vector<double>& power) {
  PowerSchedule p;
  p.user = kPrimaryUser;
  p.power.resize(power.size());
  for (std::size_t l = 0; l < power.size(); ++l) p.power[l] = std::max(power[l], 0.0);
  GridSplit split = canonical_split(sc, p.power);
  p.grid = std::move(split.grid);
  p.battery = std::move(split.battery);
  return p;
}

SolveReport su_best_response(const Scenario& sc, std::size_t user,
                             const std::vector<double>& interf, const SolverOptions& opts) {
  if (user == kPrimaryUser || user >= sc.n_users()) {
    throw std::out_of_range("su_best_response: user must be a secondary user index");
  }
  const std::size_t L = sc.horizon();
  if (interf.size() != L) throw DomainError("su_best_response: interference length != horizon");
  for (double v : interf) {
    if (!(v >= 0.0)) throw DomainError("su_best_response: interference must be >= 0");
  }
  const double tau = sc.tau();
  const PrefixBounds pb = prefix_bounds(sc, user);

  std::vector<double> eff(L);
  std::vector<std::size_t> var(L, kPinned);
  barrier::Problem prob;
  for (std::size_t l = 0; l < L; ++l) {
    eff[l] = sc.gain(user, user, l) / (sc.noise() + interf[l]);
    // zero gain: rate is identically zero; no data or energy yet: nothing to send
    const bool pinned = eff[l] <= 0.0 || pb.data_cum[l] <= 0.0 || pb.energy_cum[l] <= 0.0;
    if (!pinned) {
      var[l] = prob.n++;
      prob.cost.push_back(-sc.discount(l) * tau);
    }
  }

  for (std::size_t l = 0; l < L; ++l) {
    if (var[l] == kPinned) continue;
    barrier::Constraint lower;
    lower.lin.push_back({var[l], -1.0});
    lower.tag = "rate>=0";
    prob.constraints.push_back(std::move(lower));
  }
  for (std::size_t l = 0; l < L; ++l) {
    barrier::Constraint energy;
    barrier::Constraint data;
    for (std::size_t k = 0; k <= l; ++k) {
      if (var[k] == kPinned) continue;
      energy.exp.push_back({var[k], tau / eff[k]});
      data.lin.push_back({var[k], tau});
    }
    if (energy.exp.empty()) continue;
    energy.rhs = pb.energy_cum[l];
    energy.tag = "energy";
    data.rhs = pb.data_cum[l];
    data.tag = "data";
    prob.constraints.push_back(std::move(energy));
    prob.constraints.push_back(std::move(data));
  }

  SolveReport rep;
  rep.schedule = PowerSchedule::zeros(user, L);
  if (prob.n == 0) {
    rep.status = SolveStatus::Optimal;
    return rep;
  }

  const barrier::Result res = barrier::solve(prob, barrier_options(opts), uniform_interior(prob));
  for (std::size_t l = 0; l < L; ++l) {
    if (var[l] == kPinned) continue;
    const double r = std::max(res.x[var[l]], 0.0);
    rep.schedule.power[l] = std::expm1(r) / eff[l];
  }
  rep.objective = discounted_throughput(rates_against(sc, user, rep.schedule.power, interf), sc);
  rep.kkt_residual = res.kkt_residual;
  rep.iterations = res.newton_iterations;
  rep.status = finish_status(res, opts);
  rep.message = res.message;
  return rep;
}

SolveReport pu_best_response(const Scenario& sc, const Profile& profile,
                             const SolverOptions& opts) {
  return pu_best_response(sc, interference_vector(profile, sc, kPrimaryUser), opts);
}

SolveReport pu_best_response(const Scenario& sc, const std::vector<double>& pu_interf,
                             const SolverOptions& opts) {
  const std::size_t L = sc.horizon();
  if (pu_interf.size() != L) throw DomainError("pu_best_response: interference length != horizon");
  const double tau = sc.tau();
  const double rho = sc.sir_threshold();
  const double budget = sc.horizon_budget();
  const PrefixBounds pb = prefix_bounds(sc, kPrimaryUser);

  SolveReport rep;
  rep.schedule = PowerSchedule::zeros(kPrimaryUser, L);

  std::vector<double> eff(L), floor_power(L), floor_rate(L);
  for (std::size_t l = 0; l < L; ++l) {
    eff[l] = sc.gain(kPrimaryUser, kPrimaryUser, l) / (sc.noise() + pu_interf[l]);
    floor_power[l] = rho * pu_interf[l];
    floor_rate[l] = eff[l] > 0.0 ? std::log1p(floor_power[l] * eff[l]) : 0.0;
  }

  // Linear pre-check: the SIR floor alone must respect data causality and be
  // affordable from battery + grid budget.
  double sent = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    sent += floor_rate[l] * tau;
    if (sent > pb.data_cum[l] + kFeasibilityTol) {
      rep.status = SolveStatus::Infeasible;
      rep.message = "SIR floor forces more PU data than has arrived by slot " + std::to_string(l + 1);
      return rep;
    }
  }
  const GridSplit floor_split = canonical_split(sc, floor_power);
  bool floor_grid_needed_without_price = false;
  for (std::size_t l = 0; l < L; ++l) {
    if (sc.price(l) <= 0.0 && floor_split.grid[l] > opts.grid_hard_cap) floor_grid_needed_without_price = true;
  }
  if (floor_split.cost > budget + kFeasibilityTol || floor_grid_needed_without_price) {
    rep.status = SolveStatus::Infeasible;
    rep.message = "SIR floor needs grid cost " + std::to_string(floor_split.cost) +
                  " above the budget " + std::to_string(budget);
    return rep;
  }

  barrier::Problem prob;
  std::vector<std::size_t> rv(L, kPinned), vv(L, kPinned), wv(L, kPinned);
  for (std::size_t l = 0; l < L; ++l) {
    const bool w_free = pb.energy_cum[l] > 0.0;
    const bool v_free = sc.price(l) <= 0.0 || budget > 0.0;
    const bool r_free = eff[l] > 0.0 && pb.data_cum[l] > 0.0 && (w_free || v_free);
    if (r_free) {
      rv[l] = prob.n++;
      prob.cost.push_back(-sc.discount(l) * tau);
    }
    if (v_free) {
      vv[l] = prob.n++;
      prob.cost.push_back(0.0);
    }
    if (w_free) {
      wv[l] = prob.n++;
      prob.cost.push_back(0.0);
    }
  }

  for (std::size_t l = 0; l < L; ++l) {
    if (rv[l] != kPinned) {
      barrier::Constraint lo;
      lo.lin.push_back({rv[l], -1.0});
      lo.rhs = -floor_rate[l];
      lo.tag = "SIR floor (rate)";
      prob.constraints.push_back(std::move(lo));
    }
    for (std::size_t idx : {vv[l], wv[l]}) {
      if (idx == kPinned) continue;
      barrier::Constraint nn;
      nn.lin.push_back({idx, -1.0});
      nn.tag = "nonneg";
      prob.constraints.push_back(std::move(nn));
    }
    if (vv[l] != kPinned && sc.price(l) <= 0.0) {
      barrier::Constraint cap;
      cap.lin.push_back({vv[l], 1.0});
      cap.rhs = opts.grid_hard_cap;
      cap.tag = "grid hard cap";
      prob.constraints.push_back(std::move(cap));
    }
    barrier::Constraint supply;
    if (vv[l] != kPinned) supply.lin.push_back({vv[l], -1.0});
    if (wv[l] != kPinned) supply.lin.push_back({wv[l], -1.0});
    if (rv[l] != kPinned) {
      supply.exp.push_back({rv[l], 1.0 / eff[l]});
    } else {
      if (floor_power[l] <= 0.0) supply.lin.clear();
      supply.rhs = -floor_power[l];
    }
    supply.tag = "supply";
    if (!supply.lin.empty()) prob.constraints.push_back(std::move(supply));
  }
  for (std::size_t l = 0; l < L; ++l) {
    barrier::Constraint data;
    barrier::Constraint battery;
    for (std::size_t k = 0; k <= l; ++k) {
      if (rv[k] != kPinned) data.lin.push_back({rv[k], tau});
      if (wv[k] != kPinned) battery.lin.push_back({wv[k], tau});
    }
    if (!data.lin.empty()) {
      data.rhs = pb.data_cum[l];
      data.tag = "data";
      prob.constraints.push_back(std::move(data));
    }
    if (!battery.lin.empty()) {
      battery.rhs = pb.energy_cum[l];
      battery.tag = "battery";
      prob.constraints.push_back(std::move(battery));
    }
  }
  barrier::Constraint cost;
  for (std::size_t l = 0; l < L; ++l) {
    if (vv[l] != kPinned && sc.price(l) > 0.0) cost.lin.push_back({vv[l], sc.price(l)});
  }
  if (!cost.lin.empty()) {
    cost.rhs = budget;
    cost.tag = "cost";
    prob.constraints.push_back(std::move(cost));
  }

  std::vector<double> total(L, 0.0);
  barrier::Result res;
  if (prob.n > 0) {
    res = barrier::solve(prob, barrier_options(opts));
    if (res.status == barrier::Status::Infeasible) {
      rep.status = SolveStatus::Infeasible;
      rep.message = res.message;
      return rep;
    }
  } else {
    res.status = barrier::Status::Optimal;
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (rv[l] != kPinned) {
      const double r = std::max(res.x[rv[l]], floor_rate[l]);
      total[l] = std::max(std::expm1(r) / eff[l], floor_power[l]);
    } else {
      total[l] = floor_power[l];
    }
  }
  rep.schedule = primary_schedule(sc, total);
  rep.objective = discounted_throughput(rates_against(sc, kPrimaryUser, rep.schedule.power, pu_interf), sc);
  rep.kkt_residual = res.kkt_residual;
  rep.iterations = res.newton_iterations;
  rep.status = finish_status(res, opts);
  rep.message = res.message;
  return rep;
}

}  // namespace ehcrn
