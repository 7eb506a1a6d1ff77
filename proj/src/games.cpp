#include "ehcrn/games.hpp"

#include <algorithm>
#include <cmath>

namespace ehcrn {

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b.at(k)));
  return m;
}

void validate_profile(const Scenario& sc, const Profile& p, const char* who) {
  if (p.size() != sc.n_users()) {
    throw DomainError(std::string(who) + ": profile must hold one schedule per user");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].power.size() != sc.horizon()) {
      throw DomainError(std::string(who) + ": schedule of user " + std::to_string(i) +
                        " has wrong length");
    }
    for (double v : p[i].power) {
      if (!(v >= 0.0)) throw DomainError(std::string(who) + ": powers must be >= 0");
    }
  }
}

// Gauss-Seidel stops while earlier responses are stale by up to tol_ne, so
// the final interference can push a user's rate just past its data prefix
// bound. Trims rates back onto the bound (power only ever decreases; for the
// PU the grid part goes first) and repeats, since a trim lowers everyone
// else's interference in turn.
void trim_data_overflow(const Scenario& sc, Profile& p, bool include_pu) {
  const double tau = sc.tau();
  for (int pass = 0; pass < 50; ++pass) {
    bool trimmed = false;
    for (std::size_t i = include_pu ? 0 : 1; i < sc.n_users(); ++i) {
      const PrefixBounds pb = prefix_bounds(sc, i);
      const std::vector<double> interf = interference_vector(p, sc, i);
      const std::vector<double> rates = rates_against(sc, i, p[i].power, interf);
      double sent = 0.0;
      for (std::size_t l = 0; l < sc.horizon(); ++l) {
        const double room = std::max(pb.data_cum[l] - sent, 0.0) / tau;
        double r = rates[l];
        if (r > room) {
          r = room;
          const double eff = sc.gain(i, i, l) / (sc.noise() + interf[l]);
          const double power = std::min(p[i].power[l], std::expm1(r) / eff);
          if (p[i].has_split()) {
            const double cut = p[i].power[l] - power;
            const double from_grid = std::min(cut, p[i].grid[l]);
            p[i].grid[l] -= from_grid;
            p[i].battery[l] = std::max(p[i].battery[l] - (cut - from_grid), 0.0);
          }
          p[i].power[l] = power;
          trimmed = true;
        }
        sent += r * tau;
      }
    }
    if (!trimmed) return;
  }
}

}  // namespace

std::vector<double> utilities_of(const Scenario& sc, const Profile& profile) {
  std::vector<double> u(sc.n_users());
  for (std::size_t i = 0; i < sc.n_users(); ++i) {
    u[i] = discounted_throughput(rates_of(profile, sc, i), sc);
  }
  return u;
}

std::vector<double> deviation_gains(const Scenario& sc, const Profile& profile,
                                    const SolverOptions& opts) {
  std::vector<double> gains(sc.n_users(), 0.0);
  for (std::size_t i = 1; i < sc.n_users(); ++i) {
    const std::vector<double> interf = interference_vector(profile, sc, i);
    const double current = discounted_throughput(rates_against(sc, i, profile[i].power, interf), sc);
    const SolveReport br = su_best_response(sc, i, interf, opts);
    gains[i] = br.objective - current;
  }
  return gains;
}

EquilibriumResult lower_ne(const Scenario& sc, const Profile& init, const NeOptions& opts) {
  validate_profile(sc, init, "lower_ne");
  EquilibriumResult out;
  Profile cur = init;
  for (std::size_t i = 1; i < cur.size(); ++i) {
    cur[i].user = i;
    cur[i].grid.clear();
    cur[i].battery.clear();
  }

  for (std::size_t sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    const Profile prev = cur;
    const Profile& seen = opts.order == SweepOrder::Jacobi ? prev : cur;
    for (std::size_t i = 1; i < sc.n_users(); ++i) {
      const SolveReport br = su_best_response(sc, i, interference_vector(seen, sc, i), opts.solver);
      cur[i].power = br.schedule.power;
    }
    // Under Gauss-Seidel user i already saw this sweep's powers of users < i,
    // so only moves of users 2..N can leave an earlier best response stale.
    double change = 0.0;
    double stale = 0.0;
    for (std::size_t i = 1; i < sc.n_users(); ++i) {
      const double d = max_abs_diff(cur[i].power, prev[i].power);
      change = std::max(change, d);
      if (opts.order == SweepOrder::Jacobi || i >= 2) stale = std::max(stale, d);
    }
    IterationRecord rec;
    rec.iteration = sweep;
    rec.utilities = utilities_of(sc, cur);
    rec.max_change = change;
    out.history.push_back(std::move(rec));
    out.iterations = sweep;
    if (stale <= opts.tol_ne) {
      out.converged = true;
      break;
    }
  }

  trim_data_overflow(sc, cur, false);
  out.deviation_gain = deviation_gains(sc, cur, opts.solver);
  out.max_deviation_gain = *std::max_element(out.deviation_gain.begin(), out.deviation_gain.end());
  out.utilities = utilities_of(sc, cur);
  out.schedules = std::move(cur);
  return out;
}

bool pu_schedule_admissible(const Scenario& sc, const PowerSchedule& pu, double tol) {
  const std::size_t L = sc.horizon();
  if (pu.power.size() != L || pu.grid.size() != L || pu.battery.size() != L) return false;
  const PrefixBounds pb = prefix_bounds(sc, kPrimaryUser);
  double spent = 0.0;
  double cost = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    if (pu.grid[l] < -tol || pu.battery[l] < -tol) return false;
    if (std::abs(pu.grid[l] + pu.battery[l] - pu.power[l]) > tol) return false;
    spent += pu.battery[l] * sc.tau();
    if (spent > pb.energy_cum[l] + tol) return false;
    cost += sc.price(l) * pu.grid[l];
  }
  return cost <= sc.horizon_budget() + tol;
}

EquilibriumResult neo(const Scenario& sc, const Profile& init, const NeoOptions& opts) {
  if (!(opts.eta > 0.0 && opts.eta <= 1.0)) throw DomainError("neo: eta must lie in (0, 1]");
  validate_profile(sc, init, "neo");
  Profile cur = init;
  if (!cur[0].has_split()) cur[0] = primary_schedule(sc, cur[0].power);
  if (!pu_schedule_admissible(sc, cur[0])) {
    throw DomainError("neo: initial PU schedule violates battery causality or the grid-cost cap");
  }

  EquilibriumResult out;
  for (std::size_t k = 1; k <= opts.max_outer; ++k) {
    EquilibriumResult ne = lower_ne(sc, cur, opts.ne);
    cur = std::move(ne.schedules);

    const SolveReport pu = pu_best_response(sc, cur, opts.ne.solver);
    if (pu.status == SolveStatus::Infeasible) {
      throw InfeasibleError("neo: PU program infeasible at outer iteration " + std::to_string(k) +
                            ": " + pu.message);
    }
    PowerSchedule next = cur[0];
    const double eta = opts.eta;
    for (std::size_t l = 0; l < sc.horizon(); ++l) {
      next.grid[l] = eta * pu.schedule.grid[l] + (1.0 - eta) * cur[0].grid[l];
      next.battery[l] = eta * pu.schedule.battery[l] + (1.0 - eta) * cur[0].battery[l];
      next.power[l] = next.grid[l] + next.battery[l];
    }

    IterationRecord rec;
    rec.iteration = k;
    rec.utilities = utilities_of(sc, cur);
    rec.max_change = max_abs_diff(next.power, cur[0].power);
    rec.inner_sweeps = ne.iterations;
    rec.pu_iterate_feasible = pu_schedule_admissible(sc, next);
    const bool done = rec.max_change <= opts.tol_neo;
    out.history.push_back(std::move(rec));
    out.iterations = k;
    cur[0] = std::move(next);
    if (done) {
      out.converged = true;
      break;
    }
  }

  EquilibriumResult settled = lower_ne(sc, cur, opts.ne);
  out.schedules = std::move(settled.schedules);
  trim_data_overflow(sc, out.schedules, true);
  out.utilities = utilities_of(sc, out.schedules);
  out.deviation_gain = std::move(settled.deviation_gain);
  out.max_deviation_gain = settled.max_deviation_gain;
  return out;
}

}  // namespace ehcrn
