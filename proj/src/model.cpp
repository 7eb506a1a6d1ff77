#include "ehcrn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ehcrn {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw DomainError(field + ": " + what);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_user_table(const std::vector<std::vector<double>>& table, std::size_t users,
                      std::size_t horizon, const std::string& field) {
  require(table.size() == users, field,
          "expected " + std::to_string(users) + " user rows, got " + std::to_string(table.size()));
  for (std::size_t u = 0; u < users; ++u) {
    const std::string name = field + "[" + std::to_string(u) + "]";
    require(table[u].size() == horizon, name,
            "expected " + std::to_string(horizon) + " entries, got " +
                std::to_string(table[u].size()));
    for (double v : table[u]) require(finite_nonneg(v), name, "entries must be finite and >= 0");
  }
}

}  // namespace

Scenario::Scenario(ScenarioData data) : d_(std::move(data)) {
  require(d_.n_su >= 1, "n_su", "at least one secondary user is required");
  require(d_.horizon >= 1, "horizon", "at least one slot is required");
  require(std::isfinite(d_.slot_seconds) && d_.slot_seconds > 0.0, "slot_seconds", "must be > 0");
  require(std::isfinite(d_.noise_watts) && d_.noise_watts > 0.0, "noise_watts", "must be > 0");
  require(std::isfinite(d_.sir_threshold) && d_.sir_threshold > 0.0, "sir_threshold",
          "must be > 0");
  require(finite_nonneg(d_.cost_cap), "cost_cap", "must be finite and >= 0");

  const std::size_t users = d_.n_su + 1;
  const std::size_t L = d_.horizon;
  require(d_.gain.size() == users, "gain",
          "expected " + std::to_string(users) + " transmitter rows, got " +
              std::to_string(d_.gain.size()));
  for (std::size_t j = 0; j < users; ++j) {
    require(d_.gain[j].size() == users, "gain[" + std::to_string(j) + "]",
            "expected " + std::to_string(users) + " receiver rows");
    for (std::size_t i = 0; i < users; ++i) {
      const std::string name = "gain[" + std::to_string(j) + "][" + std::to_string(i) + "]";
      require(d_.gain[j][i].size() == L, name, "expected " + std::to_string(L) + " slots");
      for (double v : d_.gain[j][i]) require(finite_nonneg(v), name, "gains must be >= 0");
    }
  }
  check_user_table(d_.arrivals, users, L, "arrivals");
  check_user_table(d_.harvest, users, L, "harvest");
  require(d_.price.size() == L, "price", "expected " + std::to_string(L) + " entries");
  for (double v : d_.price) require(finite_nonneg(v), "price", "entries must be finite and >= 0");
}

double Scenario::horizon_budget() const noexcept {
  return d_.cost_cap_scope == CostCapScope::Total
             ? d_.cost_cap
             : static_cast<double>(d_.horizon) * d_.cost_cap;
}

double Scenario::online_budget() const noexcept {
  return static_cast<double>(d_.horizon) * d_.cost_cap;
}

double Scenario::discount(std::size_t slot) const noexcept {
  const auto L = static_cast<double>(d_.horizon);
  return (L - static_cast<double>(slot)) / (L + 1.0);
}

bool Scenario::operator==(const Scenario& o) const {
  const auto& a = d_;
  const auto& b = o.d_;
  return a.n_su == b.n_su && a.horizon == b.horizon && a.slot_seconds == b.slot_seconds &&
         a.noise_watts == b.noise_watts && a.gain == b.gain && a.arrivals == b.arrivals &&
         a.harvest == b.harvest && a.price == b.price && a.cost_cap == b.cost_cap &&
         a.cost_cap_scope == b.cost_cap_scope && a.sir_threshold == b.sir_threshold;
}

PowerSchedule PowerSchedule::zeros(std::size_t user, std::size_t horizon) {
  PowerSchedule s;
  s.user = user;
  s.power.assign(horizon, 0.0);
  if (user == kPrimaryUser) {
    s.grid.assign(horizon, 0.0);
    s.battery.assign(horizon, 0.0);
  }
  return s;
}

Profile zero_profile(const Scenario& sc) {
  Profile p;
  p.reserve(sc.n_users());
  for (std::size_t u = 0; u < sc.n_users(); ++u) p.push_back(PowerSchedule::zeros(u, sc.horizon()));
  return p;
}

PrefixBounds prefix_bounds(const Scenario& sc, std::size_t user) {
  PrefixBounds b;
  const std::size_t L = sc.horizon();
  b.energy_cum.resize(L);
  b.data_cum.resize(L);
  double e = 0.0;
  double a = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    e += sc.harvest(user, k);
    a += sc.arrival(user, k);
    b.energy_cum[k] = e;
    b.data_cum[k] = a;
  }
  return b;
}

double instant_rate(double power, double gain, double noise, double interf) {
  if (!(power >= 0.0) || !(gain >= 0.0) || !(interf >= 0.0) || !(noise > 0.0)) {
    throw DomainError("instant_rate: requires power, gain, interference >= 0 and noise > 0");
  }
  return std::log1p(power * gain / (noise + interf));
}

double interference(const Profile& profile, const Scenario& sc, std::size_t user,
                    std::size_t slot) {
  if (user >= sc.n_users() || slot >= sc.horizon() || profile.size() != sc.n_users()) {
    throw std::out_of_range("interference: user, slot or profile size out of range");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < sc.n_users(); ++j) {
    if (j == user) continue;
    sum += profile[j].power.at(slot) * sc.gain(j, user, slot);
  }
  return sum;
}

std::vector<double> interference_vector(const Profile& profile, const Scenario& sc,
                                        std::size_t user) {
  std::vector<double> out(sc.horizon());
  for (std::size_t l = 0; l < sc.horizon(); ++l) out[l] = interference(profile, sc, user, l);
  return out;
}

std::vector<double> rates_against(const Scenario& sc, std::size_t user,
                                  const std::vector<double>& power,
                                  const std::vector<double>& interf) {
  std::vector<double> r(sc.horizon());
  for (std::size_t l = 0; l < sc.horizon(); ++l) {
    r[l] = instant_rate(std::max(power.at(l), 0.0), sc.gain(user, user, l), sc.noise(),
                        interf.at(l));
  }
  return r;
}

std::vector<double> rates_of(const Profile& profile, const Scenario& sc, std::size_t user) {
  return rates_against(sc, user, profile.at(user).power, interference_vector(profile, sc, user));
}

std::vector<Trajectory> roll_trajectory(const Scenario& sc, const Profile& profile) {
  const std::size_t L = sc.horizon();
  const double tau = sc.tau();
  std::vector<Trajectory> out(sc.n_users());
  for (std::size_t i = 0; i < sc.n_users(); ++i) {
    Trajectory& t = out[i];
    t.interference = interference_vector(profile, sc, i);
    t.rates = rates_against(sc, i, profile[i].power, t.interference);
    t.queue.assign(L + 1, 0.0);
    t.battery.assign(L + 1, 0.0);
    t.queue[0] = sc.arrival(i, 0);
    t.battery[0] = sc.harvest(i, 0);
    const bool primary = i == kPrimaryUser;
    const std::vector<double>& drain = primary ? profile[i].battery : profile[i].power;
    for (std::size_t l = 0; l < L; ++l) {
      // arrivals/harvest beyond index L-1 fall outside the horizon
      const double a_next = l + 1 < L ? sc.arrival(i, l + 1) : 0.0;
      const double e_next = l + 1 < L ? sc.harvest(i, l + 1) : 0.0;
      t.queue[l + 1] = t.queue[l] - t.rates[l] * tau + a_next;
      t.battery[l + 1] = t.battery[l] - drain.at(l) * tau + e_next;
    }
    if (primary) {
      t.budget.assign(L + 1, 0.0);
      t.budget[0] = sc.horizon_budget();
      for (std::size_t l = 0; l < L; ++l) {
        t.budget[l + 1] = t.budget[l] - sc.price(l) * profile[i].grid.at(l);
      }
    }
  }
  return out;
}

double mean_delay(const Trajectory& traj) {
  if (traj.queue.empty()) return 0.0;
  double s = 0.0;
  for (double q : traj.queue) s += q;
  return s / static_cast<double>(traj.queue.size());
}

double discounted_throughput(const std::vector<double>& rates, const Scenario& sc) {
  double t = 0.0;
  for (std::size_t l = 0; l < sc.horizon(); ++l) t += sc.discount(l) * rates.at(l) * sc.tau();
  return t;
}

Feasibility check_feasible(const Scenario& sc, const PowerSchedule& sched,
                           const std::vector<double>& interf, Role role, double tol) {
  const std::size_t L = sc.horizon();
  const std::size_t i = sched.user;
  const double tau = sc.tau();
  const PrefixBounds pb = prefix_bounds(sc, i);
  const bool primary = role == Role::Primary;

  Feasibility f;
  f.energy_slack.resize(L);
  f.data_slack.resize(L);
  f.power_slack.resize(L);
  double min_slack = std::numeric_limits<double>::infinity();
  auto note = [&](double slack, const char* family) {
    if (slack < min_slack) min_slack = slack;
    if (slack < -tol && f.violated.empty()) f.violated = family;
  };

  if (primary && (sched.grid.size() != L || sched.battery.size() != L)) {
    throw DomainError("check_feasible: primary schedule requires grid and battery vectors");
  }
  const std::vector<double>& drain = primary ? sched.battery : sched.power;
  std::vector<double> clipped(L);
  for (std::size_t l = 0; l < L; ++l) clipped[l] = std::max(sched.power.at(l), 0.0);
  const std::vector<double> rates = rates_against(sc, i, clipped, interf);

  double spent = 0.0;
  double sent = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    spent += drain[l] * tau;
    sent += rates[l] * tau;
    f.energy_slack[l] = pb.energy_cum[l] - spent;
    f.data_slack[l] = pb.data_cum[l] - sent;
    note(f.energy_slack[l], "energy causality");
    note(f.data_slack[l], "data causality");
    if (primary) {
      f.power_slack[l] = std::min(sched.grid[l], sched.battery[l]);
      note(f.power_slack[l], "nonnegative grid/battery power");
      const double mismatch = std::abs(sched.grid[l] + sched.battery[l] - sched.power[l]);
      note(-mismatch, "grid + battery = power");
    } else {
      f.power_slack[l] = sched.power[l];
      note(f.power_slack[l], "nonnegative power");
    }
  }
  if (primary) {
    double cost = 0.0;
    for (std::size_t l = 0; l < L; ++l) cost += sc.price(l) * sched.grid[l];
    f.cost_slack = sc.horizon_budget() - cost;
    note(f.cost_slack, "grid cost cap");
    f.sir_slack.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      f.sir_slack[l] = sched.power[l] - sc.sir_threshold() * interf.at(l);
      note(f.sir_slack[l], "SIR floor");
    }
  }
  f.min_slack = min_slack;
  f.feasible = min_slack >= -tol;
  return f;
}

Feasibility check_feasible(const Scenario& sc, const Profile& profile, std::size_t user,
                           double tol) {
  return check_feasible(sc, profile.at(user), interference_vector(profile, sc, user),
                        user == kPrimaryUser ? Role::Primary : Role::Secondary, tol);
}

}  // namespace ehcrn
