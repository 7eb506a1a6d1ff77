#include "ehcrn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ehcrn::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Grid points 0, h, 2h, ... strictly inside (lo, cap], plus lo and cap.
std::vector<double> candidates(double lo, double cap, double h, bool descending = false) {
  std::vector<double> c{lo};
  if (cap > lo) {
    const auto first = static_cast<long long>(std::floor(lo / h)) + 1;
    for (long long k = first;; ++k) {
      const double p = static_cast<double>(k) * h;
      if (p >= cap) break;
      c.push_back(p);
    }
    c.push_back(cap);
  }
  if (descending) std::reverse(c.begin(), c.end());
  return c;
}

struct Search {
  const Scenario& sc;
  std::size_t user;
  const std::vector<double>& interf;
  GridSpec grid;
  PrefixBounds pb;
  std::vector<double> gain;
  std::vector<double> cur, best;
  double best_obj = kNegInf;
  std::size_t evaluated = 0;
  bool primary = false;

  Search(const Scenario& s, std::size_t u, const std::vector<double>& i, const GridSpec& g)
      : sc(s), user(u), interf(i), grid(g), pb(prefix_bounds(s, u)) {
    const std::size_t L = s.horizon();
    gain.resize(L);
    for (std::size_t l = 0; l < L; ++l) gain[l] = s.gain(u, u, l);
    cur.assign(L, 0.0);
  }

  double rate(std::size_t l, double p) const { return instant_rate(p, gain[l], sc.noise(), interf[l]); }

  // Largest power in slot l that keeps every later data prefix satisfiable.
  double data_cap(std::size_t l, double sent) const {
    double room = std::numeric_limits<double>::infinity();
    for (std::size_t m = l; m < sc.horizon(); ++m) room = std::min(room, pb.data_cum[m] - sent);
    room = std::max(room, 0.0);
    if (gain[l] <= 0.0) return 0.0;
    return std::expm1(room / sc.tau()) * (sc.noise() + interf[l]) / gain[l];
  }

  void leaf(double obj) {
    if (++evaluated > grid.max_evaluations) {
      throw std::length_error("oracle: enumeration budget exceeded");
    }
    if (primary) {
      const SplitLp lp = min_cost_split(sc, cur);
      if (!lp.feasible || lp.cost > sc.horizon_budget() + kFeasibilityTol) return;
    }
    // ties go to the lexicographically smallest schedule
    if (obj > best_obj || (obj == best_obj && cur < best)) {
      best_obj = obj;
      best = cur;
    }
  }

  void su(std::size_t l, double used, double sent, double obj) {
    const std::size_t L = sc.horizon();
    if (l == L) return leaf(obj);
    const double tau = sc.tau();
    double ecap = std::numeric_limits<double>::infinity();
    for (std::size_t m = l; m < L; ++m) ecap = std::min(ecap, (pb.energy_cum[m] - used) / tau);
    ecap = std::max(ecap, 0.0);
    // powers without rate only burn energy; zero dominates them
    const double cap = gain[l] > 0.0 ? std::min(ecap, data_cap(l, sent)) : 0.0;
    for (double p : candidates(0.0, cap, grid.step, grid.descending)) {
      cur[l] = p;
      const double r = rate(l, p);
      su(l + 1, used + p * tau, sent + r * tau, obj + sc.discount(l) * r * tau);
    }
    cur[l] = 0.0;
  }

  void pu(std::size_t l, double sent, double obj) {
    const std::size_t L = sc.horizon();
    if (l == L) return leaf(obj);
    const double tau = sc.tau();
    const double floor = sc.sir_threshold() * interf[l];
    // loose supply bound; the split LP at the leaf is the exact test
    const double grid_max = sc.price(l) > 0.0 ? sc.horizon_budget() / sc.price(l) : 1e9;
    const double supply = pb.energy_cum[l] / tau + grid_max;
    double cap = std::min(supply, gain[l] > 0.0 ? data_cap(l, sent) : 0.0);
    cap = std::max(cap, floor);
    for (double p : candidates(floor, cap, grid.step, grid.descending)) {
      cur[l] = p;
      const double r = rate(l, p);
      // the floor alone may overrun the data prefix
      bool ok = true;
      for (std::size_t m = l; m < L; ++m) ok = ok && sent + r * tau <= pb.data_cum[m] + kFeasibilityTol;
      if (!ok) continue;
      pu(l + 1, sent + r * tau, obj + sc.discount(l) * r * tau);
    }
    cur[l] = 0.0;
  }
};

// Solves the square system rows * x = rhs by Gaussian elimination with partial
// pivoting. Returns false when singular.
bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-12) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t c = 0; c < n; ++c) x[c] = b[c] / a[c][c];
  return true;
}

}  // namespace

SplitLp min_cost_split(const Scenario& sc, const std::vector<double>& power) {
  const std::size_t L = sc.horizon();
  const double tau = sc.tau();
  const PrefixBounds pb = prefix_bounds(sc, kPrimaryUser);

  // Rows a.W <= b: -W_l <= 0, W_l <= P_l, sum_{k<=l} tau W_k <= energy_cum[l].
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> lo(L, 0.0), hi(L, 0.0), pre(L, 0.0);
    lo[l] = -1.0;
    hi[l] = 1.0;
    for (std::size_t k = 0; k <= l; ++k) pre[k] = tau;
    rows.push_back(lo);
    rhs.push_back(0.0);
    rows.push_back(hi);
    rhs.push_back(power[l]);
    rows.push_back(pre);
    rhs.push_back(pb.energy_cum[l]);
  }

  SplitLp out;
  double best = kNegInf;
  const std::size_t m = rows.size();
  std::vector<std::size_t> pick(L);
  // every L-subset of rows (lexicographic), m choose L
  for (std::size_t k = 0; k < L; ++k) pick[k] = k;
  while (true) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (std::size_t k : pick) {
      a.push_back(rows[k]);
      b.push_back(rhs[k]);
    }
    std::vector<double> w;
    if (solve_square(a, b, w)) {
      bool ok = true;
      for (std::size_t r = 0; r < m && ok; ++r) {
        double v = 0.0;
        for (std::size_t k = 0; k < L; ++k) v += rows[r][k] * w[k];
        ok = v <= rhs[r] + 1e-9 * std::max(1.0, std::abs(rhs[r]));
      }
      if (ok) {
        double val = 0.0;
        for (std::size_t k = 0; k < L; ++k) val += sc.price(k) * w[k];
        if (val > best) {
          best = val;
          out.battery = w;
        }
      }
    }
    std::size_t i = L;
    while (i > 0 && pick[i - 1] == m - L + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < L; ++k) pick[k] = pick[k - 1] + 1;
  }
  if (out.battery.empty()) return out;
  out.feasible = true;
  out.cost = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    out.battery[l] = std::clamp(out.battery[l], 0.0, power[l]);
    out.cost += sc.price(l) * (power[l] - out.battery[l]);
  }
  return out;
}

OracleResult su_best_response(const Scenario& sc, std::size_t user,
                              const std::vector<double>& interf, const GridSpec& grid) {
  if (user == kPrimaryUser || user >= sc.n_users()) throw DomainError("oracle: not a secondary user");
  if (!(grid.step > 0.0)) throw DomainError("oracle: grid step must be > 0");
  Search s(sc, user, interf, grid);
  s.su(0, 0.0, 0.0, 0.0);
  OracleResult out;
  out.schedule = PowerSchedule::zeros(user, sc.horizon());
  out.schedule.power = s.best;
  if (!check_feasible(sc, out.schedule, interf, Role::Secondary).feasible) {
    throw std::logic_error("oracle: enumerated SU schedule fails the feasibility check");
  }
  out.objective = s.best_obj;
  out.evaluated = s.evaluated;
  return out;
}

OracleResult pu_best_response(const Scenario& sc, const std::vector<double>& pu_interf,
                              const GridSpec& grid) {
  if (!(grid.step > 0.0)) throw DomainError("oracle: grid step must be > 0");
  Search s(sc, kPrimaryUser, pu_interf, grid);
  s.primary = true;
  s.pu(0, 0.0, 0.0);
  OracleResult out;
  out.schedule = PowerSchedule::zeros(kPrimaryUser, sc.horizon());
  out.evaluated = s.evaluated;
  if (s.best.empty()) {
    out.objective = kNegInf;  // nothing admissible
    return out;
  }
  const SplitLp lp = min_cost_split(sc, s.best);
  out.schedule.power = s.best;
  out.schedule.battery = lp.battery;
  for (std::size_t l = 0; l < sc.horizon(); ++l) out.schedule.grid[l] = s.best[l] - lp.battery[l];
  out.objective = s.best_obj;
  if (!check_feasible(sc, out.schedule, pu_interf, Role::Primary).feasible) {
    throw std::logic_error("oracle: enumerated PU schedule fails the feasibility check");
  }
  return out;
}

double lipschitz_gap(const Scenario& sc, std::size_t user, const std::vector<double>& interf,
                     double step) {
  double slope = 0.0;
  for (std::size_t l = 0; l < sc.horizon(); ++l) {
    slope += sc.discount(l) * sc.gain(user, user, l) / (sc.noise() + interf.at(l));
  }
  return step * sc.tau() * slope;
}

OracleNe ne(const Scenario& sc, const Profile& init, const GridSpec& grid, std::size_t max_sweeps) {
  OracleNe out;
  Profile cur = init;
  std::vector<std::vector<double>> seen;
  auto flat = [&] {
    std::vector<double> v;
    for (std::size_t i = 1; i < cur.size(); ++i) v.insert(v.end(), cur[i].power.begin(), cur[i].power.end());
    return v;
  };
  seen.push_back(flat());
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    bool moved = false;
    for (std::size_t i = 1; i < sc.n_users(); ++i) {
      const OracleResult br = su_best_response(sc, i, interference_vector(cur, sc, i), grid);
      if (br.schedule.power != cur[i].power) moved = true;
      cur[i].power = br.schedule.power;
    }
    out.sweeps = sweep;
    if (!moved) {
      out.converged = true;
      break;
    }
    const std::vector<double> now = flat();
    if (std::find(seen.begin(), seen.end(), now) != seen.end()) {
      out.cycled = true;
      break;
    }
    seen.push_back(now);
  }
  out.certificate.assign(sc.n_users(), 0.0);
  for (std::size_t i = 1; i < sc.n_users(); ++i) {
    const std::vector<double> interf = interference_vector(cur, sc, i);
    const double now = discounted_throughput(rates_against(sc, i, cur[i].power, interf), sc);
    out.certificate[i] = su_best_response(sc, i, interf, grid).objective - now;
  }
  out.schedules = std::move(cur);
  return out;
}

namespace {

double slot_interf(const SlotState& s, const std::vector<double>& power, std::size_t user) {
  double sum = 0.0;
  for (std::size_t j = 0; j < power.size(); ++j) {
    if (j != user) sum += power[j] * s.gain[j][user];
  }
  return sum;
}

double slot_su(const SlotState& s, std::size_t i, double interf, double step) {
  const double g = s.gain[i][i];
  const double ecap = std::max(s.battery[i], 0.0) / s.tau;
  const double dcap = g > 0.0 ? std::expm1(std::max(s.queue[i], 0.0) / s.tau) * (s.noise + interf) / g : 0.0;
  double best = 0.0, best_rate = -1.0;
  for (double p : candidates(0.0, std::min(ecap, dcap), step)) {
    const double r = instant_rate(p, g, s.noise, interf);
    if (r * s.tau > s.queue[i] * (1.0 + 1e-12) + 1e-12) continue;
    if (r > best_rate) {
      best_rate = r;
      best = p;
    }
  }
  return best;
}

double slot_pu(const SlotState& s, double interf, double step, double hard_cap) {
  const double g = s.gain[kPrimaryUser][kPrimaryUser];
  const double share = s.price > 0.0
                           ? std::min(std::max(s.budget, 0.0) / (static_cast<double>(s.slots_left) * s.price), hard_cap)
                           : hard_cap;
  const double supply = std::max(s.battery[kPrimaryUser], 0.0) / s.tau + share;
  const double floor = s.sir_threshold * interf;
  const double q = std::max(s.queue[kPrimaryUser], 0.0) / s.tau;
  const double dcap = g > 0.0 ? std::expm1(q) * (s.noise + interf) / g : 0.0;
  std::vector<double> cands = candidates(0.0, std::min(supply, std::max(dcap, floor)), step);
  for (double extra : {floor, dcap}) {
    if (extra <= supply) cands.push_back(extra);
  }
  std::sort(cands.begin(), cands.end());
  double best = 0.0;
  double best_short = std::numeric_limits<double>::infinity();
  double best_served = -1.0;
  for (double p : cands) {
    const double shortfall = std::max(floor - p, 0.0);
    const double served = std::min(instant_rate(p, g, s.noise, interf), q);
    if (shortfall < best_short || (shortfall == best_short && served > best_served)) {
      best = p;
      best_short = shortfall;
      best_served = served;
    }
  }
  return best;
}

}  // namespace

SlotNe slot_ne(const SlotState& s, double step, double grid_hard_cap, std::size_t max_rounds) {
  SlotNe out;
  out.power.assign(s.n_users(), 0.0);
  for (std::size_t k = 1; k <= max_rounds; ++k) {
    bool moved = false;
    for (std::size_t i = 1; i < s.n_users(); ++i) {
      const double p = slot_su(s, i, slot_interf(s, out.power, i), step);
      moved = moved || p != out.power[i];
      out.power[i] = p;
    }
    const double p0 = slot_pu(s, slot_interf(s, out.power, kPrimaryUser), step, grid_hard_cap);
    moved = moved || p0 != out.power[kPrimaryUser];
    out.power[kPrimaryUser] = p0;
    out.rounds = k;
    if (!moved) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace ehcrn::oracle
