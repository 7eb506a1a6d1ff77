#pragma once

// Domain types and slot dynamics for an energy-harvesting cognitive radio
// network: one primary user (index 0) sharing spectrum with N secondary users.
//
// Slot convention: the API is zero-based. Slot index l = 0..L-1 is the l+1-th
// transmission slot. Arrival/harvest index k = 0..L-1 is as published: entry 0
// is the initial buffer content / initial battery charge, entry k>0 arrives
// during slot k and becomes usable in slot k+1 (zero-based index k).
// Trajectory vectors carry L+1 entries: state at the start of every slot plus
// the terminal state after the last slot.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehcrn {

inline constexpr std::size_t kPrimaryUser = 0;
inline constexpr double kFeasibilityTol = 1e-9;

class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// How the offline grid-cost cap is normalized.
///   Average: (1/L) * sum_l c[l] V[l] <= cap   (horizon budget L*cap)
///   Total:   sum_l c[l] V[l] <= cap           (horizon budget cap)
/// The online budget starts at L*cap under either scope.
enum class CostCapScope { Average, Total };

struct ScenarioData {
  std::size_t n_su = 0;
  std::size_t horizon = 0;
  double slot_seconds = 1.0;
  double noise_watts = 0.0;
  /// gain[tx][rx][slot], users 0..N.
  std::vector<std::vector<std::vector<double>>> gain;
  /// arrivals[user][k] in nats, harvest[user][k] in joules, k = 0..L-1.
  std::vector<std::vector<double>> arrivals;
  std::vector<std::vector<double>> harvest;
  std::vector<double> price;
  double cost_cap = 0.0;
  CostCapScope cost_cap_scope = CostCapScope::Average;
  double sir_threshold = 0.0;
};

/// Immutable, validated problem instance.
class Scenario {
public:
  /// Validates every field; throws DomainError naming the offending field.
  explicit Scenario(ScenarioData data);

  const ScenarioData& data() const noexcept { return d_; }

  std::size_t n_su() const noexcept { return d_.n_su; }
  std::size_t n_users() const noexcept { return d_.n_su + 1; }
  std::size_t horizon() const noexcept { return d_.horizon; }
  double tau() const noexcept { return d_.slot_seconds; }
  double noise() const noexcept { return d_.noise_watts; }
  double gain(std::size_t tx, std::size_t rx, std::size_t slot) const {
    return d_.gain.at(tx).at(rx).at(slot);
  }
  double arrival(std::size_t user, std::size_t k) const { return d_.arrivals.at(user).at(k); }
  double harvest(std::size_t user, std::size_t k) const { return d_.harvest.at(user).at(k); }
  double price(std::size_t slot) const { return d_.price.at(slot); }
  double sir_threshold() const noexcept { return d_.sir_threshold; }
  double cost_cap() const noexcept { return d_.cost_cap; }
  CostCapScope cost_cap_scope() const noexcept { return d_.cost_cap_scope; }

  /// Grid spend allowed over the whole horizon in the offline problems.
  double horizon_budget() const noexcept;

  /// Initial grid budget B[1] = L * cap of the online (per-slot) game.
  double online_budget() const noexcept;

  /// Discount weight of zero-based slot l: (L - l) / (L + 1).
  double discount(std::size_t slot) const noexcept;

  bool operator==(const Scenario& other) const;

private:
  ScenarioData d_;
};

/// Per-user transmit powers over the horizon. For the primary user `grid`
/// and `battery` hold the split power = grid + battery; they are empty for
/// secondary users.
struct PowerSchedule {
  std::size_t user = 0;
  std::vector<double> power;
  std::vector<double> grid;
  std::vector<double> battery;

  static PowerSchedule zeros(std::size_t user, std::size_t horizon);
  bool has_split() const noexcept { return !grid.empty(); }
};

/// One schedule per user, indexed by user (0 = PU).
using Profile = std::vector<PowerSchedule>;

Profile zero_profile(const Scenario& sc);

struct Trajectory {
  std::vector<double> queue;         // L+1
  std::vector<double> battery;       // L+1
  std::vector<double> budget;        // L+1, primary user only (empty otherwise)
  std::vector<double> rates;         // L
  std::vector<double> interference;  // L
};

/// Cumulative harvested energy and arrivals available up to each slot:
/// energy_cum[l] = sum_{k<=l} harvest[k], data_cum[l] = sum_{k<=l} arrivals[k].
struct PrefixBounds {
  std::vector<double> energy_cum;
  std::vector<double> data_cum;
};

PrefixBounds prefix_bounds(const Scenario& sc, std::size_t user);

/// ln(1 + p g / (noise + interf)), nats per second per unit bandwidth.
double instant_rate(double power, double gain, double noise, double interf);

/// Received interference at `user` in `slot`: sum over j != user of P_j g_{j,user}.
double interference(const Profile& profile, const Scenario& sc, std::size_t user,
                    std::size_t slot);

/// Interference at `user` over every slot.
std::vector<double> interference_vector(const Profile& profile, const Scenario& sc,
                                        std::size_t user);

/// Achievable rates of `user` given a full profile.
std::vector<double> rates_of(const Profile& profile, const Scenario& sc, std::size_t user);

/// Rates of a single schedule against a fixed interference vector.
std::vector<double> rates_against(const Scenario& sc, std::size_t user,
                                  const std::vector<double>& power,
                                  const std::vector<double>& interf);

/// Queue/battery (and PU budget) paths. Values are not clamped: a negative
/// entry exposes an infeasible schedule.
std::vector<Trajectory> roll_trajectory(const Scenario& sc, const Profile& profile);

/// Average buffer content over the L+1 recorded states.
double mean_delay(const Trajectory& traj);

/// sum_l discount(l) * rate[l] * tau.
double discounted_throughput(const std::vector<double>& rates, const Scenario& sc);

enum class Role { Secondary, Primary };

struct Feasibility {
  bool feasible = true;
  double min_slack = 0.0;
  std::vector<double> energy_slack;   // harvested-energy prefix (battery part for PU)
  std::vector<double> data_slack;     // data prefix
  std::vector<double> power_slack;    // P >= 0 (for PU: min(V, W))
  std::vector<double> sir_slack;      // PU only: P0 - rho * I0
  double cost_slack = 0.0;            // PU only: horizon budget - c^T V
  std::string violated;               // first violated constraint family, if any
};

/// Prefix-form feasibility check. `interf` is the interference the schedule
/// sees (needed to turn powers into rates and for the PU's SIR floor).
Feasibility check_feasible(const Scenario& sc, const PowerSchedule& sched,
                           const std::vector<double>& interf, Role role,
                           double tol = kFeasibilityTol);

/// Same check, interference computed from the profile.
Feasibility check_feasible(const Scenario& sc, const Profile& profile, std::size_t user,
                           double tol = kFeasibilityTol);

}  // namespace ehcrn
