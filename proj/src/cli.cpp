#include "ehcrn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ehcrn/games.hpp"
#include "ehcrn/generate.hpp"
#include "ehcrn/online.hpp"
#include "ehcrn/oracle.hpp"
#include "ehcrn/scenario_io.hpp"
#include "ehcrn/solver.hpp"

namespace ehcrn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

Mode parse_mode(const std::string& s) {
  if (s == "alg1") return Mode::Alg1;
  if (s == "neo") return Mode::Neo;
  if (s == "gog") return Mode::Gog;
  if (s == "sweep") return Mode::Sweep;
  if (s == "gen") return Mode::Gen;
  throw DomainError("mode: expected alg1|neo|gog|sweep|gen, got \"" + s + "\"");
}

std::vector<double> parse_range(const std::string& s) {
  std::vector<double> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("sweep-range: \"" + item + "\" is not a number");
    }
  }
  if (parts.size() != 3) throw DomainError("sweep-range: expected start:stop:step");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0.0) || stop < start) throw DomainError("sweep-range: need step > 0 and stop >= start");
  std::vector<double> out;
  const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  for (long long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

namespace {

struct Artifacts {
  std::vector<double> utilities;
  std::vector<Trajectory> trajectories;
  Profile profile;
  std::vector<IterationRecord> history;
  bool converged = true;
  std::size_t iterations = 0;
  json diagnostics = json::object();
};

NeOptions ne_options(const RunConfig& c) {
  NeOptions o;
  if (c.tol_ne) o.tol_ne = *c.tol_ne;
  if (c.max_iter) o.max_sweeps = *c.max_iter;
  if (c.jacobi) o.order = SweepOrder::Jacobi;
  return o;
}

NeoOptions neo_options(const RunConfig& c, const io::ScenarioFile& f) {
  NeoOptions o;
  o.ne = ne_options(c);
  o.eta = c.eta.value_or(f.run.eta.value_or(1.0));
  if (c.tol_neo) o.tol_neo = *c.tol_neo;
  if (c.max_iter) o.max_outer = *c.max_iter;
  return o;
}

GogOptions gog_options(const RunConfig& c) {
  GogOptions o;
  if (c.tol_gog) o.tol_outer = *c.tol_gog;
  if (c.max_iter) o.max_outer = *c.max_iter;
  return o;
}

std::vector<double> delays(const std::vector<Trajectory>& t) {
  std::vector<double> d;
  for (const Trajectory& x : t) d.push_back(mean_delay(x));
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw DomainError("out: cannot write " + p.string());
  out << text;
}

void write_artifacts(const fs::path& dir, const std::string& prefix, const std::string& mode,
                     const Scenario& sc, const Artifacts& a) {
  fs::create_directories(dir);
  std::ostringstream u, t, h;
  io::write_utilities_csv(u, sc, a.utilities, a.trajectories);
  io::write_trajectory_csv(t, sc, a.profile, a.trajectories);
  io::write_history_csv(h, a.history, sc.n_users());
  write_file(dir / (prefix + "utilities.csv"), u.str());
  write_file(dir / (prefix + "trajectory.csv"), t.str());
  write_file(dir / (prefix + "history.csv"), h.str());
  json s;
  s["mode"] = mode;
  s["converged"] = a.converged;
  s["iterations"] = a.iterations;
  s["utilities"] = a.utilities;
  s["mean_delays"] = delays(a.trajectories);
  s["diagnostics"] = a.diagnostics;
  write_file(dir / (prefix + "summary.json"), s.dump(2) + "\n");
}

void print_summary(std::ostream& log, const std::string& mode, const Artifacts& a) {
  log << mode << ": " << (a.converged ? "converged" : "NOT converged") << " after " << a.iterations
      << " iterations\n";
  for (std::size_t i = 0; i < a.utilities.size(); ++i) {
    log << "  T_" << i << " = " << io::format_number(a.utilities[i]) << "   D_" << i << " = "
        << io::format_number(mean_delay(a.trajectories[i])) << '\n';
  }
}

Artifacts from_equilibrium(const Scenario& sc, EquilibriumResult&& r) {
  Artifacts a;
  a.profile = std::move(r.schedules);
  a.utilities = std::move(r.utilities);
  a.trajectories = roll_trajectory(sc, a.profile);
  a.history = std::move(r.history);
  a.converged = r.converged;
  a.iterations = r.iterations;
  a.diagnostics["max_deviation_gain"] = r.max_deviation_gain;
  return a;
}

Profile start_profile(const io::ScenarioFile& f) {
  Profile p = io::initial_profile(f);
  p[kPrimaryUser] = primary_schedule(f.scenario, p[kPrimaryUser].power);
  return p;
}

Artifacts run_alg1(const io::ScenarioFile& f, const RunConfig& c) {
  return from_equilibrium(f.scenario, lower_ne(f.scenario, start_profile(f), ne_options(c)));
}

Artifacts run_neo(const io::ScenarioFile& f, const NeoOptions& o) {
  Artifacts a = from_equilibrium(f.scenario, neo(f.scenario, start_profile(f), o));
  a.diagnostics["eta"] = o.eta;
  bool all = true;
  for (const IterationRecord& r : a.history) all = all && r.pu_iterate_feasible;
  a.diagnostics["pu_iterates_feasible"] = all;
  return a;
}

Artifacts run_gog(const Scenario& sc, const GogOptions& o) {
  GogResult g = gog_run(sc, o);
  Artifacts a;
  a.profile = std::move(g.equilibrium.schedules);
  a.utilities = std::move(g.equilibrium.utilities);
  a.trajectories = std::move(g.trajectories);
  a.history = std::move(g.equilibrium.history);
  a.converged = g.equilibrium.converged;
  a.iterations = g.equilibrium.iterations;
  json flags = json::array();
  for (const SlotOutcome& s : g.slots) {
    flags.push_back({{"sir_binding", s.sir_binding}, {"sir_unmet", s.sir_unmet},
                     {"outer_iterations", s.outer_iterations}});
  }
  a.diagnostics["slots"] = flags;
  return a;
}

// Grid best response of every SU at the final profile against the continuous
// one. Returns false when some SU's grid value exceeds its current utility by
// more than the equilibrium slack, or trails it by more than the grid bound.
bool oracle_check(const Scenario& sc, const Profile& profile, std::ostream& log) {
  const std::size_t L = sc.horizon();
  if (L > 3) {
    log << "oracle-check: skipped (horizon " << L << " > 3)\n";
    return true;
  }
  const double per_slot = std::floor(std::pow(2e6, 1.0 / static_cast<double>(L)));
  bool ok = true;
  for (std::size_t i = 1; i < sc.n_users(); ++i) {
    const PrefixBounds pb = prefix_bounds(sc, i);
    const double top = std::max(pb.energy_cum.back() / sc.tau(), 1e-9);
    const oracle::GridSpec grid{top / per_slot};
    const std::vector<double> interf = interference_vector(profile, sc, i);
    const double current = discounted_throughput(rates_against(sc, i, profile[i].power, interf), sc);
    const oracle::OracleResult br = oracle::su_best_response(sc, i, interf, grid);
    const double bound = oracle::lipschitz_gap(sc, i, interf, grid.step);
    const bool good = br.objective <= current + 1e-6 + 1e-9 && current - br.objective <= bound + 1e-9;
    ok = ok && good;
    log << "oracle-check SU " << i << ": grid best " << io::format_number(br.objective) << ", current "
        << io::format_number(current) << ", grid bound " << io::format_number(bound) << ": "
        << (good ? "ok" : "MISMATCH") << '\n';
  }
  return ok;
}

Scenario with_value(const Scenario& sc, const std::string& var, double v) {
  ScenarioData d = sc.data();
  if (var == "cost_cap") d.cost_cap = v;
  else if (var == "sir_threshold") d.sir_threshold = v;
  else if (var == "noise_watts") d.noise_watts = v;
  else throw DomainError("sweep-var: expected cost_cap|sir_threshold|noise_watts, got \"" + var + "\"");
  return Scenario(std::move(d));
}

int run_sweep(const io::ScenarioFile& f, const RunConfig& c, std::ostream& log) {
  const std::vector<double> values = c.sweep_values.empty() ? f.run.sweep_values : c.sweep_values;
  if (values.empty()) throw DomainError("sweep-values: none given on the command line or in run.sweep_values");
  const std::string var = c.sweep_var.empty() ? f.run.sweep_var.value_or("cost_cap") : c.sweep_var;
  const std::size_t users = f.scenario.n_users();
  fs::create_directories(c.out_dir);

  std::ostringstream csv;
  csv << "value,neo_eta,neo_converged,neo_iterations";
  for (std::size_t i = 0; i < users; ++i) csv << ",neo_T" << i;
  for (std::size_t i = 0; i < users; ++i) csv << ",gog_T" << i;
  csv << '\n';

  int code = kOk;
  for (std::size_t k = 0; k < values.size(); ++k) {
    io::ScenarioFile point{f.name, with_value(f.scenario, var, values[k]), f.initial, f.run};
    NeoOptions o = neo_options(c, f);
    Artifacts neo_a = run_neo(point, o);
    // a period-2 cycle of the damped update is broken by a smaller step
    for (int tries = 0; c.eta_backoff && !neo_a.converged && tries < 3; ++tries) {
      o.eta *= 0.5;
      log << "  " << var << "=" << io::format_number(values[k]) << ": NEO did not converge, retrying with eta="
          << io::format_number(o.eta) << '\n';
      neo_a = run_neo(point, o);
    }
    if (!neo_a.converged) code = kNotConverged;
    Artifacts gog_a = run_gog(point.scenario, gog_options(c));

    const fs::path dir = c.out_dir / ("point_" + std::to_string(k));
    write_artifacts(dir, "neo_", "neo", point.scenario, neo_a);
    write_artifacts(dir, "gog_", "gog", point.scenario, gog_a);

    csv << io::format_number(values[k]) << ',' << io::format_number(o.eta) << ','
        << (neo_a.converged ? 1 : 0) << ',' << neo_a.iterations;
    for (double u : neo_a.utilities) csv << ',' << io::format_number(u);
    for (double u : gog_a.utilities) csv << ',' << io::format_number(u);
    csv << '\n';
    log << var << "=" << io::format_number(values[k]) << "  NEO T0=" << io::format_number(neo_a.utilities[0])
        << "  GoG T0=" << io::format_number(gog_a.utilities[0]) << '\n';
  }
  write_file(c.out_dir / "sweep.csv", csv.str());
  return code;
}

}  // namespace

int run(const RunConfig& c, std::ostream& log) {
  try {
    if (c.mode == Mode::Gen) {
      io::ScenarioFile f{"random-" + std::to_string(c.seed),
                         random_scenario(c.seed, c.gen_n_su, c.gen_horizon), std::nullopt, {}};
      fs::create_directories(c.out_dir);
      io::save_scenario(f, c.out_dir / "scenario.json");
      log << "wrote " << (c.out_dir / "scenario.json").string() << '\n';
      return kOk;
    }
    const io::ScenarioFile f = io::load_scenario(c.scenario);
    if (c.mode == Mode::Sweep) return run_sweep(f, c, log);

    Artifacts a;
    std::string name;
    switch (c.mode) {
      case Mode::Alg1:
        name = "alg1";
        a = run_alg1(f, c);
        break;
      case Mode::Neo:
        name = "neo";
        a = run_neo(f, neo_options(c, f));
        break;
      case Mode::Gog:
        name = "gog";
        a = run_gog(f.scenario, gog_options(c));
        break;
      default:
        break;
    }
    write_artifacts(c.out_dir, "", name, f.scenario, a);
    print_summary(log, name, a);
    bool ok = a.converged;
    if (c.oracle_check && c.mode != Mode::Gog) ok = oracle_check(f.scenario, a.profile, log) && ok;
    return ok ? kOk : kNotConverged;
  } catch (const DomainError& e) {
    log << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const InfeasibleError& e) {
    log << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  }
}

}  // namespace ehcrn::cli
