#include "ehcrn/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace ehcrn::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw DomainError(field + ": " + what);
}

const json& field(const json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end()) fail(key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) fail(name, "expected a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& name) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(name, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> vec(const json& v, const std::string& name) {
  if (!v.is_array()) fail(name, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], name + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<std::vector<double>> table(const json& v, const std::string& name) {
  if (!v.is_array()) fail(name, "expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(vec(v[k], name + "[" + std::to_string(k) + "]"));
  return out;
}

CostCapScope parse_scope(const json& v) {
  if (!v.is_string()) fail("cost_cap_scope", "expected \"average\" or \"total\"");
  const auto s = v.get<std::string>();
  if (s == "average") return CostCapScope::Average;
  if (s == "total") return CostCapScope::Total;
  fail("cost_cap_scope", "expected \"average\" or \"total\", got \"" + s + "\"");
}

}  // namespace

ScenarioFile parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("scenario: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("scenario", "top level must be an object");

  ScenarioData d;
  d.n_su = count(field(doc, "n_su"), "n_su");
  d.horizon = count(field(doc, "horizon"), "horizon");
  d.slot_seconds = number(field(doc, "slot_seconds"), "slot_seconds");
  d.noise_watts = number(field(doc, "noise_watts"), "noise_watts");
  const json& g = field(doc, "gain_tx_rx");
  if (!g.is_array()) fail("gain_tx_rx", "expected a 3-level nested array");
  for (std::size_t j = 0; j < g.size(); ++j) d.gain.push_back(table(g[j], "gain_tx_rx[" + std::to_string(j) + "]"));
  d.arrivals = table(field(doc, "arrivals_nats"), "arrivals_nats");
  d.harvest = table(field(doc, "harvest_joules"), "harvest_joules");
  d.price = vec(field(doc, "price_per_joule"), "price_per_joule");
  d.cost_cap = number(field(doc, "cost_cap"), "cost_cap");
  if (doc.contains("cost_cap_scope")) d.cost_cap_scope = parse_scope(doc["cost_cap_scope"]);
  d.sir_threshold = number(field(doc, "sir_threshold"), "sir_threshold");

  // Scenario validation reports internal field names; map them back to the file's keys.
  std::optional<Scenario> sc;
  try {
    sc.emplace(std::move(d));
  } catch (const DomainError& e) {
    std::string msg = e.what();
    for (const auto& [from, to] : {std::pair<std::string, std::string>{"arrivals", "arrivals_nats"},
                                   {"harvest", "harvest_joules"},
                                   {"price", "price_per_joule"},
                                   {"gain", "gain_tx_rx"}}) {
      if (msg.rfind(from, 0) == 0 && msg.rfind(to, 0) != 0) {
        msg = to + msg.substr(from.size());
        break;
      }
    }
    throw DomainError(msg);
  }

  if (doc.contains("name") && !doc["name"].is_string()) fail("name", "expected a string");
  ScenarioFile file{doc.value("name", std::string{}), std::move(*sc), std::nullopt, {}};
  const std::size_t L = file.scenario.horizon();
  if (doc.contains("initial")) {
    const json& ini = doc["initial"];
    if (!ini.is_object()) fail("initial", "expected an object");
    InitialPoint ip;
    if (ini.contains("pu_power_watts")) {
      ip.pu_power = vec(ini["pu_power_watts"], "initial.pu_power_watts");
      if (ip.pu_power.size() != L) fail("initial.pu_power_watts", "expected " + std::to_string(L) + " entries");
    }
    if (ini.contains("su_power_watts")) {
      ip.su_power = table(ini["su_power_watts"], "initial.su_power_watts");
      if (ip.su_power.size() != file.scenario.n_su()) {
        fail("initial.su_power_watts", "expected one row per secondary user");
      }
      for (const auto& row : ip.su_power) {
        if (row.size() != L) fail("initial.su_power_watts", "expected " + std::to_string(L) + " entries per row");
      }
    }
    for (double v : ip.pu_power) if (v < 0.0) fail("initial.pu_power_watts", "powers must be >= 0");
    for (const auto& row : ip.su_power)
      for (double v : row) if (v < 0.0) fail("initial.su_power_watts", "powers must be >= 0");
    file.initial = std::move(ip);
  }
  if (doc.contains("run")) {
    const json& run = doc["run"];
    if (!run.is_object()) fail("run", "expected an object");
    if (run.contains("eta")) file.run.eta = number(run["eta"], "run.eta");
    if (run.contains("sweep_var")) {
      if (!run["sweep_var"].is_string()) fail("run.sweep_var", "expected a string");
      file.run.sweep_var = run["sweep_var"].get<std::string>();
    }
    if (run.contains("sweep_values")) file.run.sweep_values = vec(run["sweep_values"], "run.sweep_values");
  }
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("scenario: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string dump_scenario(const ScenarioFile& file) {
  const ScenarioData& d = file.scenario.data();
  json doc;
  doc["name"] = file.name;
  doc["n_su"] = d.n_su;
  doc["horizon"] = d.horizon;
  doc["slot_seconds"] = d.slot_seconds;
  doc["noise_watts"] = d.noise_watts;
  doc["gain_tx_rx"] = d.gain;
  doc["arrivals_nats"] = d.arrivals;
  doc["harvest_joules"] = d.harvest;
  doc["price_per_joule"] = d.price;
  doc["cost_cap"] = d.cost_cap;
  doc["cost_cap_scope"] = d.cost_cap_scope == CostCapScope::Total ? "total" : "average";
  doc["sir_threshold"] = d.sir_threshold;
  if (file.initial) {
    json ini = json::object();
    if (!file.initial->pu_power.empty()) ini["pu_power_watts"] = file.initial->pu_power;
    if (!file.initial->su_power.empty()) ini["su_power_watts"] = file.initial->su_power;
    doc["initial"] = ini;
  }
  json run = json::object();
  if (file.run.eta) run["eta"] = *file.run.eta;
  if (file.run.sweep_var) run["sweep_var"] = *file.run.sweep_var;
  if (!file.run.sweep_values.empty()) run["sweep_values"] = file.run.sweep_values;
  if (!run.empty()) doc["run"] = run;
  return doc.dump(2) + "\n";
}

void save_scenario(const ScenarioFile& file, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("scenario: cannot write " + path.string());
  out << dump_scenario(file);
}

Profile initial_profile(const ScenarioFile& file) {
  const Scenario& sc = file.scenario;
  Profile p = zero_profile(sc);
  if (!file.initial) return p;
  if (!file.initial->pu_power.empty()) p[kPrimaryUser].power = file.initial->pu_power;
  for (std::size_t i = 0; i < file.initial->su_power.size(); ++i) p[i + 1].power = file.initial->su_power[i];
  // grid/battery split is derived by the caller (canonical split)
  p[kPrimaryUser].grid.clear();
  p[kPrimaryUser].battery.clear();
  return p;
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
  return std::string(buf, r.ptr);
}

void write_utilities_csv(std::ostream& os, const Scenario& sc, const std::vector<double>& utilities,
                         const std::vector<Trajectory>& trajectories) {
  os << "user,role,utility_T,mean_delay_D\n";
  for (std::size_t i = 0; i < sc.n_users(); ++i) {
    os << i << ',' << (i == kPrimaryUser ? "PU" : "SU") << ',' << format_number(utilities.at(i)) << ','
       << format_number(mean_delay(trajectories.at(i))) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const Scenario& sc, const Profile& profile,
                          const std::vector<Trajectory>& trajectories) {
  os << "user,slot,queue_nats,battery_joules,budget,rate_nats_per_s,interference_watts,power_watts,"
        "grid_watts,battery_watts\n";
  const std::size_t L = sc.horizon();
  for (std::size_t i = 0; i < sc.n_users(); ++i) {
    const Trajectory& t = trajectories.at(i);
    const PowerSchedule& s = profile.at(i);
    for (std::size_t l = 0; l <= L; ++l) {
      os << i << ',' << (l + 1) << ',' << format_number(t.queue.at(l)) << ','
         << format_number(t.battery.at(l)) << ',';
      if (!t.budget.empty()) os << format_number(t.budget.at(l));
      os << ',';
      if (l < L) {
        os << format_number(t.rates[l]) << ',' << format_number(t.interference[l]) << ','
           << format_number(s.power[l]) << ',';
        if (s.has_split()) os << format_number(s.grid[l]) << ',' << format_number(s.battery[l]);
        else os << ',';
      } else {
        os << ",,,,";  // terminal state row
      }
      os << '\n';
    }
  }
}

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history,
                       std::size_t n_users) {
  os << "iteration";
  for (std::size_t i = 0; i < n_users; ++i) os << ",T" << i;
  os << ",max_change,inner_iterations,pu_iterate_feasible\n";
  for (const IterationRecord& r : history) {
    os << r.iteration;
    for (std::size_t i = 0; i < n_users; ++i) os << ',' << format_number(r.utilities.at(i));
    os << ',' << format_number(r.max_change) << ',' << r.inner_sweeps << ','
       << (r.pu_iterate_feasible ? 1 : 0) << '\n';
  }
}

}  // namespace ehcrn::io
