#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ehcrn/cli.hpp"
#include "ehcrn/model.hpp"

int main(int argc, char** argv) {
  using namespace ehcrn;
  CLI::App app{"Power control games for energy-harvesting cognitive radio networks"};
  cli::RunConfig cfg;
  std::string mode = "neo";
  std::string range;
  double eta = 0, tol_ne = 0, tol_neo = 0, tol_gog = 0;
  std::size_t max_iter = 0;
  bool no_backoff = false;

  app.add_option("--mode", mode, "alg1 | neo | gog | sweep | gen")->capture_default_str();
  app.add_option("--scenario", cfg.scenario, "scenario JSON file");
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  auto* eta_opt = app.add_option("--eta", eta, "NEO step size in (0, 1]");
  auto* tol_ne_opt = app.add_option("--tol-ne", tol_ne, "lower equilibrium tolerance (W)");
  auto* tol_neo_opt = app.add_option("--tol-neo", tol_neo, "NEO outer tolerance (W)");
  auto* tol_gog_opt = app.add_option("--tol-gog", tol_gog, "GoG per-slot outer tolerance (W)");
  auto* max_iter_opt = app.add_option("--max-iter", max_iter, "max sweeps / outer iterations");
  app.add_flag("--jacobi", cfg.jacobi, "simultaneous instead of sequential SU updates");
  app.add_option("--sweep-var", cfg.sweep_var, "cost_cap | sir_threshold | noise_watts");
  app.add_option("--sweep-range", range, "start:stop:step");
  app.add_option("--sweep-values", cfg.sweep_values, "explicit sweep values")->delimiter(',');
  app.add_flag("--no-eta-backoff", no_backoff, "sweep: keep eta fixed even when NEO cycles");
  app.add_flag("--oracle-check", cfg.oracle_check, "compare SU schedules with a grid search (L <= 3)");
  app.add_option("--seed", cfg.seed, "gen: random seed")->capture_default_str();
  app.add_option("--n-su", cfg.gen_n_su, "gen: number of secondary users")->capture_default_str();
  app.add_option("--horizon", cfg.gen_horizon, "gen: number of slots")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kValidationError;
  }

  try {
    cfg.mode = cli::parse_mode(mode);
    if (!range.empty()) cfg.sweep_values = cli::parse_range(range);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kValidationError;
  }
  if (cfg.mode != cli::Mode::Gen && cfg.scenario.empty()) {
    std::cerr << "error: --scenario is required for mode " << mode << '\n';
    return cli::kValidationError;
  }
  if (*eta_opt) cfg.eta = eta;
  if (*tol_ne_opt) cfg.tol_ne = tol_ne;
  if (*tol_neo_opt) cfg.tol_neo = tol_neo;
  if (*tol_gog_opt) cfg.tol_gog = tol_gog;
  if (*max_iter_opt) cfg.max_iter = max_iter;
  cfg.eta_backoff = !no_backoff;
  return cli::run(cfg, std::cout);
}
