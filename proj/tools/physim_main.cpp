#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "physim/collapse_oracle.hpp"
#include "physim/config_io.hpp"
#include "physim/scenarios.hpp"

namespace {

using physim::AssignmentMode;
using physim::ScenarioConfig;

struct Options {
  std::string scenario;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::string mode;
  double tol = 0.0;
  bool emit_ledger = false;
};

void add_selection_flags(CLI::App* cmd, Options& opts) {
  cmd->add_option("--scenario", opts.scenario, "Built-in scenario name or a config path");
  cmd->add_option("--config", opts.config_path, "Scenario config file (JSON)");
  cmd->add_option("--seed", opts.seed, "Master seed override");
  cmd->add_option("--trials", opts.trials, "Trial count override");
  cmd->add_option("--mode", opts.mode, "Assignment mode: free or strict")
      ->check(CLI::IsMember({"free", "strict"}));
  cmd->add_option("--tol", opts.tol, "Definite-classification tolerance override");
}

bool is_builtin(const std::string& name) {
  for (const std::string& builtin : physim::builtin_scenarios()) {
    if (builtin == name) {
      return true;
    }
  }
  return false;
}

ScenarioConfig resolve_config(const CLI::App* cmd, const Options& opts) {
  ScenarioConfig config;
  if (!opts.config_path.empty()) {
    config = physim::load_config_file(opts.config_path);
  } else if (!opts.scenario.empty()) {
    if (is_builtin(opts.scenario)) {
      config = physim::make_builtin(opts.scenario);
    } else if (std::ifstream(opts.scenario).good()) {
      config = physim::load_config_file(opts.scenario);
    } else {
      throw physim::ConfigError("unknown scenario '" + opts.scenario +
                                "' (try the list subcommand)");
    }
  } else {
    throw physim::ConfigError("select a scenario with --scenario or --config");
  }

  if (cmd->count("--seed") > 0) {
    config.seed = opts.seed;
  }
  if (cmd->count("--trials") > 0) {
    if (opts.trials == 0) {
      throw physim::ConfigError("trials must be positive");
    }
    config.trials = opts.trials;
  }
  if (cmd->count("--mode") > 0) {
    config.mode = opts.mode == "strict" ? AssignmentMode::kStrict : AssignmentMode::kFree;
  }
  if (cmd->count("--tol") > 0) {
    if (!(opts.tol > 0.0) || opts.tol >= 1.0) {
      throw physim::ConfigError("tol must lie in (0, 1)");
    }
    config.definite_tol = opts.tol;
  }
  return config;
}

double diagnostic(const physim::RunStatistics& stats, const std::string& key) {
  const auto it = stats.diagnostics.find(key);
  return it == stats.diagnostics.end() ? 0.0 : it->second;
}

// Invariant gates shared by run reporting; mirrors the verify thresholds.
std::vector<std::string> run_violations(const ScenarioConfig& config,
                                        const physim::RunStatistics& stats) {
  std::vector<std::string> violations;
  if (diagnostic(stats, "ledger_failures") > 0.0) {
    violations.push_back("ledger replay failed for some trials");
  }
  if (diagnostic(stats, "oracle_max_delta") > 1e-9) {
    violations.push_back("exact chain deviates from the collapse oracle");
  }
  if (diagnostic(stats, "max_norm_deviation") > 1e-10) {
    violations.push_back("state norm drifted");
  }
  if (diagnostic(stats, "max_unitarity_defect") > 1e-8) {
    violations.push_back("accumulated evolution lost unitarity");
  }
  if (stats.diagnostics.count("max_schmidt_residual") > 0 &&
      diagnostic(stats, "max_schmidt_residual") > 1e-8) {
    violations.push_back("post-measurement state entangled across the declared cut");
  }
  if (config.conserved_observable && stats.conserved_drift > 1e-9) {
    violations.push_back("conserved expectation drifted");
  }
  if (stats.diagnostics.count("order_swap_max_delta") > 0 &&
      diagnostic(stats, "order_swap_max_delta") > 1e-9) {
    violations.push_back("event order changed the exact chain");
  }
  return violations;
}

int do_run(const CLI::App* cmd, const Options& opts) {
  const ScenarioConfig config = resolve_config(cmd, opts);

  std::ofstream file;
  std::ostream* sink = &std::cout;
  if (!opts.out_path.empty()) {
    file.open(opts.out_path, std::ios::binary | std::ios::trunc);
    if (!file) {
      std::cerr << "cannot open output file '" << opts.out_path << "'\n";
      return 2;
    }
    sink = &file;
  }

  // Ledger lines are collected per trial slot so parallel workers can hand
  // them off without reordering the output.
  std::vector<std::string> slots;
  physim::TrialCallback callback;
  if (opts.emit_ledger) {
    slots.resize(config.trials);
    callback = [&slots](std::size_t trial, const physim::World& world,
                        const std::vector<physim::PhysicationOutcome>&) {
      std::string& slot = slots[trial];
      for (const physim::LedgerEvent& event : world.ledger) {
        slot += physim::ledger_event_record(trial, event);
        slot += "\n";
      }
    };
  }

  const physim::RunStatistics stats = physim::run(config, callback);

  (*sink) << physim::header_record(config) << "\n";
  for (const std::string& slot : slots) {
    (*sink) << slot;
  }
  (*sink) << physim::summary_record(stats) << "\n";
  sink->flush();
  if (!(*sink)) {
    std::cerr << "failed writing results\n";
    return 2;
  }

  std::cerr << "scenario " << config.name << ": " << config.trials << " trials in "
            << stats.wall_time << " s, tvd_vs_oracle " << stats.tvd_vs_oracle << "\n";

  const std::vector<std::string> violations = run_violations(config, stats);
  for (const std::string& violation : violations) {
    std::cerr << "invariant violation: " << violation << "\n";
  }
  return violations.empty() ? 0 : 3;
}

int do_verify(const CLI::App* cmd, const Options& opts) {
  const ScenarioConfig config = resolve_config(cmd, opts);
  const std::vector<std::string> violations = physim::verify_scenario(config);
  if (violations.empty()) {
    std::cout << "PASS " << config.name << "\n";
    return 0;
  }
  for (const std::string& violation : violations) {
    std::cout << "FAIL " << config.name << ": " << violation << "\n";
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physim: single-history quantum measurement scenarios with a "
               "projection-free assignment engine"};
  app.require_subcommand(1);

  Options run_opts;
  CLI::App* run_cmd =
      app.add_subcommand("run", "Execute a scenario; write line-delimited records");
  add_selection_flags(run_cmd, run_opts);
  run_cmd->add_option("--out", run_opts.out_path, "Output file (default: stdout)");
  run_cmd->add_flag("--emit-ledger", run_opts.emit_ledger,
                    "Write one record per ledger event per trial");

  Options verify_opts;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "Deterministic invariant checks, no sampling; exit 3 on violation");
  add_selection_flags(verify_cmd, verify_opts);

  CLI::App* list_cmd = app.add_subcommand("list", "List built-in scenarios");

  Options explain_opts;
  CLI::App* explain_cmd =
      app.add_subcommand("explain", "Print a scenario's event schedule");
  add_selection_flags(explain_cmd, explain_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message and usage to the error stream
    return 1;
  }

  try {
    if (run_cmd->parsed()) {
      return do_run(run_cmd, run_opts);
    }
    if (verify_cmd->parsed()) {
      return do_verify(verify_cmd, verify_opts);
    }
    if (list_cmd->parsed()) {
      for (const std::string& name : physim::builtin_scenarios()) {
        std::cout << name << "\n";
      }
      return 0;
    }
    if (explain_cmd->parsed()) {
      const ScenarioConfig config = resolve_config(explain_cmd, explain_opts);
      std::cout << physim::describe_schedule(config);
      return 0;
    }
  } catch (const physim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const physim::RelationViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const physim::ProtectedSectorViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const physim::Error& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
