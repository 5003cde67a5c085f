// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jtload/commands.hpp"

namespace jtload::cli {

namespace detail {

inline const std::map<std::string, Format> kFormats{{"csv", Format::Csv}, {"pretty", Format::Pretty}};
inline const std::map<std::string, TwoCellMode> kModes{
    {"greedy", TwoCellMode::Greedy}, {"brute", TwoCellMode::Brute}, {"both", TwoCellMode::Both}};

inline void add_solver_flags(CLI::App* cmd, SolverConfig& cfg) {
  cmd->add_option("--tolerance", cfg.tolerance, "Fixed-point tolerance (max-norm)")
      ->envname("JTLOADSIM_TOLERANCE")
      ->capture_default_str();
  cmd->add_option("--max-iters", cfg.max_iterations, "Fixed-point iteration cap")
      ->envname("JTLOADSIM_MAX_ITERS")
      ->capture_default_str();
}

inline void add_optimizer_flags(CLI::App* cmd, OptimizerConfig& cfg) {
  cmd->add_option("--gamma", cfg.sweeps, "JT-MinMax sweeps")->envname("JTLOADSIM_GAMMA")->capture_default_str();
  cmd->add_option("--tau", cfg.condition_iters, "Iterations per sufficient-condition test")
      ->envname("JTLOADSIM_TAU")
      ->capture_default_str();
  cmd->add_option("--k-max", cfg.max_serving, "Maximum serving cells per UE")
      ->envname("JTLOADSIM_K_MAX")
      ->capture_default_str();
  add_solver_flags(cmd, cfg.solver);
}

inline void add_format_flag(CLI::App* cmd, Format& format) {
  cmd->add_option("--format", format, "Output format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case))
      ->envname("JTLOADSIM_FORMAT");
}

inline void add_generator_flags(CLI::App* cmd, scenario::GeneratorParams& p) {
  cmd->add_option("--seed", p.seed, "Random seed")->envname("JTLOADSIM_SEED")->capture_default_str();
  cmd->add_option("--hex-count", p.hex_count, "Number of hexagonal macro cells")->capture_default_str();
  cmd->add_option("--sc-per-hex", p.sc_per_hex, "Small cells per hexagon")->capture_default_str();
  cmd->add_option("--ue-per-hex", p.ue_per_hex, "UEs per hexagon")->capture_default_str();
  cmd->add_option("--radius", p.hex_circumradius_m, "Hexagon circumradius (m)")->capture_default_str();
  cmd->add_option("--ue-demand", p.ue_demand_bps, "Per-UE demand (bit/s)")->capture_default_str();
  cmd->add_option("--shadowing-sigma", p.shadowing_sigma_db, "Shadowing standard deviation (dB)")
      ->capture_default_str();
}

}  // namespace detail

/// Parses `args` (without the program name) and runs the selected subcommand.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Load-coupling simulator and joint-transmission optimizer for HetNets", "jtloadsim"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  scenario::GeneratorParams gen_params;
  std::string gen_output;
  auto* gen = app.add_subcommand("generate", "Generate a hexagonal HetNet scenario file");
  detail::add_generator_flags(gen, gen_params);
  gen->add_option("--output,-o", gen_output, "Output file (default: stdout)");

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Solve the load-coupling fixed point for one pattern");
  solve->add_option("scenario", solve_opts.scenario_path, "Scenario file")->required();
  solve->add_option("--pattern", solve_opts.pattern_path, "Pattern file (default: best-signal association)");
  detail::add_solver_flags(solve, solve_opts.solver);
  detail::add_format_flag(solve, solve_opts.format);
  solve->add_option("--output,-o", solve_opts.output_path, "Output file (default: stdout)");

  OptimizeOptions opt_opts;
  auto* optimize = app.add_subcommand("optimize", "Run JT-MinMax from the best-signal association");
  optimize->add_option("scenario", opt_opts.scenario_path, "Scenario file")->required();
  detail::add_optimizer_flags(optimize, opt_opts.optimizer);
  detail::add_format_flag(optimize, opt_opts.format);
  optimize->add_option("--output,-o", opt_opts.output_path, "Per-cell load report (default: stdout)");
  optimize->add_option("--pattern-out", opt_opts.pattern_out_path, "Write the final pattern (JSON)");
  optimize->add_option("--moves-out", opt_opts.moves_out_path, "Write accepted links (CSV)");
  optimize->add_option("--trace-out", opt_opts.trace_out_path, "Write max load per sweep (CSV)");

  TwoCellOptions two_opts;
  auto* twocell = app.add_subcommand("twocell", "Symmetric two-cell JT: greedy rule and exhaustive search");
  twocell->add_option("instance", two_opts.instance_path, "Two-cell instance file")->required();
  twocell->add_option("--mode", two_opts.mode, "greedy, brute or both")
      ->transform(CLI::CheckedTransformer(detail::kModes, CLI::ignore_case));
  detail::add_solver_flags(twocell, two_opts.solver);
  detail::add_format_flag(twocell, two_opts.format);
  twocell->add_option("--output,-o", two_opts.output_path, "Output file (default: stdout)");

  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Compare non-JT and JT-MinMax over a uniform demand grid");
  sweep->add_option("--scenario", sweep_opts.spec.scenario_path, "Scenario file (default: generate one)");
  detail::add_generator_flags(sweep, sweep_opts.spec.generator);
  sweep->add_option("--demand-min", sweep_opts.spec.demand_min_bps, "Lowest demand (bit/s)")
      ->envname("JTLOADSIM_DEMAND_MIN")
      ->capture_default_str();
  sweep->add_option("--demand-max", sweep_opts.spec.demand_max_bps, "Highest demand (bit/s)")
      ->envname("JTLOADSIM_DEMAND_MAX")
      ->capture_default_str();
  sweep->add_option("--demand-steps", sweep_opts.spec.demand_steps, "Grid points")
      ->envname("JTLOADSIM_DEMAND_STEPS")
      ->capture_default_str();
  detail::add_optimizer_flags(sweep, sweep_opts.spec.optimizer);
  detail::add_format_flag(sweep, sweep_opts.format);
  sweep->add_option("--output,-o", sweep_opts.output_path, "Sweep table (default: stdout)");
  sweep->add_option("--cells-output", sweep_opts.cells_output_path,
                    "Per-cell table at the max achievable demand (default: <output>_cells.csv)");
  sweep->add_option("--gnuplot", sweep_opts.gnuplot_path, "Write a gnuplot script for the tables");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (!app.get_subcommands().empty()) {
      err << "run with " << app.get_subcommands().front()->get_name() << " --help for usage\n";
    } else {
      err << "run with --help for usage\n";
    }
    return kExitUsage;
  }

  if (gen->parsed()) return cmd_generate(gen_params, gen_output, out, err);
  if (solve->parsed()) return cmd_solve(solve_opts, out, err);
  if (optimize->parsed()) return cmd_optimize(opt_opts, out, err);
  if (twocell->parsed()) return cmd_twocell(two_opts, out, err);
  if (sweep->parsed()) return cmd_sweep(sweep_opts, out, err);
  return kExitUsage;
}

}  // namespace jtload::cli
