// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jtload/model.hpp"
#include "jtload/optimizer.hpp"
#include "jtload/scenario.hpp"
#include "jtload/scenario_io.hpp"
#include "jtload/solver.hpp"
#include "jtload/twocell.hpp"

/// Subcommand implementations behind the `jtloadsim` executable.
///
/// Exit codes: 0 success (infeasible or diverged points are data, not
/// failures), 2 usage or input error, 3 runtime failure.
/// CSV output: header row, comma separated, LF line endings, floats with 9
/// significant digits, cell and UE ids 1-based.
namespace jtload::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

enum class Format { Csv, Pretty };

inline std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace detail {

// Writes to a file, or to `fallback` when the path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }

  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

inline const char* status_label(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::IterationCapReached: return "iteration_cap";
  }
  return "unknown";
}

inline NetworkScenario load_scenario(const std::string& path) {
  return io::deserialize(io::read_json_file(path));
}

}  // namespace detail

// ---------------------------------------------------------------- generate

inline int cmd_generate(const scenario::GeneratorParams& params, const std::string& output_path,
                        std::ostream& out, std::ostream& err) {
  try {
    params.validate();
  } catch (const InvalidParameterError& e) {
    err << "error: invalid generator parameter " << e.what() << '\n';
    return kExitUsage;
  }
  for (const auto& w : scenario::generator_warnings(params)) err << "warning: " << w << '\n';
  const NetworkScenario s = scenario::generate(params);
  const auto doc = io::serialize(s, {params.seed, params});
  try {
    detail::Sink sink(output_path, out);
    *sink << doc.dump(2) << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
  std::string scenario_path;
  std::string pattern_path;  // empty: best-signal association
  SolverConfig solver;
  Format format = Format::Csv;
  std::string output_path;
};

inline void write_solve_report(std::ostream& os, const NetworkScenario& s, const FixedPointResult& fp,
                               Format format) {
  if (format == Format::Csv) {
    os << "cell,kind,load,status,max_load,iterations,residual\n";
    for (Index i = 0; i < s.num_cells(); ++i) {
      os << i + 1 << ',' << to_string(s.cell(i).kind) << ',' << fmt9(fp.load[i]) << ','
         << detail::status_label(fp.status) << ',' << fmt9(max_load(fp.load)) << ',' << fp.iterations
         << ',' << fmt9(fp.residual) << '\n';
    }
    return;
  }
  os << "status:      " << detail::status_label(fp.status) << " after " << fp.iterations
     << " iterations (residual " << fmt9(fp.residual) << ")\n";
  os << "max load:    " << fmt9(max_load(fp.load)) << (fp.capacity_violated ? "  (exceeds 1)" : "")
     << '\n';
  os << "load spread: " << fmt9(load_spread(fp.load)) << "\n\n";
  os << "cell  kind   load\n";
  for (Index i = 0; i < s.num_cells(); ++i) {
    char line[96];
    std::snprintf(line, sizeof line, "%-5lld %-6s %s\n", static_cast<long long>(i + 1),
                  to_string(s.cell(i).kind).c_str(), fmt9(fp.load[i]).c_str());
    os << line;
  }
}

inline int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<NetworkScenario> s;
  std::optional<JtPattern> pattern;
  try {
    opts.solver.validate();
    s = detail::load_scenario(opts.scenario_path);
    pattern = opts.pattern_path.empty() ? best_signal_association(*s)
                                        : io::deserialize_pattern(io::read_json_file(opts.pattern_path));
    ::jtload::detail::check_shapes(*s, *pattern);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const FixedPointResult fp = fixed_point_solve(*s, *pattern, opts.solver);
    detail::Sink sink(opts.output_path, out);
    write_solve_report(*sink, *s, fp, opts.format);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- optimize

struct OptimizeOptions {
  std::string scenario_path;
  OptimizerConfig optimizer;
  Format format = Format::Csv;
  std::string output_path;       // per-cell load report
  std::string pattern_out_path;  // final JT pattern (JSON)
  std::string moves_out_path;    // accepted moves (CSV)
  std::string trace_out_path;    // per-sweep max load (CSV)
};

inline void write_moves_csv(std::ostream& os, const OptimizeResult& r) {
  os << "sweep,cell,ue,condition_iteration,max_load_after\n";
  for (const auto& m : r.accepted_moves) {
    os << m.sweep << ',' << m.cell + 1 << ',' << m.ue + 1 << ',' << m.condition_iteration << ','
       << fmt9(m.max_load_after) << '\n';
  }
}

inline void write_trace_csv(std::ostream& os, const OptimizeResult& r) {
  os << "sweep,max_load\n";
  for (std::size_t s = 0; s < r.trace.size(); ++s) os << s << ',' << fmt9(r.trace[s]) << '\n';
}

inline void write_cell_comparison_csv(std::ostream& os, const NetworkScenario& s, const LoadVector& nonjt,
                                      const LoadVector& jt) {
  os << "cell,kind,nonjt_load,jt_load\n";
  for (Index i = 0; i < s.num_cells(); ++i) {
    os << i + 1 << ',' << to_string(s.cell(i).kind) << ',' << fmt9(nonjt[i]) << ',' << fmt9(jt[i]) << '\n';
  }
}

inline int cmd_optimize(const OptimizeOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<NetworkScenario> s;
  try {
    s = detail::load_scenario(opts.scenario_path);
    opts.optimizer.validate(s->num_cells());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const JtPattern baseline = best_signal_association(*s);
    const FixedPointResult initial = fixed_point_solve(*s, baseline, opts.optimizer.solver);
    if (!initial.converged()) {
      err << "error: non-JT baseline " << detail::status_label(initial.status) << " after "
          << initial.iterations << " iterations (max load " << fmt9(max_load(initial.load))
          << "); demand is not supportable\n";
      return kExitRuntime;
    }
    const OptimizeResult r = jt_minmax(*s, baseline, opts.optimizer);

    if (!opts.pattern_out_path.empty()) io::write_json_file(opts.pattern_out_path, io::serialize_pattern(r.pattern));
    if (!opts.moves_out_path.empty()) {
      detail::Sink sink(opts.moves_out_path, out);
      write_moves_csv(*sink, r);
    }
    if (!opts.trace_out_path.empty()) {
      detail::Sink sink(opts.trace_out_path, out);
      write_trace_csv(*sink, r);
    }
    detail::Sink sink(opts.output_path, out);
    if (opts.format == Format::Csv) {
      write_cell_comparison_csv(*sink, *s, r.initial_fixed_point.load, r.load());
    } else {
      std::ostream& os = *sink;
      const double before = max_load(r.initial_fixed_point.load);
      const double after = max_load(r.load());
      os << "non-JT max load:    " << fmt9(before) << '\n';
      os << "JT-MinMax max load: " << fmt9(after) << "  (reduction "
         << fmt9(before > 0.0 ? 100.0 * (before - after) / before : 0.0) << " %)\n";
      os << "accepted links:     " << r.accepted_moves.size() << '\n';
      os << "\nmax load per sweep:\n";
      for (std::size_t k = 0; k < r.trace.size(); ++k) os << "  " << k << "  " << fmt9(r.trace[k]) << '\n';
      if (!r.accepted_moves.empty()) {
        os << "\naccepted links (sweep, cell, ue, k):\n";
        for (const auto& m : r.accepted_moves) {
          os << "  " << m.sweep << "  " << m.cell + 1 << "  " << m.ue + 1 << "  " << m.condition_iteration << '\n';
        }
      }
      os << "\ncell  kind   non-JT        JT-MinMax\n";
      for (Index i = 0; i < s->num_cells(); ++i) {
        char line[128];
        std::snprintf(line, sizeof line, "%-5lld %-6s %-13s %s\n", static_cast<long long>(i + 1),
                      to_string(s->cell(i).kind).c_str(), fmt9(r.initial_fixed_point.load[i]).c_str(),
                      fmt9(r.load()[i]).c_str());
        os << line;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepSpec {
  double demand_min_bps = 50e3;
  double demand_max_bps = 500e3;
  int demand_steps = 10;
  OptimizerConfig optimizer;
  std::string scenario_path;                 // when empty, generate from `generator`
  scenario::GeneratorParams generator;

  void validate() const {
    if (!(demand_min_bps > 0.0)) throw InvalidParameterError("demand-min", "must be positive");
    if (demand_steps < 1) throw InvalidParameterError("demand-steps", "must be at least 1");
    if (demand_steps > 1 && !(demand_max_bps >= demand_min_bps)) {
      throw InvalidParameterError("demand-max", "must be at least demand-min");
    }
  }

  std::vector<double> demands() const {
    std::vector<double> d;
    for (int k = 0; k < demand_steps; ++k) {
      d.push_back(demand_steps == 1 ? demand_min_bps
                                    : demand_min_bps + (demand_max_bps - demand_min_bps) * k / (demand_steps - 1));
    }
    return d;
  }
};

struct SweepRow {
  double demand_bps = 0.0;
  SolveStatus nonjt_status = SolveStatus::IterationCapReached;
  std::optional<SolveStatus> jt_status;  // empty when the baseline did not converge
  double nonjt_max_load = 0.0;
  double jt_max_load = 0.0;
  std::optional<double> reduction_percent;
  double nonjt_spread = 0.0;
  double jt_spread = 0.0;
  std::optional<double> spread_reduction_percent;
  bool nonjt_within_capacity = false;
  bool jt_within_capacity = false;
  std::size_t accepted_moves = 0;
  LoadVector nonjt_load;
  LoadVector jt_load;

  bool both_converged() const noexcept {
    return nonjt_status == SolveStatus::Converged && jt_status == SolveStatus::Converged;
  }
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<std::size_t> max_achievable;  // index of the largest demand with a within-capacity baseline
};

inline SweepRow run_sweep_point(const NetworkScenario& s, double demand_bps, const OptimizerConfig& config) {
  SweepRow row;
  row.demand_bps = demand_bps;
  const NetworkScenario point = s.with_uniform_demand(demand_bps);
  const JtPattern baseline = best_signal_association(point);
  const FixedPointResult initial = fixed_point_solve(point, baseline, config.solver);
  row.nonjt_status = initial.status;
  row.nonjt_load = initial.load;
  row.nonjt_max_load = max_load(initial.load);
  row.nonjt_spread = load_spread(initial.load);
  row.nonjt_within_capacity = initial.converged() && !initial.capacity_violated;
  if (!initial.converged()) return row;

  const OptimizeResult r = jt_minmax(point, baseline, config);
  row.jt_status = r.fixed_point.status;
  row.jt_load = r.load();
  row.jt_max_load = max_load(r.load());
  row.jt_spread = load_spread(r.load());
  row.jt_within_capacity = r.fixed_point.converged() && !r.fixed_point.capacity_violated;
  row.accepted_moves = r.accepted_moves.size();
  if (row.both_converged()) {
    row.reduction_percent = 100.0 * (row.nonjt_max_load - row.jt_max_load) / row.nonjt_max_load;
    row.spread_reduction_percent =
        row.nonjt_spread > 0.0 ? 100.0 * (row.nonjt_spread - row.jt_spread) / row.nonjt_spread : 0.0;
  }
  return row;
}

inline SweepResult run_sweep(const NetworkScenario& s, const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  for (double d : spec.demands()) {
    result.rows.push_back(run_sweep_point(s, d, spec.optimizer));
    if (result.rows.back().nonjt_within_capacity) result.max_achievable = result.rows.size() - 1;
  }
  return result;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt9(*v) : std::string(); };
  os << "demand_bps,nonjt_status,jt_status,nonjt_max_load,jtminmax_max_load,reduction_percent,"
        "nonjt_spread,jt_spread,spread_reduction_percent,nonjt_within_capacity,jt_within_capacity,"
        "accepted_moves\n";
  for (const auto& row : r.rows) {
    const bool ran = row.jt_status.has_value();
    os << fmt9(row.demand_bps) << ',' << detail::status_label(row.nonjt_status) << ','
       << (ran ? detail::status_label(*row.jt_status) : "not_run") << ',' << fmt9(row.nonjt_max_load) << ','
       << (ran ? fmt9(row.jt_max_load) : "") << ',' << opt(row.reduction_percent) << ','
       << fmt9(row.nonjt_spread) << ',' << (ran ? fmt9(row.jt_spread) : "") << ','
       << opt(row.spread_reduction_percent) << ',' << (row.nonjt_within_capacity ? 1 : 0) << ','
       << (row.jt_within_capacity ? 1 : 0) << ',' << row.accepted_moves << '\n';
  }
}

/// Human-readable summary lines (prefixed with '#').
inline void write_sweep_summary(std::ostream& os, const SweepResult& r) {
  double sum = 0.0;
  int count = 0;
  for (const auto& row : r.rows) {
    if (row.reduction_percent) {
      sum += *row.reduction_percent;
      ++count;
    }
  }
  os << "# max achievable demand: largest grid point whose non-JT baseline converges with every cell load <= 1\n";
  if (r.max_achievable) {
    const auto& row = r.rows[*r.max_achievable];
    os << "# max achievable demand (bps): " << fmt9(row.demand_bps) << '\n';
    os << "# max-load reduction at max achievable demand (%): "
       << (row.reduction_percent ? fmt9(*row.reduction_percent) : "n/a") << '\n';
    os << "# spread reduction at max achievable demand (%): "
       << (row.spread_reduction_percent ? fmt9(*row.spread_reduction_percent) : "n/a") << '\n';
  } else {
    os << "# max achievable demand: none on this grid\n";
  }
  if (count > 0) {
    os << "# mean max-load reduction over the " << count << " grid points where both runs converged (%): "
       << fmt9(sum / count) << '\n';
  } else {
    os << "# warning: no grid point had both runs converge\n";
  }
}

/// Re-renders CSV text as space-aligned columns.
inline std::string align_columns(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> width;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream fields(line);
    for (std::string f; std::getline(fields, f, ',');) cells.push_back(f.empty() ? "-" : f);
    if (!line.empty() && line.back() == ',') cells.push_back("-");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], cells[c].size());
    }
    rows.push_back(std::move(cells));
  }
  std::string text;
  for (const auto& cells : rows) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      text += cells[c];
      if (c + 1 < cells.size()) text += std::string(width[c] - cells[c].size() + 2, ' ');
    }
    text += '\n';
  }
  return text;
}

inline std::string gnuplot_script(const std::string& sweep_csv, const std::string& cells_csv) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set key top left\n"
     << "set multiplot layout 1,2\n"
     << "set xlabel 'user demand (bps)'\nset ylabel 'maximum cell load'\n"
     << "plot '" << sweep_csv << "' using 1:4 skip 1 with linespoints title 'non-JT', \\\n"
     << "     '' using 1:5 skip 1 with linespoints title 'JT-MinMax'\n"
     << "set xlabel 'cell'\nset ylabel 'load'\nset style data histograms\nset style fill solid 0.6\n"
     << "plot '" << cells_csv << "' using 3:xtic(1) skip 1 title 'non-JT', '' using 4 skip 1 title 'JT-MinMax'\n"
     << "unset multiplot\n";
  return os.str();
}

struct SweepOptions {
  SweepSpec spec;
  Format format = Format::Csv;
  std::string output_path;        // sweep CSV
  std::string cells_output_path;  // per-cell table; default <output stem>_cells.csv
  std::string gnuplot_path;
};

inline std::string default_cells_path(const std::string& output_path) {
  if (output_path.empty() || output_path == "-") return {};
  std::filesystem::path p(output_path);
  const std::string ext = p.has_extension() ? p.extension().string() : std::string(".csv");
  p.replace_filename(p.stem().string() + "_cells" + ext);
  return p.string();
}

inline int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<NetworkScenario> s;
  try {
    opts.spec.validate();
    if (opts.spec.scenario_path.empty()) {
      opts.spec.generator.validate();
      for (const auto& w : scenario::generator_warnings(opts.spec.generator)) err << "warning: " << w << '\n';
      s = scenario::generate(opts.spec.generator);
    } else {
      s = detail::load_scenario(opts.spec.scenario_path);
    }
    opts.spec.optimizer.validate(s->num_cells());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const SweepResult r = run_sweep(*s, opts.spec);
    {
      detail::Sink sink(opts.output_path, out);
      std::ostringstream csv;
      write_sweep_csv(csv, r);
      *sink << (opts.format == Format::Csv ? csv.str() : align_columns(csv.str()));
    }
    const std::string cells_path =
        opts.cells_output_path.empty() ? default_cells_path(opts.output_path) : opts.cells_output_path;
    if (r.max_achievable && r.rows[*r.max_achievable].jt_status) {
      const auto& row = r.rows[*r.max_achievable];
      if (cells_path.empty()) {
        out << '\n';
        write_cell_comparison_csv(out, *s, row.nonjt_load, row.jt_load);
      } else {
        detail::Sink sink(cells_path, out);
        write_cell_comparison_csv(*sink, *s, row.nonjt_load, row.jt_load);
      }
    }
    if (!opts.gnuplot_path.empty()) {
      detail::Sink sink(opts.gnuplot_path, out);
      *sink << gnuplot_script(opts.output_path.empty() ? "sweep.csv" : opts.output_path,
                              cells_path.empty() ? "sweep_cells.csv" : cells_path);
    }
    bool any = false;
    for (const auto& row : r.rows) any = any || row.nonjt_status == SolveStatus::Converged;
    if (!any) err << "warning: the non-JT baseline diverged at every demand point\n";
    write_sweep_summary(err, r);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- twocell

enum class TwoCellMode { Greedy, Brute, Both };

inline constexpr double kTwoCellAgreementTolerance = 1e-6;

struct TwoCellOptions {
  std::string instance_path;
  TwoCellMode mode = TwoCellMode::Both;
  SolverConfig solver;
  Format format = Format::Pretty;
  std::string output_path;
};

inline int cmd_twocell(const TwoCellOptions& opts, std::ostream& out, std::ostream& err) {
  std::optional<twocell::TwoCellInstance> inst;
  try {
    opts.solver.validate();
    inst = io::deserialize_two_cell(io::read_json_file(opts.instance_path));
    if (opts.mode != TwoCellMode::Greedy && inst->num_pairs() > twocell::kBruteForceMaxPairs) {
      err << "error: brute force is limited to " << twocell::kBruteForceMaxPairs << " UE pairs, instance has "
          << inst->num_pairs() << '\n';
      return kExitUsage;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    std::optional<twocell::GreedySolution> greedy;
    std::optional<twocell::BruteForceSolution> brute;
    if (opts.mode != TwoCellMode::Brute) greedy = twocell::greedy_optimal(*inst, opts.solver);
    if (opts.mode != TwoCellMode::Greedy) brute = twocell::brute_force_minmax(*inst, opts.solver);
    std::optional<bool> agree;
    double difference = 0.0;
    if (greedy && brute) {
      difference = greedy->objective - brute->objective;
      agree = std::abs(difference) <= kTwoCellAgreementTolerance;
    }

    detail::Sink sink(opts.output_path, out);
    std::ostream& os = *sink;
    auto row = [&](const char* name, const twocell::TwoCellSolution& sol) {
      const LoadVector& x = sol.fixed_point.load;
      const bool has = x.size() == 2;
      if (opts.format == Format::Csv) {
        os << name << ',' << sol.pattern.to_string() << ',' << fmt9(sol.objective) << ','
           << (has ? fmt9(x[0]) : "") << ',' << (has ? fmt9(x[1]) : "") << ','
           << detail::status_label(sol.fixed_point.status) << ','
           << (agree ? (*agree ? "AGREE" : "DISAGREE") : "") << '\n';
      } else {
        os << name << ": pattern " << sol.pattern.to_string() << "  max load " << fmt9(sol.objective);
        if (has) os << "  (x1 " << fmt9(x[0]) << ", x2 " << fmt9(x[1]) << ")";
        os << '\n';
      }
    };
    if (opts.format == Format::Csv) os << "method,pattern,objective,x1,x2,status,agreement\n";
    if (greedy) {
      if (opts.format == Format::Pretty) {
        os << "gain of load G_j:";
        for (Index j = 0; j < inst->num_pairs(); ++j) os << ' ' << fmt9(greedy->gain[j]);
        os << '\n';
      }
      row("greedy", *greedy);
    }
    if (brute) row("brute", *brute);
    if (agree && opts.format == Format::Pretty) {
      os << (*agree ? "AGREE" : "DISAGREE") << " (objective difference " << fmt9(difference) << ", tolerance "
         << fmt9(kTwoCellAgreementTolerance) << ")\n";
    }
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace jtload::cli
