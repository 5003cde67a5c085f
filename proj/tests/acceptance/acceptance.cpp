// SPDX-License-Identifier: Apache-2.0
// Acceptance checks. Prints one PASS/FAIL line per criterion; exits 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "jtload/commands.hpp"
#include "jtload/optimizer.hpp"
#include "jtload/scenario.hpp"
#include "jtload/solver.hpp"
#include "jtload/twocell.hpp"
#include "random_instances.hpp"

namespace {

using namespace jtload;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome sif_properties() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  int violations = 0;
  for (int t = 0; t < 200; ++t) {
    const auto s = testing::random_sized_scenario(rng, 10, 50);
    const auto p = testing::random_pattern(rng, s.num_cells(), s.num_ues(), 3);
    violations += static_cast<int>(check_scalability(s, p, 1000, 2 * t + 1).violations.size());
    violations += static_cast<int>(check_monotonicity(s, p, 1000, 2 * t + 2).violations.size());
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 60.0,
          "200 scenarios x 1000 samples, violations " + std::to_string(violations) + ", " +
              fmt("%.1f s (limit 60 s)", secs)};
}

Outcome uniqueness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  int compared = 0;
  int attempts = 0;
  double worst = 0.0;
  while (compared < 50 && attempts < 5000) {
    ++attempts;
    const int n = testing::uniform_int(rng, 2, 10);
    const auto s = testing::random_scenario(rng, n, testing::uniform_int(rng, 1, 50), 0.001, 0.05);
    const auto p = testing::random_pattern(rng, s.num_cells(), s.num_ues(), 3);
    const auto a = fixed_point_solve(s, p, LoadVector::Zero(n));
    const auto b = fixed_point_solve(s, p, LoadVector::Ones(n));
    if (!a.converged() || !b.converged()) continue;
    ++compared;
    worst = std::max(worst, (a.load - b.load).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {compared == 50 && worst <= 1e-6 && secs < 30.0,
          std::to_string(compared) + " converging scenarios, max |x0 - x1| " + fmt("%.3g", worst) +
              " (tol 1e-06), " + fmt("%.1f s (limit 30 s)", secs)};
}

Outcome two_cell_symmetry() {
  std::mt19937_64 rng(1003);
  int checked = 0;
  int diverged = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = testing::random_two_cell(rng, testing::uniform_int(rng, 1, 8));
    const auto pattern = testing::random_symmetric_pattern(rng, inst.num_pairs());
    const auto r = twocell::solve(inst, pattern);
    if (!r.converged()) {
      ++diverged;
      continue;
    }
    ++checked;
    worst = std::max(worst, std::abs(r.load[0] - r.load[1]));
  }
  return {checked > 0 && worst <= 1e-8,
          std::to_string(checked) + " converged of 100 (" + std::to_string(diverged) +
              " diverged), max |x1 - x2| " + fmt("%.3g", worst) + " (tol 1e-08)"};
}

std::string describe(const twocell::TwoCellInstance& inst) {
  std::ostringstream os;
  os.precision(17);
  os << "m=" << inst.num_pairs() << " p=" << inst.power_w() << " sigma2=" << inst.noise_power_w() << " pairs=[";
  for (Index j = 0; j < inst.num_pairs(); ++j) {
    const auto& u = inst.pair(j);
    os << (j ? "; " : "") << "(own " << u.own_gain << ", cross " << u.cross_gain << ", d " << u.demand << ")";
  }
  os << "]";
  return os.str();
}

Outcome greedy_vs_brute() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  int agree = 0;
  int skipped = 0;
  std::vector<std::string> reports;
  for (int t = 0; t < 200; ++t) {
    const int m = testing::uniform_int(rng, 2, 8);
    const auto inst = testing::random_two_cell(rng, m);
    const auto brute = twocell::brute_force_minmax(inst);
    twocell::GreedySolution greedy;
    try {
      greedy = twocell::greedy_optimal(inst);
    } catch (const PreconditionError& e) {
      ++skipped;
      reports.push_back("instance " + std::to_string(t) + ": greedy undefined (" + e.what() + "); " + describe(inst));
      continue;
    }
    const double gap = greedy.objective - brute.objective;
    if (std::abs(gap) <= 1e-6) {
      ++agree;
      continue;
    }
    std::ostringstream os;
    os.precision(17);
    os << "instance " << t << ": greedy pattern " << greedy.pattern.to_string() << " objective "
       << greedy.objective << ", brute force pattern " << brute.pattern.to_string() << " objective "
       << brute.objective << ", gap " << gap << "; " << describe(inst);
    reports.push_back(os.str());
  }
  for (const auto& r : reports) std::cout << "  deviation: " << r << "\n";
  const double secs = seconds_since(t0);
  return {reports.empty() && secs < 300.0,
          std::to_string(agree) + "/200 agree within 1e-06, " + std::to_string(reports.size() - skipped) +
              " counterexamples, " + std::to_string(skipped) + " without a baseline, " +
              fmt("%.1f s (limit 300 s)", secs)};
}

Outcome single_flip_bound() {
  std::mt19937_64 rng(1005);
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    const auto s = testing::random_sized_scenario(rng, 10, 50);
    const auto base = testing::random_pattern(rng, s.num_cells(), s.num_ues(), 2);
    const Index j = testing::uniform_int(rng, 0, static_cast<int>(s.num_ues() - 1));
    std::vector<Index> free;
    for (Index i = 0; i < s.num_cells(); ++i) {
      if (!base.serves(i, j)) free.push_back(i);
    }
    const Index i = free[static_cast<std::size_t>(testing::uniform_int(rng, 0, static_cast<int>(free.size()) - 1))];
    const auto expanded = base.with_max_serving(static_cast<int>(s.num_cells())).with_link(i, j);
    std::uniform_real_distribution<double> load(0.0, 2.0);
    LoadVector x(s.num_cells());
    for (Index c = 0; c < x.size(); ++c) x[c] = load(rng);
    if (!lemma3_check(s, base, expanded, x)) ++failures;
  }
  return {failures == 0, "100 triples, failures " + std::to_string(failures)};
}

Outcome certificate_soundness() {
  std::mt19937_64 rng(1006);
  std::vector<std::pair<NetworkScenario, JtPattern>> runs;
  for (int t = 0; t < 60; ++t) {
    const auto s = testing::random_scenario(rng, testing::uniform_int(rng, 2, 8),
                                            testing::uniform_int(rng, 5, 30), 0.02, 0.2);
    runs.emplace_back(s, best_signal_association(s, 2));
  }
  scenario::GeneratorParams params;
  params.seed = 1;
  const auto generated = scenario::generate(params);
  for (double d : {300e3, 450e3}) {
    const auto s = generated.with_uniform_demand(d);
    runs.emplace_back(s, best_signal_association(s, 2));
  }

  int optimized = 0;
  std::size_t moves = 0;
  int exceptions = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [s, p] : runs) {
    if (!fixed_point_solve(s, p).converged()) continue;
    const auto r = jt_minmax(s, p, OptimizerConfig{});
    ++optimized;
    moves += r.accepted_moves.size();
    for (const auto& v : r.verifications) {
      if (!v.resolved || v.max_excess > 1e-8) ++exceptions;
      worst = std::max(worst, v.max_excess);
    }
  }
  return {exceptions == 0 && moves > 0,
          std::to_string(optimized) + " optimizer runs, " + std::to_string(moves) + " accepted moves, exceptions " +
              std::to_string(exceptions) + ", max (x_new - x_old) " + fmt("%.3g", worst) + " (tol 1e-08)"};
}

Outcome desk_scale_sweep() {
  const auto t0 = Clock::now();
  bool dominance = true;
  bool positive_reduction = true;
  bool positive_spread = true;
  double reduction_sum = 0.0;
  int seeds_with_max = 0;
  std::ostringstream per_seed;
  per_seed.precision(4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cli::SweepSpec spec;
    spec.generator.seed = seed;
    const auto r = cli::run_sweep(scenario::generate(spec.generator), spec);
    for (const auto& row : r.rows) {
      if (row.both_converged() && row.jt_max_load > row.nonjt_max_load + 1e-8) dominance = false;
    }
    per_seed << " seed " << seed << ":";
    if (!r.max_achievable) {
      positive_reduction = positive_spread = false;
      per_seed << " no achievable point";
      continue;
    }
    const auto& row = r.rows[*r.max_achievable];
    const double red = row.reduction_percent.value_or(0.0);
    const double spr = row.spread_reduction_percent.value_or(0.0);
    if (!(red > 0.0)) positive_reduction = false;
    if (!(spr > 0.0)) positive_spread = false;
    reduction_sum += red;
    ++seeds_with_max;
    per_seed << " max demand " << row.demand_bps / 1e3 << " kbps, reduction " << red << "%, spread reduction "
             << spr << "%;";
  }
  const double mean = seeds_with_max ? reduction_sum / seeds_with_max : 0.0;
  const bool mean_ok = seeds_with_max == 5 && mean >= 5.0 && mean <= 40.0;
  const double secs = seconds_since(t0);
  std::cout << "  sweep detail:" << per_seed.str() << "\n";
  const bool pass = dominance && positive_reduction && mean_ok && positive_spread && secs < 900.0;
  return {pass, std::string("(a) dominance ") + (dominance ? "ok" : "violated") + ", (b) reduction > 0 at max demand " +
                    (positive_reduction ? "ok" : "violated") + ", mean " + fmt("%.3g%%", mean) +
                    " in [5%, 40%] " + (mean_ok ? "ok" : "violated") + ", (c) spread reduction > 0 " +
                    (positive_spread ? "ok" : "violated") + ", " + fmt("%.1f s (limit 900 s)", secs)};
}

Outcome sweep_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("jtload_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::vector<std::string> contents;
  for (int run = 0; run < 2; ++run) {
    cli::SweepOptions opts;
    opts.spec.generator.seed = 7;
    opts.output_path = (dir / ("sweep" + std::to_string(run) + ".csv")).string();
    std::ostringstream out;
    std::ostringstream err;
    if (cli::cmd_sweep(opts, out, err) != cli::kExitOk) {
      fs::remove_all(dir);
      return {false, "cmd_sweep failed: " + err.str()};
    }
    std::ifstream in(opts.output_path, std::ios::binary);
    contents.push_back(std::string(std::istreambuf_iterator<char>(in), {}));
  }
  fs::remove_all(dir);
  const bool same = contents[0] == contents[1] && !contents[0].empty();
  return {same, std::string(same ? "identical" : "different") + " CSV across two runs (" +
                    std::to_string(contents[0].size()) + " bytes)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"SIF properties", sif_properties},
      {"fixed-point uniqueness", uniqueness},
      {"two-cell symmetry", two_cell_symmetry},
      {"greedy equals brute force", greedy_vs_brute},
      {"single-flip bound", single_flip_bound},
      {"certificate soundness", certificate_soundness},
      {"desk-scale sweep", desk_scale_sweep},
      {"sweep determinism", sweep_determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << index << " (" << c.name << "): " << o.detail
              << std::endl;
  }
  std::cout << (8 - failed) << "/8 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
