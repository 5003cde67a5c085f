// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jtload/model.hpp"

namespace jtload {

struct SolverConfig {
  double tolerance = 1e-9;  // max-norm of f(h(x)) - x
  int max_iterations = 10000;
  double divergence_ceiling = 1e6;

  void validate() const {
    if (!(tolerance > 0.0)) throw PreconditionError("solver tolerance must be positive");
    if (max_iterations < 1) throw PreconditionError("solver max_iterations must be positive");
    if (!(divergence_ceiling > 1.0)) throw PreconditionError("divergence ceiling must exceed 1");
  }
};

enum class SolveStatus { Converged, Diverged, IterationCapReached };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::IterationCapReached: return "iteration_cap";
  }
  return "unknown";
}

struct FixedPointResult {
  LoadVector load;
  SolveStatus status = SolveStatus::IterationCapReached;
  int iterations = 0;
  double residual = 0.0;  // ||map(load) - load||_inf
  bool capacity_violated = false;

  bool converged() const noexcept { return status == SolveStatus::Converged; }
};

/// Plain fixed-point iteration x <- map(x).
///
/// Returns the first iterate x^(k) with ||map(x^(k)) - x^(k)||_inf <= tolerance,
/// so the residual reported on convergence is exact for the returned load.
/// `iterations` is k, the number of map applications that produced it.
template <class Map>
FixedPointResult iterate_fixed_point(Map&& map, LoadVector initial, const SolverConfig& config) {
  config.validate();
  FixedPointResult result;
  LoadVector x = std::move(initial);
  for (int k = 0;; ++k) {
    LoadVector next = map(static_cast<const LoadVector&>(x));
    const double residual = (next - x).cwiseAbs().maxCoeff();
    result.residual = residual;
    result.iterations = k;
    if (residual <= config.tolerance) {
      result.status = SolveStatus::Converged;
      break;
    }
    if (k == config.max_iterations) {
      result.status = SolveStatus::IterationCapReached;
      break;
    }
    x = std::move(next);
    if (!x.allFinite() || x.maxCoeff() > config.divergence_ceiling) {
      result.status = SolveStatus::Diverged;
      result.iterations = k + 1;
      break;
    }
  }
  result.capacity_violated = x.allFinite() && (x.array() > 1.0).any();
  result.load = std::move(x);
  return result;
}

inline FixedPointResult fixed_point_solve(const NetworkScenario& scenario, const JtPattern& pattern,
                                          LoadVector initial, const SolverConfig& config = {}) {
  detail::check_shapes(scenario, pattern);
  detail::check_load(scenario, initial);
  return iterate_fixed_point(
      [&](const LoadVector& x) { return coupled_map(scenario, pattern, x); }, std::move(initial),
      config);
}

/// Solve from the all-zeros load.
inline FixedPointResult fixed_point_solve(const NetworkScenario& scenario, const JtPattern& pattern,
                                          const SolverConfig& config = {}) {
  return fixed_point_solve(scenario, pattern, LoadVector::Zero(scenario.num_cells()), config);
}

/// True iff f(h(candidate)) <= candidate componentwise, which certifies that a
/// fixed point exists (and lies below the candidate).
inline bool feasibility_probe(const NetworkScenario& scenario, const JtPattern& pattern,
                              const LoadVector& candidate) {
  const LoadVector image = coupled_map(scenario, pattern, candidate);
  return (image.array() <= candidate.array()).all();
}

struct PropertyViolation {
  int sample = 0;
  Index cell = 0;
  double lhs = 0.0;  // side that should be larger
  double rhs = 0.0;
  double alpha = 1.0;  // scalability only
};

struct PropertyReport {
  int samples_checked = 0;
  std::vector<PropertyViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Guards the standard-interference-function checkers: some link must exist
/// and no UE may be served by every cell (otherwise its SINR ignores x).
inline void require_sif_hypotheses(const NetworkScenario& scenario, const JtPattern& pattern) {
  detail::check_shapes(scenario, pattern);
  if (pattern.link_count() == 0) throw PreconditionError("pattern has no serving link");
  for (Index j = 0; j < pattern.num_ues(); ++j) {
    if (pattern.serving_count(j) >= pattern.num_cells()) {
      throw PreconditionError("UE " + std::to_string(j) +
                              " is served by every cell; f(h(x)) is not a standard interference "
                              "function of x");
    }
  }
}

namespace detail {

inline LoadVector random_load(std::mt19937_64& rng, Index n, double zero_probability = 0.1) {
  std::uniform_real_distribution<double> value(0.0, 2.0);
  std::bernoulli_distribution zero(zero_probability);
  LoadVector x(n);
  for (Index i = 0; i < n; ++i) x[i] = zero(rng) ? 0.0 : value(rng);
  return x;
}

}  // namespace detail

/// Samples (x, alpha) with x >= 0, alpha > 1 and checks alpha f(h(x)) > f(h(alpha x))
/// on every cell that serves at least one UE (other cells carry the zero function).
/// Sample 0 uses x = 0.
inline PropertyReport check_scalability(const NetworkScenario& scenario, const JtPattern& pattern,
                                        int samples, std::uint64_t rng_seed) {
  require_sif_hypotheses(scenario, pattern);
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> log_excess(-3.0, 0.6);
  PropertyReport report;
  const Index n = scenario.num_cells();
  for (int s = 0; s < samples; ++s) {
    const LoadVector x = s == 0 ? LoadVector::Zero(n) : detail::random_load(rng, n);
    const double alpha = s == 0 ? 2.0 : 1.0 + std::pow(10.0, log_excess(rng));
    const LoadVector scaled_image = alpha * coupled_map(scenario, pattern, x);
    const LoadVector image_of_scaled = coupled_map(scenario, pattern, LoadVector(alpha * x));
    for (Index i = 0; i < n; ++i) {
      if (pattern.served_count(i) == 0) continue;
      if (!(scaled_image[i] > image_of_scaled[i])) {
        report.violations.push_back({s, i, scaled_image[i], image_of_scaled[i], alpha});
      }
    }
    ++report.samples_checked;
  }
  return report;
}

/// Samples ordered pairs x >= x' and checks f(h(x)) >= f(h(x')).
/// Sample 0 uses x = x', sample 1 uses x' = 0.
inline PropertyReport check_monotonicity(const NetworkScenario& scenario, const JtPattern& pattern,
                                         int samples, std::uint64_t rng_seed) {
  require_sif_hypotheses(scenario, pattern);
  std::mt19937_64 rng(rng_seed);
  PropertyReport report;
  const Index n = scenario.num_cells();
  for (int s = 0; s < samples; ++s) {
    LoadVector lower = s == 1 ? LoadVector::Zero(n) : detail::random_load(rng, n);
    LoadVector upper = lower;
    if (s != 0) upper += detail::random_load(rng, n, 0.3);
    const LoadVector hi = coupled_map(scenario, pattern, upper);
    const LoadVector lo = coupled_map(scenario, pattern, lower);
    for (Index i = 0; i < n; ++i) {
      if (!(hi[i] >= lo[i])) report.violations.push_back({s, i, hi[i], lo[i], 1.0});
    }
    ++report.samples_checked;
  }
  return report;
}

}  // namespace jtload
