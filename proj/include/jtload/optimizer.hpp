// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jtload/model.hpp"
#include "jtload/solver.hpp"

/// Min-max load balancing by adding JT links one at a time (JT-MinMax).
///
/// A candidate link (c, j) is accepted when the certificate below fires: start
/// from the current fixed point x~, iterate x(k) = f(h'(x(k-1))) with SINR under
/// the extended pattern but the old load accounting, and stop at the first k
/// where cell c's load under the extended pattern, f'_c(h'(x(k))), is at most
/// x(k)_c. Such a k guarantees the extended pattern's fixed point is
/// componentwise no larger than x~.
namespace jtload {

struct OptimizerConfig {
  int sweeps = 5;             // full passes over every (cell, UE) candidate
  int condition_iters = 20;   // iterations spent testing one candidate
  int max_serving = 2;        // K: serving cells per UE
  SolverConfig solver;
  // Re-solve the fixed point after every accepted link so the next test starts
  // from a fixed point. When false, continue from the certificate iterate.
  bool reconverge_after_accept = true;
  // Independently re-solve (from zero) after every accepted link and record how
  // far the new fixed point exceeds the old one.
  bool verify_accepted_moves = true;

  void validate(Index num_cells) const {
    if (sweeps < 1) throw InvalidParameterError("sweeps", "must be at least 1");
    if (condition_iters < 1) throw InvalidParameterError("condition_iters", "must be at least 1");
    if (max_serving < 1 || max_serving > num_cells) {
      throw InvalidParameterError("max_serving", "must satisfy 1 <= K <= n (n = " +
                                                     std::to_string(num_cells) + ")");
    }
    solver.validate();
  }
};

/// Each UE served by the cell with the strongest received power p_i g_ij; lowest index wins ties.
inline JtPattern best_signal_association(const NetworkScenario& scenario, int max_serving = 1) {
  const Eigen::MatrixXd& rx = scenario.received_power();
  std::vector<Index> serving(static_cast<std::size_t>(scenario.num_ues()));
  for (Index j = 0; j < scenario.num_ues(); ++j) {
    Index best = 0;
    for (Index i = 1; i < scenario.num_cells(); ++i) {
      if (rx(i, j) > rx(best, j)) best = i;
    }
    serving[static_cast<std::size_t>(j)] = best;
  }
  return JtPattern::single(serving, scenario.num_cells(), max_serving);
}

namespace detail {

// Returns the single (cell, ue) where `base` is 0 and `expanded` is 1, or throws.
inline std::pair<Index, Index> single_flip(const JtPattern& base, const JtPattern& expanded) {
  if (base.num_cells() != expanded.num_cells() || base.num_ues() != expanded.num_ues()) {
    throw StructuralError("patterns differ in shape");
  }
  std::optional<std::pair<Index, Index>> flip;
  int differences = 0;
  for (Index j = 0; j < base.num_ues(); ++j) {
    for (Index i = 0; i < base.num_cells(); ++i) {
      if (base.serves(i, j) == expanded.serves(i, j)) continue;
      ++differences;
      if (!base.serves(i, j)) flip = std::pair{i, j};
    }
  }
  if (differences != 1 || !flip) {
    throw PreconditionError("expanded pattern must add exactly one link to the base pattern");
  }
  return *flip;
}

}  // namespace detail

/// Checks f(h'(x)) <= min{ f(h(x)), f'(h'(x)) } componentwise, where the primed
/// pattern adds one link to the base pattern.
inline bool lemma3_check(const NetworkScenario& scenario, const JtPattern& base_pattern,
                         const JtPattern& expanded_pattern, const LoadVector& x) {
  detail::single_flip(base_pattern, expanded_pattern);
  const LoadVector mixed = mixed_coupled_map(scenario, base_pattern, expanded_pattern, x);
  const LoadVector base = coupled_map(scenario, base_pattern, x);
  const LoadVector expanded = coupled_map(scenario, expanded_pattern, x);
  return (mixed.array() <= base.array().min(expanded.array())).all();
}

struct ConditionOutcome {
  std::optional<int> accepted_at;  // k, or empty when not detected within condition_iters
  LoadVector iterate;              // x(k) at acceptance, or the last iterate

  bool accepted() const noexcept { return accepted_at.has_value(); }
};

namespace detail {

// Dense evaluation state for the certificate loop. The SINR side holds the
// candidate pattern (one link toggled in place); the load side keeps the
// serving lists of the current pattern.
class CertificateKernel {
 public:
  CertificateKernel(const NetworkScenario& scenario, const JtPattern& pattern)
      : scenario_(scenario),
        interference_weight_(scenario.received_power().transpose()),
        signal_(Eigen::VectorXd::Zero(scenario.num_ues())),
        demand_scale_(scenario.num_ues()),
        serving_(static_cast<std::size_t>(scenario.num_ues())),
        interference_(scenario.num_ues()) {
    for (Index j = 0; j < scenario.num_ues(); ++j) {
      demand_scale_[j] = scenario.ue(j).demand_bps / scenario.cell_bandwidth_hz();
      for (Index i = 0; i < scenario.num_cells(); ++i) {
        if (pattern.serves(i, j)) {
          signal_[j] += scenario.received_power()(i, j);
          interference_weight_(j, i) = 0.0;
          serving_[static_cast<std::size_t>(j)].push_back(i);
        }
      }
    }
  }

  // Commits link (cell, ue) to both the SINR side and the load side.
  void add_link(Index cell, Index ue) {
    toggle_on(cell, ue);
    serving_[static_cast<std::size_t>(ue)].push_back(cell);
  }

  // Certificate for (cell, ue), which must not be in the current pattern.
  ConditionOutcome run(const LoadVector& start, Index cell, Index ue, int iterations) {
    const double saved_weight = interference_weight_(ue, cell);
    const double saved_signal = signal_[ue];
    toggle_on(cell, ue);

    ConditionOutcome outcome{std::nullopt, start};
    LoadVector& x = outcome.iterate;
    UeLoadVector y(scenario_.num_ues());
    ue_loads(x, y);
    for (int k = 1; k <= iterations; ++k) {
      x.setZero();
      for (Index j = 0; j < scenario_.num_ues(); ++j) {
        for (Index i : serving_[static_cast<std::size_t>(j)]) x[i] += y[j];
      }
      ue_loads(x, y);
      double cell_load = y[ue];
      for (Index j = 0; j < scenario_.num_ues(); ++j) {
        if (j == ue) continue;
        for (Index i : serving_[static_cast<std::size_t>(j)]) {
          if (i == cell) cell_load += y[j];
        }
      }
      if (cell_load <= x[cell]) {
        outcome.accepted_at = k;
        break;
      }
    }

    interference_weight_(ue, cell) = saved_weight;
    signal_[ue] = saved_signal;
    return outcome;
  }

 private:
  void toggle_on(Index cell, Index ue) {
    signal_[ue] += scenario_.received_power()(cell, ue);
    interference_weight_(ue, cell) = 0.0;
  }

  void ue_loads(const LoadVector& x, UeLoadVector& y) {
    interference_.noalias() = interference_weight_ * x;
    const double noise = scenario_.noise_power_w();
    for (Index j = 0; j < scenario_.num_ues(); ++j) {
      y[j] = demand_scale_[j] / log2_1p(signal_[j] / (interference_[j] + noise));
    }
  }

  const NetworkScenario& scenario_;
  Eigen::MatrixXd interference_weight_;  // m x n: p_i g_ij where i does not serve j
  Eigen::VectorXd signal_;
  Eigen::VectorXd demand_scale_;         // d_j / (M B)
  std::vector<std::vector<Index>> serving_;
  Eigen::VectorXd interference_;
};

// Reference form of the certificate built from the public model maps.
inline ConditionOutcome run_certificate(const NetworkScenario& scenario, const JtPattern& pattern,
                                        const JtPattern& expanded, const LoadVector& start,
                                        Index cell, int iterations) {
  ConditionOutcome outcome{std::nullopt, start};
  LoadVector& x = outcome.iterate;
  for (int k = 1; k <= iterations; ++k) {
    x = mixed_coupled_map(scenario, pattern, expanded, x);
    const LoadVector next = coupled_map(scenario, expanded, x);
    if (next[cell] <= x[cell]) {
      outcome.accepted_at = k;
      return outcome;
    }
  }
  return outcome;
}

}  // namespace detail

/// Tests whether adding link (cell, ue) provably lowers the fixed point.
/// `current_fixed_point` must satisfy ||f(h(x)) - x||_inf <= config.solver.tolerance.
inline ConditionOutcome sufficient_condition(const NetworkScenario& scenario,
                                             const JtPattern& current_pattern,
                                             const LoadVector& current_fixed_point, Index cell,
                                             Index ue, const OptimizerConfig& config) {
  detail::check_shapes(scenario, current_pattern);
  detail::check_load(scenario, current_fixed_point);
  if (cell < 0 || cell >= scenario.num_cells() || ue < 0 || ue >= scenario.num_ues()) {
    throw StructuralError("candidate link index out of range");
  }
  if (current_pattern.serves(cell, ue)) {
    throw PreconditionError("candidate link (" + std::to_string(cell) + ", " + std::to_string(ue) +
                            ") is already in the pattern");
  }
  if (config.condition_iters < 1) throw InvalidParameterError("condition_iters", "must be at least 1");
  const double residual =
      (coupled_map(scenario, current_pattern, current_fixed_point) - current_fixed_point)
          .cwiseAbs()
          .maxCoeff();
  if (residual > config.solver.tolerance) {
    throw PreconditionError("starting load is not a fixed point of the current pattern (residual " +
                            std::to_string(residual) + ")");
  }
  const JtPattern expanded = current_pattern.with_max_serving(scenario.num_cells()).with_link(cell, ue);
  return detail::run_certificate(scenario, current_pattern, expanded, current_fixed_point, cell,
                                 config.condition_iters);
}

struct AcceptedMove {
  Index cell = 0;
  Index ue = 0;
  int sweep = 0;              // 1-based
  int condition_iteration = 0;  // k at which the certificate fired
  double max_load_after = 0.0;

  friend bool operator==(const AcceptedMove&, const AcceptedMove&) = default;
};

struct MoveVerification {
  Index cell = 0;
  Index ue = 0;
  // max_i (x_new_i - x_old_i), x_new re-solved from zero under the new pattern.
  double max_excess = 0.0;
  bool resolved = false;
};

struct OptimizeResult {
  JtPattern pattern;
  FixedPointResult fixed_point;       // final x*, verified under `pattern`
  FixedPointResult initial_fixed_point;
  std::vector<AcceptedMove> accepted_moves;
  std::vector<double> trace;          // max load before sweep 1, then after each sweep
  std::vector<MoveVerification> verifications;

  const LoadVector& load() const noexcept { return fixed_point.load; }
};

/// JT-MinMax. Scans candidates row-major (cells outer, UEs inner) for
/// `config.sweeps` passes, skipping links that would give a UE more than K
/// serving cells. Links are only added.
inline OptimizeResult jt_minmax(const NetworkScenario& scenario, const JtPattern& initial_pattern,
                                const OptimizerConfig& config) {
  detail::check_shapes(scenario, initial_pattern);
  config.validate(scenario.num_cells());
  // Links are tested against the K limit explicitly; the pattern object itself
  // is allowed to hold up to n serving cells per UE.
  JtPattern pattern = initial_pattern.with_max_serving(static_cast<int>(scenario.num_cells()));
  for (Index j = 0; j < scenario.num_ues(); ++j) {
    if (pattern.serving_count(j) > config.max_serving) {
      throw PreconditionError("initial pattern serves UE " + std::to_string(j) +
                              " with more than K cells");
    }
  }

  FixedPointResult initial = fixed_point_solve(scenario, pattern, config.solver);
  if (!initial.converged()) {
    throw PreconditionError("initial fixed point did not converge (" + to_string(initial.status) + ")");
  }

  OptimizeResult result{pattern, initial, initial, {}, {}, {}};
  LoadVector x = initial.load;
  detail::CertificateKernel kernel(scenario, pattern);
  result.trace.push_back(max_load(x));

  for (int sweep = 1; sweep <= config.sweeps; ++sweep) {
    for (Index i = 0; i < scenario.num_cells(); ++i) {
      for (Index j = 0; j < scenario.num_ues(); ++j) {
        if (pattern.serves(i, j)) continue;
        if (pattern.serving_count(j) + 1 > config.max_serving) continue;
        ConditionOutcome outcome = kernel.run(x, i, j, config.condition_iters);
        if (!outcome.accepted()) continue;
        JtPattern expanded = pattern.with_link(i, j);
        kernel.add_link(i, j);

        LoadVector previous = x;
        if (config.reconverge_after_accept) {
          FixedPointResult fp =
              fixed_point_solve(scenario, expanded, std::move(outcome.iterate), config.solver);
          if (!fp.converged()) {
            throw InternalConsistencyError("fixed point diverged after accepting link (" +
                                           std::to_string(i) + ", " + std::to_string(j) + ")");
          }
          x = std::move(fp.load);
        } else {
          x = std::move(outcome.iterate);
        }
        pattern = std::move(expanded);

        if (config.verify_accepted_moves) {
          const FixedPointResult fresh = fixed_point_solve(scenario, pattern, config.solver);
          MoveVerification check{i, j, std::numeric_limits<double>::infinity(), fresh.converged()};
          if (fresh.converged()) check.max_excess = (fresh.load - previous).maxCoeff();
          result.verifications.push_back(check);
        }
        result.accepted_moves.push_back({i, j, sweep, *outcome.accepted_at, max_load(x)});
      }
    }
    result.trace.push_back(max_load(x));
  }

  FixedPointResult final_fp = fixed_point_solve(scenario, pattern, x, config.solver);
  if (!final_fp.converged()) {
    throw InternalConsistencyError("final fixed point did not converge");
  }
  result.pattern = pattern.with_max_serving(config.max_serving);
  result.fixed_point = std::move(final_fp);
  return result;
}

}  // namespace jtload
