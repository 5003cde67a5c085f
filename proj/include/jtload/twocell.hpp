// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "jtload/model.hpp"
#include "jtload/solver.hpp"

/// Symmetric two-cell network.
///
/// Cell 1 owns UEs 0..m-1 and cell 2 owns UEs m..2m-1. UE j and UE m+j are
/// mirror images: equal demand, g(1, j) = g(2, m+j) (own gain) and
/// g(2, j) = g(1, m+j) (cross gain). Both cells transmit with the same power.
/// Instances are stored in this reduced form so the mirror equalities hold
/// exactly, not just up to input rounding.
namespace jtload::twocell {

struct UePair {
  double own_gain = 0.0;
  double cross_gain = 0.0;
  double demand = 0.0;  // normalized by M * B

  friend bool operator==(const UePair&, const UePair&) = default;
};

class TwoCellInstance {
 public:
  TwoCellInstance(double power_w, double noise_power_w, std::vector<UePair> pairs)
      : power_w_(power_w), noise_power_w_(noise_power_w), pairs_(std::move(pairs)) {
    if (!(power_w_ > 0.0) || !std::isfinite(power_w_)) throw DomainError("power must be positive");
    if (!(noise_power_w_ > 0.0) || !std::isfinite(noise_power_w_)) {
      throw DomainError("noise power must be positive");
    }
    if (pairs_.empty()) throw StructuralError("two-cell instance needs at least one UE pair");
    for (std::size_t j = 0; j < pairs_.size(); ++j) {
      const auto& p = pairs_[j];
      if (!(p.own_gain > 0.0) || !(p.cross_gain > 0.0) || !(p.demand > 0.0) ||
          !std::isfinite(p.own_gain) || !std::isfinite(p.cross_gain) || !std::isfinite(p.demand)) {
        throw DomainError("pair " + std::to_string(j) + ": gains and demand must be positive");
      }
    }
  }

  Index num_pairs() const noexcept { return static_cast<Index>(pairs_.size()); }
  double power_w() const noexcept { return power_w_; }
  double noise_power_w() const noexcept { return noise_power_w_; }
  const std::vector<UePair>& pairs() const noexcept { return pairs_; }
  const UePair& pair(Index j) const {
    if (j < 0 || j >= num_pairs()) throw StructuralError("UE pair index out of range");
    return pairs_[static_cast<std::size_t>(j)];
  }

  /// The full 2-cell, 2m-UE scenario (M = B = 1, so demands stay normalized).
  NetworkScenario expanded() const {
    const Index m = num_pairs();
    Eigen::MatrixXd gain(2, 2 * m);
    std::vector<Ue> ues(static_cast<std::size_t>(2 * m));
    for (Index j = 0; j < m; ++j) {
      const auto& p = pairs_[static_cast<std::size_t>(j)];
      gain(0, j) = p.own_gain;
      gain(1, j) = p.cross_gain;
      gain(0, m + j) = p.cross_gain;
      gain(1, m + j) = p.own_gain;
      ues[static_cast<std::size_t>(j)].demand_bps = p.demand;
      ues[static_cast<std::size_t>(m + j)].demand_bps = p.demand;
    }
    std::vector<Cell> cells{{power_w_, CellKind::Macro, std::nullopt},
                            {power_w_, CellKind::Macro, std::nullopt}};
    return {std::move(cells), std::move(ues), std::move(gain), noise_power_w_, 1.0, 1};
  }

 private:
  double power_w_;
  double noise_power_w_;
  std::vector<UePair> pairs_;
};

/// kappa_j = 1 means both UE j and its mirror m+j are served by both cells.
class SymmetricPattern {
 public:
  SymmetricPattern() = default;
  explicit SymmetricPattern(std::vector<bool> joint) : joint_(std::move(joint)) {}

  static SymmetricPattern none(Index m) { return SymmetricPattern(std::vector<bool>(static_cast<std::size_t>(m), false)); }
  static SymmetricPattern all(Index m) { return SymmetricPattern(std::vector<bool>(static_cast<std::size_t>(m), true)); }

  /// Bit j of mask selects pair j.
  static SymmetricPattern from_mask(std::uint64_t mask, Index m) {
    std::vector<bool> joint(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) joint[static_cast<std::size_t>(j)] = ((mask >> j) & 1U) != 0;
    return SymmetricPattern(std::move(joint));
  }

  Index size() const noexcept { return static_cast<Index>(joint_.size()); }
  bool joint(Index j) const { return joint_.at(static_cast<std::size_t>(j)); }
  const std::vector<bool>& bits() const noexcept { return joint_; }
  int joint_count() const {
    int c = 0;
    for (bool b : joint_) c += b ? 1 : 0;
    return c;
  }

  /// The 2 x 2m serving matrix on the expanded scenario.
  JtPattern expanded() const {
    const Index m = size();
    JtPattern::Matrix kappa = JtPattern::Matrix::Zero(2, 2 * m);
    for (Index j = 0; j < m; ++j) {
      kappa(0, j) = 1;
      kappa(1, m + j) = 1;
      if (joint(j)) {
        kappa(1, j) = 1;
        kappa(0, m + j) = 1;
      }
    }
    return {std::move(kappa), 2};
  }

  std::string to_string() const {
    std::string s;
    for (bool b : joint_) s += b ? '1' : '0';
    return s;
  }

  friend bool operator==(const SymmetricPattern&, const SymmetricPattern&) = default;

 private:
  std::vector<bool> joint_;
};

/// c_j: per-cell share of a UE served jointly by both cells. Its SINR has no
/// interference term, so this does not depend on the loads.
inline double constant_load(const TwoCellInstance& instance, Index j) {
  const auto& p = instance.pair(j);
  return p.demand /
         log2_1p(instance.power_w() * (p.own_gain + p.cross_gain) / instance.noise_power_w());
}

/// Load of UE j (or its mirror) on its own cell when served alone, given the other cell's load.
inline double single_served_load(const TwoCellInstance& instance, Index j, double other_load) {
  const auto& p = instance.pair(j);
  const double p_w = instance.power_w();
  return p.demand /
         log2_1p(p_w * p.own_gain / (p_w * p.cross_gain * other_load + instance.noise_power_w()));
}

/// (x1, x2) -> (x1(kappa, x2), x2(kappa, x1)).
///
/// A joint pair contributes 2 c_j to each cell: under the mirror rule each cell
/// serves both UE j and UE m+j, and each consumes c_j. This keeps the map
/// identical to the generic coupled map on the expanded scenario.
inline std::pair<double, double> two_cell_coupled_map(const TwoCellInstance& instance,
                                                      const SymmetricPattern& pattern, double x1,
                                                      double x2) {
  if (pattern.size() != instance.num_pairs()) {
    throw StructuralError("symmetric pattern length does not match the number of UE pairs");
  }
  if (!(x1 >= 0.0) || !(x2 >= 0.0) || !std::isfinite(x1) || !std::isfinite(x2)) {
    throw DomainError("two-cell loads must be finite and non-negative");
  }
  double next1 = 0.0;
  double next2 = 0.0;
  for (Index j = 0; j < instance.num_pairs(); ++j) {
    if (pattern.joint(j)) {
      const double c = 2.0 * constant_load(instance, j);
      next1 += c;
      next2 += c;
    } else {
      next1 += single_served_load(instance, j, x2);
      next2 += single_served_load(instance, j, x1);
    }
  }
  return {next1, next2};
}

inline FixedPointResult solve(const TwoCellInstance& instance, const SymmetricPattern& pattern,
                              const SolverConfig& config = {}) {
  return iterate_fixed_point(
      [&](const LoadVector& x) {
        const auto [a, b] = two_cell_coupled_map(instance, pattern, x[0], x[1]);
        return LoadVector{{a, b}};
      },
      LoadVector::Zero(2), config);
}

struct BaselineLoads {
  FixedPointResult fixed_point;  // under the all-zeros pattern
  UeLoadVector ue_load;          // length 2m, y-bar
};

inline BaselineLoads baseline_loads(const TwoCellInstance& instance, const SolverConfig& config = {}) {
  BaselineLoads baseline{solve(instance, SymmetricPattern::none(instance.num_pairs()), config), {}};
  const Index m = instance.num_pairs();
  baseline.ue_load.resize(2 * m);
  const LoadVector& x = baseline.fixed_point.load;
  for (Index j = 0; j < m; ++j) {
    baseline.ue_load[j] = single_served_load(instance, j, x[1]);
    baseline.ue_load[m + j] = single_served_load(instance, j, x[0]);
  }
  return baseline;
}

/// G_j = y-bar_j - 2 c_j, length 2m.
inline Eigen::VectorXd gain_of_load(const TwoCellInstance& instance, const BaselineLoads& baseline) {
  if (!baseline.fixed_point.converged()) {
    throw PreconditionError("gain of load needs a converged no-JT baseline");
  }
  const Index m = instance.num_pairs();
  if (baseline.ue_load.size() != 2 * m) {
    throw StructuralError("baseline UE load vector must have 2m entries");
  }
  Eigen::VectorXd gain(2 * m);
  for (Index j = 0; j < 2 * m; ++j) {
    gain[j] = baseline.ue_load[j] - 2.0 * constant_load(instance, j % m);
  }
  return gain;
}

struct TwoCellSolution {
  SymmetricPattern pattern;
  FixedPointResult fixed_point;
  double objective = std::numeric_limits<double>::infinity();  // max(x1, x2)
};

struct GreedySolution : TwoCellSolution {
  Eigen::VectorXd gain;  // G, length 2m
};

/// Joint-serve pair j exactly when G_j > 0 (ties go to no JT).
inline GreedySolution greedy_optimal(const TwoCellInstance& instance, const SolverConfig& config = {}) {
  const BaselineLoads baseline = baseline_loads(instance, config);
  if (!baseline.fixed_point.converged()) {
    throw PreconditionError("no-JT baseline did not converge (" +
                            to_string(baseline.fixed_point.status) +
                            "); gain of load is undefined");
  }
  GreedySolution out;
  out.gain = gain_of_load(instance, baseline);
  std::vector<bool> joint(static_cast<std::size_t>(instance.num_pairs()));
  for (Index j = 0; j < instance.num_pairs(); ++j) joint[static_cast<std::size_t>(j)] = out.gain[j] > 0.0;
  out.pattern = SymmetricPattern(std::move(joint));
  out.fixed_point = solve(instance, out.pattern, config);
  out.objective = out.fixed_point.converged() ? max_load(out.fixed_point.load)
                                              : std::numeric_limits<double>::infinity();
  return out;
}

inline constexpr Index kBruteForceMaxPairs = 20;

struct BruteForceSolution : TwoCellSolution {
  int patterns_evaluated = 0;
  int patterns_converged = 0;
};

/// Exhaustive search over all 2^m symmetric patterns. Every candidate is solved
/// with the generic solver on the expanded scenario; the lowest mask wins ties.
inline BruteForceSolution brute_force_minmax(const TwoCellInstance& instance,
                                             const SolverConfig& config = {}) {
  const Index m = instance.num_pairs();
  if (m > kBruteForceMaxPairs) {
    throw PreconditionError("brute force is limited to " + std::to_string(kBruteForceMaxPairs) +
                            " UE pairs, instance has " + std::to_string(m));
  }
  const NetworkScenario scenario = instance.expanded();
  BruteForceSolution best;
  const std::uint64_t count = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    SymmetricPattern pattern = SymmetricPattern::from_mask(mask, m);
    FixedPointResult fp = fixed_point_solve(scenario, pattern.expanded(), config);
    ++best.patterns_evaluated;
    if (!fp.converged()) continue;
    ++best.patterns_converged;
    const double objective = max_load(fp.load);
    if (objective < best.objective) {
      best.objective = objective;
      best.pattern = std::move(pattern);
      best.fixed_point = std::move(fp);
    }
  }
  return best;
}

}  // namespace jtload::twocell
