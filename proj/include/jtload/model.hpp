// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jtload/errors.hpp"

/// Downlink load coupling with joint transmission (JT).
///
/// A cell's load is the fraction of its resource blocks in use. Every UE
/// consumes the same share y_j on each of its serving cells, and interference
/// from a non-serving cell k is weighted by that cell's load x_k:
///
///   gamma_j = sum_{i serves j} p_i g_ij / (sum_{k not serving j} p_k g_kj x_k + sigma^2)
///   y_j     = d_j / (M B log2(1 + gamma_j))
///   x_i     = sum_{j served by i} y_j
///
/// The network load is the fixed point x = f(h(x)) of the composition of the
/// SINR map h and the cell load map f.
namespace jtload {

using Index = Eigen::Index;
using LoadVector = Eigen::VectorXd;    // per-cell load x, length n
using SinrVector = Eigen::VectorXd;    // per-UE linear SINR, length m
using UeLoadVector = Eigen::VectorXd;  // per-UE resource share y, length m

enum class CellKind { Macro, Small };

inline std::string to_string(CellKind kind) { return kind == CellKind::Macro ? "macro" : "small"; }

struct Position {
  double x_m = 0.0;
  double y_m = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

struct Cell {
  double power_per_rb_w = 0.0;
  CellKind kind = CellKind::Macro;
  std::optional<Position> position;

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Ue {
  double demand_bps = 0.0;
  std::optional<Position> position;

  friend bool operator==(const Ue&, const Ue&) = default;
};

/// Immutable physical instance: cells, UEs, linear gains, noise and RB grid.
class NetworkScenario {
 public:
  NetworkScenario(std::vector<Cell> cells, std::vector<Ue> ues, Eigen::MatrixXd gain,
                  double noise_power_w, double rb_bandwidth_hz, int rb_count)
      : cells_(std::move(cells)),
        ues_(std::move(ues)),
        gain_(std::move(gain)),
        noise_power_w_(noise_power_w),
        rb_bandwidth_hz_(rb_bandwidth_hz),
        rb_count_(rb_count) {
    if (cells_.empty()) throw StructuralError("scenario needs at least one cell");
    if (ues_.empty()) throw StructuralError("scenario needs at least one UE");
    if (gain_.rows() != num_cells() || gain_.cols() != num_ues()) {
      throw StructuralError("gain matrix is " + std::to_string(gain_.rows()) + "x" +
                            std::to_string(gain_.cols()) + ", expected " +
                            std::to_string(num_cells()) + "x" + std::to_string(num_ues()));
    }
    if (!(noise_power_w_ > 0.0) || !std::isfinite(noise_power_w_)) {
      throw DomainError("noise power must be positive and finite");
    }
    if (!(rb_bandwidth_hz_ > 0.0) || !std::isfinite(rb_bandwidth_hz_)) {
      throw DomainError("resource block bandwidth must be positive and finite");
    }
    if (rb_count_ < 1) throw DomainError("resource block count must be positive");
    for (Index i = 0; i < num_cells(); ++i) {
      const double p = cells_[static_cast<std::size_t>(i)].power_per_rb_w;
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw DomainError("cell " + std::to_string(i) + ": power per RB must be positive");
      }
    }
    for (Index j = 0; j < num_ues(); ++j) {
      const double d = ues_[static_cast<std::size_t>(j)].demand_bps;
      if (!(d >= 0.0) || !std::isfinite(d)) {
        throw DomainError("UE " + std::to_string(j) + ": demand must be non-negative");
      }
    }
    if (!gain_.allFinite() || !(gain_.array() > 0.0).all()) {
      throw DomainError("all channel gains must be positive and finite");
    }
    received_power_ = gain_;
    for (Index i = 0; i < num_cells(); ++i) {
      received_power_.row(i) *= cells_[static_cast<std::size_t>(i)].power_per_rb_w;
    }
  }

  Index num_cells() const noexcept { return static_cast<Index>(cells_.size()); }
  Index num_ues() const noexcept { return static_cast<Index>(ues_.size()); }

  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<Ue>& ues() const noexcept { return ues_; }
  const Cell& cell(Index i) const { return cells_.at(static_cast<std::size_t>(i)); }
  const Ue& ue(Index j) const { return ues_.at(static_cast<std::size_t>(j)); }
  const Eigen::MatrixXd& gain() const noexcept { return gain_; }
  double noise_power_w() const noexcept { return noise_power_w_; }
  double rb_bandwidth_hz() const noexcept { return rb_bandwidth_hz_; }
  int rb_count() const noexcept { return rb_count_; }

  /// M * B, the bandwidth a UE would get with every RB of one cell.
  double cell_bandwidth_hz() const noexcept { return rb_bandwidth_hz_ * rb_count_; }

  /// p_i * g_ij, precomputed.
  const Eigen::MatrixXd& received_power() const noexcept { return received_power_; }

  NetworkScenario with_uniform_demand(double demand_bps) const {
    std::vector<Ue> ues = ues_;
    for (auto& ue : ues) ue.demand_bps = demand_bps;
    return {cells_, std::move(ues), gain_, noise_power_w_, rb_bandwidth_hz_, rb_count_};
  }

  friend bool operator==(const NetworkScenario& a, const NetworkScenario& b) {
    return a.cells_ == b.cells_ && a.ues_ == b.ues_ && a.gain_ == b.gain_ &&
           a.noise_power_w_ == b.noise_power_w_ && a.rb_bandwidth_hz_ == b.rb_bandwidth_hz_ &&
           a.rb_count_ == b.rb_count_;
  }

 private:
  std::vector<Cell> cells_;
  std::vector<Ue> ues_;
  Eigen::MatrixXd gain_;
  Eigen::MatrixXd received_power_;
  double noise_power_w_;
  double rb_bandwidth_hz_;
  int rb_count_;
};

/// Binary n x m serving matrix. Every UE has between 1 and K serving cells.
class JtPattern {
 public:
  using Matrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  JtPattern(Matrix kappa, int max_serving) : kappa_(std::move(kappa)), max_serving_(max_serving) {
    if (kappa_.rows() < 1 || kappa_.cols() < 1) throw StructuralError("empty JT pattern");
    // K < n in the optimization problem; K = n is allowed here so that full
    // JT patterns (e.g. both cells of a two-cell pair) can be represented.
    if (max_serving_ < 1 || max_serving_ > kappa_.rows()) {
      throw StructuralError("max_serving must lie in [1, n]");
    }
    for (Index j = 0; j < kappa_.cols(); ++j) {
      int count = 0;
      for (Index i = 0; i < kappa_.rows(); ++i) {
        if (kappa_(i, j) > 1) throw StructuralError("JT pattern entries must be 0 or 1");
        count += kappa_(i, j);
      }
      if (count < 1) throw StructuralError("UE " + std::to_string(j) + " has no serving cell");
      if (count > max_serving_) {
        throw StructuralError("UE " + std::to_string(j) + " has " + std::to_string(count) +
                              " serving cells, more than max_serving");
      }
    }
  }

  /// One serving cell per UE.
  static JtPattern single(const std::vector<Index>& serving_cell, Index num_cells, int max_serving = 1) {
    Matrix kappa = Matrix::Zero(num_cells, static_cast<Index>(serving_cell.size()));
    for (std::size_t j = 0; j < serving_cell.size(); ++j) {
      if (serving_cell[j] < 0 || serving_cell[j] >= num_cells) {
        throw StructuralError("serving cell index out of range for UE " + std::to_string(j));
      }
      kappa(serving_cell[j], static_cast<Index>(j)) = 1;
    }
    return {std::move(kappa), max_serving};
  }

  Index num_cells() const noexcept { return kappa_.rows(); }
  Index num_ues() const noexcept { return kappa_.cols(); }
  int max_serving() const noexcept { return max_serving_; }
  const Matrix& kappa() const noexcept { return kappa_; }

  bool serves(Index cell, Index ue) const { return kappa_(cell, ue) != 0; }
  int serving_count(Index ue) const { return kappa_.col(ue).cast<int>().sum(); }
  int served_count(Index cell) const { return kappa_.row(cell).cast<int>().sum(); }
  int link_count() const { return kappa_.cast<int>().sum(); }

  /// Copy with kappa(cell, ue) switched on. Fails if already on or if it would exceed K.
  JtPattern with_link(Index cell, Index ue) const {
    if (cell < 0 || cell >= num_cells() || ue < 0 || ue >= num_ues()) {
      throw StructuralError("link index out of range");
    }
    if (serves(cell, ue)) throw PreconditionError("link already present");
    Matrix kappa = kappa_;
    kappa(cell, ue) = 1;
    return {std::move(kappa), max_serving_};
  }

  JtPattern with_max_serving(int max_serving) const { return {kappa_, max_serving}; }

  friend bool operator==(const JtPattern& a, const JtPattern& b) {
    return a.max_serving_ == b.max_serving_ && a.kappa_ == b.kappa_;
  }

 private:
  Matrix kappa_;
  int max_serving_;
};

namespace detail {

inline void check_shapes(const NetworkScenario& scenario, const JtPattern& pattern) {
  if (pattern.num_cells() != scenario.num_cells() || pattern.num_ues() != scenario.num_ues()) {
    throw StructuralError("JT pattern is " + std::to_string(pattern.num_cells()) + "x" +
                          std::to_string(pattern.num_ues()) + ", scenario has " +
                          std::to_string(scenario.num_cells()) + " cells and " +
                          std::to_string(scenario.num_ues()) + " UEs");
  }
}

inline void check_load(const NetworkScenario& scenario, const LoadVector& load) {
  if (load.size() != scenario.num_cells()) {
    throw StructuralError("load vector has " + std::to_string(load.size()) + " entries, expected " +
                          std::to_string(scenario.num_cells()));
  }
  if (!load.allFinite() || (load.array() < 0.0).any()) {
    throw DomainError("load components must be finite and non-negative");
  }
}

inline void check_sinr(const NetworkScenario& scenario, const SinrVector& sinr) {
  if (sinr.size() != scenario.num_ues()) {
    throw StructuralError("SINR vector has " + std::to_string(sinr.size()) + " entries, expected " +
                          std::to_string(scenario.num_ues()));
  }
  for (Index j = 0; j < sinr.size(); ++j) {
    if (!(sinr[j] > 0.0) || !std::isfinite(sinr[j])) {
      throw DomainError("SINR of UE " + std::to_string(j) + " must be positive and finite");
    }
  }
}

}  // namespace detail

/// log2(1 + v) through the natural logarithm.
inline double log2_1p(double v) { return std::log1p(v) / std::numbers::ln2; }

/// h(x): per-UE SINR for the given pattern and cell loads.
inline SinrVector sinr_function(const NetworkScenario& scenario, const JtPattern& pattern,
                                const LoadVector& load) {
  detail::check_shapes(scenario, pattern);
  detail::check_load(scenario, load);
  const Eigen::MatrixXd& rx = scenario.received_power();
  const auto& kappa = pattern.kappa();
  const Index n = scenario.num_cells();
  SinrVector sinr(scenario.num_ues());
  for (Index j = 0; j < scenario.num_ues(); ++j) {
    double signal = 0.0;
    double interference = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (kappa(i, j)) {
        signal += rx(i, j);
      } else {
        interference += rx(i, j) * load[i];
      }
    }
    sinr[j] = signal / (interference + scenario.noise_power_w());
  }
  return sinr;
}

/// y_j = d_j / (M B log2(1 + gamma_j)).
inline UeLoadVector ue_load(const NetworkScenario& scenario, const SinrVector& sinr) {
  detail::check_sinr(scenario, sinr);
  const double bandwidth = scenario.cell_bandwidth_hz();
  UeLoadVector y(scenario.num_ues());
  for (Index j = 0; j < scenario.num_ues(); ++j) {
    const double demand = scenario.ue(j).demand_bps;
    if (!(demand > 0.0)) {
      throw DomainError("UE " + std::to_string(j) + " has zero demand");
    }
    y[j] = demand / (bandwidth * log2_1p(sinr[j]));
  }
  return y;
}

/// f(gamma): x_i = sum of y_j over the UEs cell i serves. A JT UE counts in full on every serving cell.
inline LoadVector cell_load_function(const NetworkScenario& scenario, const JtPattern& pattern,
                                     const SinrVector& sinr) {
  detail::check_shapes(scenario, pattern);
  const UeLoadVector y = ue_load(scenario, sinr);
  const auto& kappa = pattern.kappa();
  LoadVector x = LoadVector::Zero(scenario.num_cells());
  for (Index j = 0; j < scenario.num_ues(); ++j) {
    for (Index i = 0; i < scenario.num_cells(); ++i) {
      if (kappa(i, j)) x[i] += y[j];
    }
  }
  return x;
}

/// One application of f(h(x)).
inline LoadVector coupled_map(const NetworkScenario& scenario, const JtPattern& pattern,
                              const LoadVector& load) {
  return cell_load_function(scenario, pattern, sinr_function(scenario, pattern, load));
}

/// f_old(h_new(x)): SINR under one pattern, load accounting under another.
inline LoadVector mixed_coupled_map(const NetworkScenario& scenario, const JtPattern& load_pattern,
                                    const JtPattern& sinr_pattern, const LoadVector& load) {
  return cell_load_function(scenario, load_pattern, sinr_function(scenario, sinr_pattern, load));
}

inline double max_load(const LoadVector& x) { return x.size() == 0 ? 0.0 : x.maxCoeff(); }

/// max - min cell load.
inline double load_spread(const LoadVector& x) {
  return x.size() == 0 ? 0.0 : x.maxCoeff() - x.minCoeff();
}

}  // namespace jtload
