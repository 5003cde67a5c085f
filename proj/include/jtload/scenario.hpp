// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jtload/model.hpp"

/// HetNet instance generation: hexagonal macro layout, randomly dropped small
/// cells and UEs, COST-231-Hata path loss and i.i.d. log-normal shadowing.
namespace jtload::scenario {

struct GeneratorParams {
  int hex_count = 7;
  int sc_per_hex = 2;
  int ue_per_hex = 30;
  double hex_circumradius_m = 500.0;
  double carrier_freq_mhz = 2000.0;
  double rb_bandwidth_hz = 180e3;
  int rb_count = 25;  // 4.5 MHz / 180 kHz
  double mc_power_per_rb_w = 0.200;
  double sc_power_per_rb_w = 0.050;
  double noise_psd_dbm_hz = -174.0;
  double shadowing_sigma_db = 8.0;
  double mc_antenna_height_m = 30.0;
  double sc_antenna_height_m = 10.0;
  double ue_height_m = 1.5;
  double city_correction_db = 0.0;  // C_m, medium city
  double min_distance_m = 10.0;
  double ue_demand_bps = 100e3;
  std::uint64_t seed = 1;

  friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;

  /// Throws InvalidParameterError naming the first bad field.
  void validate() const {
    auto positive_int = [](int v, const char* name) {
      if (v < 1) throw InvalidParameterError(name, "must be a positive integer");
    };
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameterError(name, "must be positive");
    };
    positive_int(hex_count, "hex_count");
    if (sc_per_hex < 0) throw InvalidParameterError("sc_per_hex", "must be non-negative");
    positive_int(ue_per_hex, "ue_per_hex");
    positive(hex_circumradius_m, "hex_circumradius");
    positive(carrier_freq_mhz, "carrier_freq");
    positive(rb_bandwidth_hz, "rb_bandwidth");
    positive_int(rb_count, "rb_count");
    positive(mc_power_per_rb_w, "mc_power_per_rb");
    positive(sc_power_per_rb_w, "sc_power_per_rb");
    if (!std::isfinite(noise_psd_dbm_hz)) throw InvalidParameterError("noise_psd", "must be finite");
    if (!(shadowing_sigma_db >= 0.0) || !std::isfinite(shadowing_sigma_db)) {
      throw InvalidParameterError("shadowing_sigma", "must be non-negative");
    }
    positive(mc_antenna_height_m, "mc_antenna_height");
    positive(sc_antenna_height_m, "sc_antenna_height");
    positive(ue_height_m, "ue_height");
    if (!std::isfinite(city_correction_db)) throw InvalidParameterError("city_correction", "must be finite");
    positive(min_distance_m, "min_distance");
    if (!(ue_demand_bps >= 0.0) || !std::isfinite(ue_demand_bps)) {
      throw InvalidParameterError("ue_demand", "must be non-negative");
    }
  }
};

struct PathLossParams {
  double carrier_freq_mhz = 2000.0;
  double base_height_m = 30.0;
  double mobile_height_m = 1.5;
  double city_correction_db = 0.0;
  double min_distance_m = 10.0;
};

/// Ranges outside which COST-231-Hata is not calibrated. Not fatal.
inline std::vector<std::string> cost231_validity_warnings(const PathLossParams& p) {
  std::vector<std::string> out;
  if (p.carrier_freq_mhz < 1500.0 || p.carrier_freq_mhz > 2000.0) {
    out.push_back("COST-231-Hata: carrier frequency " + std::to_string(p.carrier_freq_mhz) +
                  " MHz outside [1500, 2000] MHz");
  }
  if (p.base_height_m < 30.0 || p.base_height_m > 200.0) {
    out.push_back("COST-231-Hata: base station height " + std::to_string(p.base_height_m) +
                  " m outside [30, 200] m");
  }
  if (p.mobile_height_m < 1.0 || p.mobile_height_m > 10.0) {
    out.push_back("COST-231-Hata: mobile height " + std::to_string(p.mobile_height_m) +
                  " m outside [1, 10] m");
  }
  return out;
}

/// COST-231-Hata, medium-city mobile antenna correction. Distances below the
/// configured minimum (including non-positive ones) are clamped to it.
inline double path_loss_db(const PathLossParams& p, double distance_m) {
  const double d_km = std::max(distance_m, p.min_distance_m) / 1000.0;
  const double log_f = std::log10(p.carrier_freq_mhz);
  const double log_hb = std::log10(p.base_height_m);
  const double mobile_correction =
      (1.1 * log_f - 0.7) * p.mobile_height_m - (1.56 * log_f - 0.8);
  return 46.3 + 33.9 * log_f - 13.82 * log_hb - mobile_correction +
         (44.9 - 6.55 * log_hb) * std::log10(d_km) + p.city_correction_db;
}

/// Noise power in one resource block, watts.
inline double noise_power_per_rb_w(double noise_psd_dbm_hz, double rb_bandwidth_hz) {
  const double dbm = noise_psd_dbm_hz + 10.0 * std::log10(rb_bandwidth_hz);
  return std::pow(10.0, dbm / 10.0) / 1000.0;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Flat-topped hexagons. Centers in spiral order: origin, then ring 1, ring 2, ...
inline std::vector<Position> hex_centers(int count, double circumradius_m) {
  static constexpr std::array<std::array<int, 2>, 6> kDirections{
      {{{1, 0}}, {{1, -1}}, {{0, -1}}, {{-1, 0}}, {{-1, 1}}, {{0, 1}}}};
  auto to_xy = [circumradius_m](int q, int r) {
    return Position{circumradius_m * 1.5 * q, circumradius_m * std::sqrt(3.0) * (r + q / 2.0)};
  };
  std::vector<Position> centers;
  if (count <= 0) return centers;
  centers.push_back({0.0, 0.0});
  for (int ring = 1; static_cast<int>(centers.size()) < count; ++ring) {
    int q = kDirections[4][0] * ring;
    int r = kDirections[4][1] * ring;
    for (int side = 0; side < 6; ++side) {
      for (int step = 0; step < ring; ++step) {
        if (static_cast<int>(centers.size()) == count) return centers;
        centers.push_back(to_xy(q, r));
        q += kDirections[static_cast<std::size_t>(side)][0];
        r += kDirections[static_cast<std::size_t>(side)][1];
      }
    }
  }
  return centers;
}

inline bool inside_hexagon(const Position& center, double circumradius_m, const Position& p) {
  const double dx = std::abs(p.x_m - center.x_m);
  const double dy = std::abs(p.y_m - center.y_m);
  const double half_height = std::sqrt(3.0) / 2.0 * circumradius_m;
  return dx <= circumradius_m && dy <= half_height &&
         std::sqrt(3.0) * dx + dy <= std::sqrt(3.0) * circumradius_m;
}

/// Uniform point in a flat-topped hexagon by rejection from its bounding box.
template <class Rng>
Position uniform_in_hexagon(Rng& rng, const Position& center, double circumradius_m) {
  const double half_height = std::sqrt(3.0) / 2.0 * circumradius_m;
  std::uniform_real_distribution<double> ux(-circumradius_m, circumradius_m);
  std::uniform_real_distribution<double> uy(-half_height, half_height);
  for (;;) {
    const Position p{center.x_m + ux(rng), center.y_m + uy(rng)};
    if (inside_hexagon(center, circumradius_m, p)) return p;
  }
}

inline double distance_m(const Position& a, const Position& b) {
  return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

inline PathLossParams path_loss_params_for(const GeneratorParams& g, CellKind kind) {
  return {g.carrier_freq_mhz,
          kind == CellKind::Macro ? g.mc_antenna_height_m : g.sc_antenna_height_m, g.ue_height_m,
          g.city_correction_db, g.min_distance_m};
}

/// Warnings for the macro and small cell path-loss configurations.
inline std::vector<std::string> generator_warnings(const GeneratorParams& g) {
  std::vector<std::string> out;
  for (CellKind kind : {CellKind::Macro, CellKind::Small}) {
    if (kind == CellKind::Small && g.sc_per_hex == 0) continue;
    for (auto& w : cost231_validity_warnings(path_loss_params_for(g, kind))) {
      const std::string tagged = to_string(kind) + " cells: " + w;
      if (std::find(out.begin(), out.end(), tagged) == out.end()) out.push_back(tagged);
    }
  }
  return out;
}

/// Builds a scenario. Cell order: one macro per hexagon center, then the small
/// cells hexagon by hexagon. UEs are likewise grouped by hexagon. Shadowing is
/// drawn once per (cell, UE) link, clamped to +-6 sigma.
inline NetworkScenario generate(const GeneratorParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  const auto centers = hex_centers(params.hex_count, params.hex_circumradius_m);

  std::vector<Cell> cells;
  for (const auto& c : centers) cells.push_back({params.mc_power_per_rb_w, CellKind::Macro, c});
  for (const auto& c : centers) {
    for (int s = 0; s < params.sc_per_hex; ++s) {
      cells.push_back({params.sc_power_per_rb_w, CellKind::Small,
                       uniform_in_hexagon(rng, c, params.hex_circumradius_m)});
    }
  }
  std::vector<Ue> ues;
  for (const auto& c : centers) {
    for (int u = 0; u < params.ue_per_hex; ++u) {
      ues.push_back({params.ue_demand_bps, uniform_in_hexagon(rng, c, params.hex_circumradius_m)});
    }
  }

  const PathLossParams macro = path_loss_params_for(params, CellKind::Macro);
  const PathLossParams small = path_loss_params_for(params, CellKind::Small);
  std::normal_distribution<double> shadowing(0.0, params.shadowing_sigma_db);
  const double clamp = 6.0 * params.shadowing_sigma_db;
  Eigen::MatrixXd gain(static_cast<Index>(cells.size()), static_cast<Index>(ues.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const PathLossParams& pl = cells[i].kind == CellKind::Macro ? macro : small;
    for (std::size_t j = 0; j < ues.size(); ++j) {
      const double s = params.shadowing_sigma_db > 0.0 ? std::clamp(shadowing(rng), -clamp, clamp) : 0.0;
      const double loss = path_loss_db(pl, distance_m(*cells[i].position, *ues[j].position)) + s;
      gain(static_cast<Index>(i), static_cast<Index>(j)) = db_to_linear(-loss);
    }
  }
  return {std::move(cells), std::move(ues), std::move(gain),
          noise_power_per_rb_w(params.noise_psd_dbm_hz, params.rb_bandwidth_hz),
          params.rb_bandwidth_hz, params.rb_count};
}

}  // namespace jtload::scenario
