// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jtload/model.hpp"
#include "jtload/scenario.hpp"
#include "jtload/twocell.hpp"

/// JSON documents for scenarios, JT patterns and two-cell instances.
///
/// Scenario:
///   { "cells": [{"id", "kind", "x_m", "y_m", "power_per_rb_w"}],
///     "ues":   [{"id", "x_m", "y_m", "demand_bps"}],
///     "gain":  [[g_11, ..., g_1m], ..., [g_n1, ..., g_nm]],
///     "noise_power_w", "rb_bandwidth_hz", "rb_count",
///     "meta":  {"seed", "generator_params"} }
/// Positions are optional; ids are 1-based and must match array order.
/// Doubles are written in shortest round-trip form, so parsing restores them bit-exactly.
namespace jtload::io {

using nlohmann::json;

struct ScenarioMeta {
  std::optional<std::uint64_t> seed;
  std::optional<scenario::GeneratorParams> generator_params;
};

inline json to_json(const scenario::GeneratorParams& p) {
  return json{{"hex_count", p.hex_count},
              {"sc_per_hex", p.sc_per_hex},
              {"ue_per_hex", p.ue_per_hex},
              {"hex_circumradius_m", p.hex_circumradius_m},
              {"carrier_freq_mhz", p.carrier_freq_mhz},
              {"rb_bandwidth_hz", p.rb_bandwidth_hz},
              {"rb_count", p.rb_count},
              {"mc_power_per_rb_w", p.mc_power_per_rb_w},
              {"sc_power_per_rb_w", p.sc_power_per_rb_w},
              {"noise_psd_dbm_hz", p.noise_psd_dbm_hz},
              {"shadowing_sigma_db", p.shadowing_sigma_db},
              {"mc_antenna_height_m", p.mc_antenna_height_m},
              {"sc_antenna_height_m", p.sc_antenna_height_m},
              {"ue_height_m", p.ue_height_m},
              {"city_correction_db", p.city_correction_db},
              {"min_distance_m", p.min_distance_m},
              {"ue_demand_bps", p.ue_demand_bps},
              {"seed", p.seed}};
}

namespace detail {

inline const json& field(const json& obj, const std::string& name, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path.empty() ? name : path, "expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(path.empty() ? name : path + "." + name, "missing");
  return *it;
}

inline std::string join(const std::string& path, const std::string& name) {
  return path.empty() ? name : path + "." + name;
}

inline double number(const json& obj, const std::string& name, const std::string& path = {}) {
  const json& v = field(obj, name, path);
  if (!v.is_number()) throw ParseError(join(path, name), "expected a number");
  return v.get<double>();
}

template <class Int>
Int integer(const json& obj, const std::string& name, const std::string& path = {}) {
  const json& v = field(obj, name, path);
  if (!v.is_number_integer()) throw ParseError(join(path, name), "expected an integer");
  if constexpr (std::is_unsigned_v<Int>) {
    if (v.is_number_unsigned()) return v.get<Int>();
    if (v.get<long long>() < 0) throw ParseError(join(path, name), "expected a non-negative integer");
  }
  return v.get<Int>();
}

inline const json& array(const json& obj, const std::string& name, const std::string& path = {}) {
  const json& v = field(obj, name, path);
  if (!v.is_array()) throw ParseError(join(path, name), "expected an array");
  return v;
}

inline std::optional<Position> position(const json& obj, const std::string& path) {
  const bool has_x = obj.contains("x_m");
  const bool has_y = obj.contains("y_m");
  if (!has_x && !has_y) return std::nullopt;
  return Position{number(obj, "x_m", path), number(obj, "y_m", path)};
}

inline void check_id(const json& obj, std::size_t index, const std::string& path) {
  if (!obj.contains("id")) return;
  const auto id = integer<long long>(obj, "id", path);
  if (id != static_cast<long long>(index + 1)) {
    throw ParseError(join(path, "id"), "expected " + std::to_string(index + 1));
  }
}

// Applies a converter and rethrows JSON and domain errors as ParseError naming the field.
template <class F>
auto guarded(const std::string& field_name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(field_name, e.what());
  }
}

}  // namespace detail

inline scenario::GeneratorParams generator_params_from_json(const json& doc, const std::string& path = "generator_params") {
  using detail::integer;
  using detail::number;
  scenario::GeneratorParams p;
  p.hex_count = integer<int>(doc, "hex_count", path);
  p.sc_per_hex = integer<int>(doc, "sc_per_hex", path);
  p.ue_per_hex = integer<int>(doc, "ue_per_hex", path);
  p.hex_circumradius_m = number(doc, "hex_circumradius_m", path);
  p.carrier_freq_mhz = number(doc, "carrier_freq_mhz", path);
  p.rb_bandwidth_hz = number(doc, "rb_bandwidth_hz", path);
  p.rb_count = integer<int>(doc, "rb_count", path);
  p.mc_power_per_rb_w = number(doc, "mc_power_per_rb_w", path);
  p.sc_power_per_rb_w = number(doc, "sc_power_per_rb_w", path);
  p.noise_psd_dbm_hz = number(doc, "noise_psd_dbm_hz", path);
  p.shadowing_sigma_db = number(doc, "shadowing_sigma_db", path);
  p.mc_antenna_height_m = number(doc, "mc_antenna_height_m", path);
  p.sc_antenna_height_m = number(doc, "sc_antenna_height_m", path);
  p.ue_height_m = number(doc, "ue_height_m", path);
  p.city_correction_db = number(doc, "city_correction_db", path);
  p.min_distance_m = number(doc, "min_distance_m", path);
  p.ue_demand_bps = number(doc, "ue_demand_bps", path);
  p.seed = integer<std::uint64_t>(doc, "seed", path);
  return p;
}

inline json serialize(const NetworkScenario& s, const ScenarioMeta& meta = {}) {
  json cells = json::array();
  for (std::size_t i = 0; i < s.cells().size(); ++i) {
    const Cell& c = s.cells()[i];
    json jc{{"id", i + 1}, {"kind", to_string(c.kind)}};
    if (c.position) {
      jc["x_m"] = c.position->x_m;
      jc["y_m"] = c.position->y_m;
    }
    jc["power_per_rb_w"] = c.power_per_rb_w;
    cells.push_back(std::move(jc));
  }
  json ues = json::array();
  for (std::size_t j = 0; j < s.ues().size(); ++j) {
    const Ue& u = s.ues()[j];
    json ju{{"id", j + 1}};
    if (u.position) {
      ju["x_m"] = u.position->x_m;
      ju["y_m"] = u.position->y_m;
    }
    ju["demand_bps"] = u.demand_bps;
    ues.push_back(std::move(ju));
  }
  json gain = json::array();
  for (Index i = 0; i < s.num_cells(); ++i) {
    json row = json::array();
    for (Index j = 0; j < s.num_ues(); ++j) row.push_back(s.gain()(i, j));
    gain.push_back(std::move(row));
  }
  json doc{{"cells", std::move(cells)},
           {"ues", std::move(ues)},
           {"gain", std::move(gain)},
           {"noise_power_w", s.noise_power_w()},
           {"rb_bandwidth_hz", s.rb_bandwidth_hz()},
           {"rb_count", s.rb_count()}};
  json jmeta = json::object();
  if (meta.seed) jmeta["seed"] = *meta.seed;
  if (meta.generator_params) jmeta["generator_params"] = to_json(*meta.generator_params);
  doc["meta"] = std::move(jmeta);
  return doc;
}

inline NetworkScenario deserialize(const json& doc) {
  using detail::array;
  using detail::number;
  if (!doc.is_object()) throw ParseError("document", "expected a JSON object");

  std::vector<Cell> cells;
  const json& jcells = array(doc, "cells");
  for (std::size_t i = 0; i < jcells.size(); ++i) {
    const std::string path = "cells[" + std::to_string(i) + "]";
    const json& jc = jcells[i];
    detail::check_id(jc, i, path);
    Cell c;
    const json& kind = detail::field(jc, "kind", path);
    if (kind == "macro") {
      c.kind = CellKind::Macro;
    } else if (kind == "small") {
      c.kind = CellKind::Small;
    } else {
      throw ParseError(path + ".kind", "expected \"macro\" or \"small\"");
    }
    c.position = detail::position(jc, path);
    c.power_per_rb_w = number(jc, "power_per_rb_w", path);
    cells.push_back(c);
  }

  std::vector<Ue> ues;
  const json& jues = array(doc, "ues");
  for (std::size_t j = 0; j < jues.size(); ++j) {
    const std::string path = "ues[" + std::to_string(j) + "]";
    detail::check_id(jues[j], j, path);
    ues.push_back({number(jues[j], "demand_bps", path), detail::position(jues[j], path)});
  }

  const json& jgain = array(doc, "gain");
  if (jgain.size() != cells.size()) {
    throw ParseError("gain", "expected " + std::to_string(cells.size()) + " rows");
  }
  Eigen::MatrixXd gain(static_cast<Index>(cells.size()), static_cast<Index>(ues.size()));
  for (std::size_t i = 0; i < jgain.size(); ++i) {
    const std::string path = "gain[" + std::to_string(i) + "]";
    if (!jgain[i].is_array() || jgain[i].size() != ues.size()) {
      throw ParseError(path, "expected an array of " + std::to_string(ues.size()) + " numbers");
    }
    for (std::size_t j = 0; j < ues.size(); ++j) {
      if (!jgain[i][j].is_number()) {
        throw ParseError(path + "[" + std::to_string(j) + "]", "expected a number");
      }
      gain(static_cast<Index>(i), static_cast<Index>(j)) = jgain[i][j].get<double>();
    }
  }

  const double noise = number(doc, "noise_power_w");
  const double bandwidth = number(doc, "rb_bandwidth_hz");
  const int rb_count = detail::integer<int>(doc, "rb_count");
  return detail::guarded("scenario", [&] {
    return NetworkScenario(std::move(cells), std::move(ues), std::move(gain), noise, bandwidth, rb_count);
  });
}

inline ScenarioMeta deserialize_meta(const json& doc) {
  ScenarioMeta meta;
  if (!doc.is_object() || !doc.contains("meta")) return meta;
  const json& jm = doc["meta"];
  if (!jm.is_object()) throw ParseError("meta", "expected an object");
  if (jm.contains("seed")) meta.seed = detail::integer<std::uint64_t>(jm, "seed", "meta");
  if (jm.contains("generator_params")) {
    meta.generator_params = generator_params_from_json(jm["generator_params"], "meta.generator_params");
  }
  return meta;
}

/// { "max_serving": K, "kappa": [[0/1 per UE] per cell] }
inline json serialize_pattern(const JtPattern& pattern) {
  json rows = json::array();
  for (Index i = 0; i < pattern.num_cells(); ++i) {
    json row = json::array();
    for (Index j = 0; j < pattern.num_ues(); ++j) row.push_back(pattern.serves(i, j) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  return json{{"max_serving", pattern.max_serving()}, {"kappa", std::move(rows)}};
}

inline JtPattern deserialize_pattern(const json& doc) {
  const int k = detail::integer<int>(doc, "max_serving");
  const json& rows = detail::array(doc, "kappa");
  if (rows.empty() || !rows[0].is_array()) throw ParseError("kappa", "expected a non-empty matrix");
  const std::size_t m = rows[0].size();
  JtPattern::Matrix kappa(static_cast<Index>(rows.size()), static_cast<Index>(m));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != m) {
      throw ParseError("kappa[" + std::to_string(i) + "]", "expected " + std::to_string(m) + " entries");
    }
    for (std::size_t j = 0; j < m; ++j) {
      const json& v = rows[i][j];
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
        throw ParseError("kappa[" + std::to_string(i) + "][" + std::to_string(j) + "]", "expected 0 or 1");
      }
      kappa(static_cast<Index>(i), static_cast<Index>(j)) = static_cast<std::uint8_t>(v.get<int>());
    }
  }
  return detail::guarded("kappa", [&] { return JtPattern(std::move(kappa), k); });
}

/// { "power_w", "noise_power_w", "pairs": [{"own_gain", "cross_gain", "demand"}] }
inline json serialize_two_cell(const twocell::TwoCellInstance& inst) {
  json pairs = json::array();
  for (const auto& p : inst.pairs()) {
    pairs.push_back({{"own_gain", p.own_gain}, {"cross_gain", p.cross_gain}, {"demand", p.demand}});
  }
  return json{{"power_w", inst.power_w()}, {"noise_power_w", inst.noise_power_w()}, {"pairs", std::move(pairs)}};
}

inline twocell::TwoCellInstance deserialize_two_cell(const json& doc) {
  using detail::number;
  if (!doc.is_object()) throw ParseError("document", "expected a JSON object");
  const double power = number(doc, "power_w");
  const double noise = number(doc, "noise_power_w");
  const json& jpairs = detail::array(doc, "pairs");
  std::vector<twocell::UePair> pairs;
  for (std::size_t j = 0; j < jpairs.size(); ++j) {
    const std::string path = "pairs[" + std::to_string(j) + "]";
    pairs.push_back({number(jpairs[j], "own_gain", path), number(jpairs[j], "cross_gain", path),
                     number(jpairs[j], "demand", path)});
  }
  return detail::guarded("pairs", [&] { return twocell::TwoCellInstance(power, noise, std::move(pairs)); });
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path, e.what());
  }
}

inline void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace jtload::io
