// Copyright 2026 The Levelsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario configuration: JSON in, validated simulation inputs out. Every
// parse or range failure names the JSON path of the offending key. All
// physical quantities are SI with unit-suffixed key names.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelsim/attitude.hpp"
#include "levelsim/controller.hpp"
#include "levelsim/kalman.hpp"
#include "levelsim/plant.hpp"
#include "levelsim/terrain.hpp"

namespace levelsim {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : std::runtime_error("config error at " + path + ": " + message),
        path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace cfg_detail {

using nlohmann::json;

inline void require_object(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
}

inline void check_known_keys(const json& node, const std::string& path,
                             std::initializer_list<const char*> known) {
  require_object(node, path);
  for (const auto& item : node.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(path + "/" + item.key(), "unknown key");
  }
}

inline double get_number(const json& node, const std::string& path,
                         const char* key, double fallback) {
  if (!node.contains(key)) return fallback;
  const json& v = node.at(key);
  if (!v.is_number()) throw ConfigError(path + "/" + key, "expected a number");
  return v.get<double>();
}

inline double require_number(const json& node, const std::string& path,
                             const char* key) {
  if (!node.contains(key)) throw ConfigError(path + "/" + key, "missing key");
  const json& v = node.at(key);
  if (!v.is_number()) throw ConfigError(path + "/" + key, "expected a number");
  return v.get<double>();
}

}  // namespace cfg_detail

struct ScenarioInitial {
  std::array<double, 4> h_prime_m{0.06, 0.06, 0.06, 0.06};
};

struct ActuatorConfig {
  double no_load_speed_m_s = 0.02;
  double max_load_n = 1000.0;
  double load_n = 250.0;
};

// Full description of one closed-loop run.
struct Scenario {
  double duration_s = 40.0;
  double tick_dt_s = 0.02;
  std::uint64_t seed = 1;

  Terrain terrain;
  ChassisLayout layout{0.6, 0.5};
  std::vector<SuspensionGeometry> corner_geometry;  // exactly 4
  ActuatorConfig actuator;
  ScenarioInitial initial;
  ControllerConfig controller;  // layout/geometry filled from above
  ImuCalibration imu_cal;
  AttitudeFilterParams filter_params;
  SensorNoise noise;
  MotionScript motion;
};

// A validation finding. Errors block simulation; warnings (for example a
// slope beyond the achievable correction range) do not.
struct Finding {
  enum class Severity { kWarning, kError };
  Severity severity;
  std::string path;
  std::string message;
};

inline SuspensionGeometry default_corner_geometry() {
  return SuspensionGeometry(0.10, 0.1016, 0.18, LeverArms(0.08, 0.13), 0.10);
}

namespace cfg_detail {

inline SuspensionGeometry parse_geometry_object(const json& node,
                                                const std::string& path) {
  check_known_keys(node, path,
                   {"a_m", "stroke_m", "c_m", "l1_m", "l2_m", "wheel_radius_m"});
  try {
    return SuspensionGeometry(
        require_number(node, path, "a_m"), require_number(node, path, "stroke_m"),
        require_number(node, path, "c_m"),
        LeverArms(require_number(node, path, "l1_m"),
                  require_number(node, path, "l2_m")),
        require_number(node, path, "wheel_radius_m"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& err) {
    throw ConfigError(path, err.what());
  }
}

inline TerrainPrimitive parse_terrain_primitive(const json& node,
                                                const std::string& path) {
  require_object(node, path);
  if (!node.contains("type") || !node.at("type").is_string()) {
    throw ConfigError(path + "/type", "missing or non-string terrain type");
  }
  const std::string type = node.at("type").get<std::string>();
  if (type == "flat") {
    check_known_keys(node, path, {"type", "height_m"});
    return TerrainPrimitive::flat(get_number(node, path, "height_m", 0.0));
  }
  if (type == "ramp") {
    check_known_keys(node, path, {"type", "grade_deg", "azimuth_deg"});
    return TerrainPrimitive::ramp(require_number(node, path, "grade_deg"),
                                  get_number(node, path, "azimuth_deg", 0.0));
  }
  if (type == "step") {
    check_known_keys(node, path, {"type", "height_m", "edge_m", "azimuth_deg"});
    return TerrainPrimitive::step(require_number(node, path, "height_m"),
                                  get_number(node, path, "edge_m", 0.0),
                                  get_number(node, path, "azimuth_deg", 0.0));
  }
  if (type == "sinusoid") {
    check_known_keys(node, path,
                     {"type", "amplitude_m", "wavelength_m", "azimuth_deg"});
    return TerrainPrimitive::sinusoid(
        require_number(node, path, "amplitude_m"),
        require_number(node, path, "wavelength_m"),
        get_number(node, path, "azimuth_deg", 0.0));
  }
  throw ConfigError(path + "/type", "unknown terrain type '" + type + "'");
}

}  // namespace cfg_detail

inline Scenario parse_scenario(const nlohmann::json& root) {
  using cfg_detail::check_known_keys;
  using cfg_detail::get_number;
  using cfg_detail::require_number;

  check_known_keys(root, "",
                   {"duration_s", "tick_dt_s", "seed", "terrain", "layout",
                    "geometry", "actuator", "initial", "controller", "imu",
                    "noise", "motion"});
  Scenario s;
  s.duration_s = get_number(root, "", "duration_s", s.duration_s);
  s.tick_dt_s = get_number(root, "", "tick_dt_s", s.tick_dt_s);
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned() &&
        !root.at("seed").is_number_integer()) {
      throw ConfigError("/seed", "expected an integer");
    }
    s.seed = root.at("seed").get<std::uint64_t>();
  }

  if (root.contains("terrain")) {
    const auto& t = root.at("terrain");
    if (!t.is_array()) throw ConfigError("/terrain", "expected an array");
    std::vector<TerrainPrimitive> parts;
    for (std::size_t i = 0; i < t.size(); ++i) {
      parts.push_back(cfg_detail::parse_terrain_primitive(
          t.at(i), "/terrain/" + std::to_string(i)));
    }
    s.terrain = Terrain(std::move(parts));
  }

  if (root.contains("layout")) {
    const auto& l = root.at("layout");
    check_known_keys(l, "/layout", {"wheelbase_m", "track_m"});
    try {
      s.layout = ChassisLayout(require_number(l, "/layout", "wheelbase_m"),
                               require_number(l, "/layout", "track_m"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& err) {
      throw ConfigError("/layout", err.what());
    }
  }

  if (root.contains("geometry")) {
    const auto& g = root.at("geometry");
    if (g.contains("corners")) {
      check_known_keys(g, "/geometry", {"corners"});
      const auto& corners = g.at("corners");
      if (!corners.is_array() || corners.size() != 4) {
        throw ConfigError("/geometry/corners", "expected an array of 4 objects");
      }
      for (std::size_t i = 0; i < 4; ++i) {
        s.corner_geometry.push_back(cfg_detail::parse_geometry_object(
            corners.at(i), "/geometry/corners/" + std::to_string(i)));
      }
    } else {
      const SuspensionGeometry shared =
          cfg_detail::parse_geometry_object(g, "/geometry");
      s.corner_geometry.assign(4, shared);
    }
  } else {
    s.corner_geometry.assign(4, default_corner_geometry());
  }

  if (root.contains("actuator")) {
    const auto& a = root.at("actuator");
    check_known_keys(a, "/actuator",
                     {"no_load_speed_m_s", "max_load_n", "load_n"});
    s.actuator.no_load_speed_m_s = get_number(a, "/actuator", "no_load_speed_m_s",
                                              s.actuator.no_load_speed_m_s);
    s.actuator.max_load_n =
        get_number(a, "/actuator", "max_load_n", s.actuator.max_load_n);
    s.actuator.load_n = get_number(a, "/actuator", "load_n", s.actuator.load_n);
  }

  if (root.contains("initial")) {
    const auto& init = root.at("initial");
    check_known_keys(init, "/initial", {"h_prime_m"});
    if (init.contains("h_prime_m")) {
      const auto& h = init.at("h_prime_m");
      if (h.is_array()) {
        if (h.size() != 4) {
          throw ConfigError("/initial/h_prime_m", "expected 4 values");
        }
        for (std::size_t i = 0; i < 4; ++i) {
          if (!h.at(i).is_number()) {
            throw ConfigError("/initial/h_prime_m", "expected numbers");
          }
          s.initial.h_prime_m[i] = h.at(i).get<double>();
        }
      } else if (h.is_number()) {
        s.initial.h_prime_m.fill(h.get<double>());
      } else {
        throw ConfigError("/initial/h_prime_m",
                          "expected a number or an array of 4 numbers");
      }
    }
  }

  if (root.contains("controller")) {
    const auto& c = root.at("controller");
    check_known_keys(c, "/controller",
                     {"roll_deadband_rad", "pitch_deadband_rad",
                      "clearance_setpoint_m", "clearance_deadband_m",
                      "inner_gain_per_s", "correction_mode", "height_cap_frac",
                      "use_extension_table"});
    if (c.contains("use_extension_table")) {
      if (!c.at("use_extension_table").is_boolean()) {
        throw ConfigError("/controller/use_extension_table",
                          "expected a boolean");
      }
      s.controller.use_extension_table =
          c.at("use_extension_table").get<bool>();
    }
    s.controller.roll_deadband_rad = get_number(
        c, "/controller", "roll_deadband_rad", s.controller.roll_deadband_rad);
    s.controller.pitch_deadband_rad =
        get_number(c, "/controller", "pitch_deadband_rad",
                   s.controller.pitch_deadband_rad);
    s.controller.clearance_setpoint_m =
        get_number(c, "/controller", "clearance_setpoint_m",
                   s.controller.clearance_setpoint_m);
    s.controller.clearance_deadband_m =
        get_number(c, "/controller", "clearance_deadband_m",
                   s.controller.clearance_deadband_m);
    s.controller.inner_gain_per_s = get_number(
        c, "/controller", "inner_gain_per_s", s.controller.inner_gain_per_s);
    s.controller.height_cap_frac = get_number(
        c, "/controller", "height_cap_frac", s.controller.height_cap_frac);
    if (c.contains("correction_mode")) {
      const auto& m = c.at("correction_mode");
      if (!m.is_string()) {
        throw ConfigError("/controller/correction_mode", "expected a string");
      }
      const std::string mode = m.get<std::string>();
      if (mode == "symmetric") {
        s.controller.mode = CorrectionMode::kSymmetric;
      } else if (mode == "single_pair") {
        s.controller.mode = CorrectionMode::kSinglePair;
      } else {
        throw ConfigError("/controller/correction_mode",
                          "expected 'symmetric' or 'single_pair'");
      }
    }
  }

  if (root.contains("imu")) {
    const auto& m = root.at("imu");
    check_known_keys(m, "/imu",
                     {"gyro_zero_counts", "gyro_sensitivity_counts_per_deg_s",
                      "acc_zero_g_voltage_v", "adc_ref_voltage_v",
                      "adc_full_scale_counts", "acc_counts_per_g", "kalman"});
    if (m.contains("gyro_zero_counts")) {
      const auto& z = m.at("gyro_zero_counts");
      if (!z.is_array() || z.size() != 3) {
        throw ConfigError("/imu/gyro_zero_counts", "expected 3 values");
      }
      for (std::size_t i = 0; i < 3; ++i) {
        if (!z.at(i).is_number()) {
          throw ConfigError("/imu/gyro_zero_counts", "expected numbers");
        }
        s.imu_cal.gyro_zero_counts[i] = z.at(i).get<double>();
      }
    }
    s.imu_cal.gyro_sensitivity_counts_per_deg_s =
        get_number(m, "/imu", "gyro_sensitivity_counts_per_deg_s",
                   s.imu_cal.gyro_sensitivity_counts_per_deg_s);
    s.imu_cal.acc_zero_g_voltage_v = get_number(
        m, "/imu", "acc_zero_g_voltage_v", s.imu_cal.acc_zero_g_voltage_v);
    s.imu_cal.adc_ref_voltage_v =
        get_number(m, "/imu", "adc_ref_voltage_v", s.imu_cal.adc_ref_voltage_v);
    s.imu_cal.adc_full_scale_counts = get_number(
        m, "/imu", "adc_full_scale_counts", s.imu_cal.adc_full_scale_counts);
    s.imu_cal.acc_counts_per_g =
        get_number(m, "/imu", "acc_counts_per_g", s.imu_cal.acc_counts_per_g);
    if (m.contains("kalman")) {
      const auto& k = m.at("kalman");
      check_known_keys(k, "/imu/kalman",
                       {"q_angle_rad2_per_s", "q_bias_rad2_per_s",
                        "r_measure_rad2", "p0_angle_rad2", "p0_bias_rad2"});
      s.filter_params.q_angle_rad2_per_s =
          get_number(k, "/imu/kalman", "q_angle_rad2_per_s",
                     s.filter_params.q_angle_rad2_per_s);
      s.filter_params.q_bias_rad2_per_s =
          get_number(k, "/imu/kalman", "q_bias_rad2_per_s",
                     s.filter_params.q_bias_rad2_per_s);
      s.filter_params.r_measure_rad2 = get_number(
          k, "/imu/kalman", "r_measure_rad2", s.filter_params.r_measure_rad2);
      s.filter_params.p0_angle_rad2 = get_number(
          k, "/imu/kalman", "p0_angle_rad2", s.filter_params.p0_angle_rad2);
      s.filter_params.p0_bias_rad2 = get_number(
          k, "/imu/kalman", "p0_bias_rad2", s.filter_params.p0_bias_rad2);
    }
  }

  if (root.contains("noise")) {
    const auto& n = root.at("noise");
    check_known_keys(n, "/noise",
                     {"acc_sigma_counts", "gyro_sigma_counts", "gyro_bias_deg_s",
                      "pot_sigma", "ultrasonic_sigma_m"});
    s.noise.acc_sigma_counts =
        get_number(n, "/noise", "acc_sigma_counts", s.noise.acc_sigma_counts);
    s.noise.gyro_sigma_counts =
        get_number(n, "/noise", "gyro_sigma_counts", s.noise.gyro_sigma_counts);
    s.noise.pot_sigma = get_number(n, "/noise", "pot_sigma", s.noise.pot_sigma);
    s.noise.ultrasonic_sigma_m = get_number(n, "/noise", "ultrasonic_sigma_m",
                                            s.noise.ultrasonic_sigma_m);
    if (n.contains("gyro_bias_deg_s")) {
      const auto& b = n.at("gyro_bias_deg_s");
      if (!b.is_array() || b.size() != 3) {
        throw ConfigError("/noise/gyro_bias_deg_s", "expected 3 values");
      }
      for (std::size_t i = 0; i < 3; ++i) {
        if (!b.at(i).is_number()) {
          throw ConfigError("/noise/gyro_bias_deg_s", "expected numbers");
        }
        s.noise.gyro_bias_deg_s[i] = b.at(i).get<double>();
      }
    }
  }

  if (root.contains("motion")) {
    const auto& m = root.at("motion");
    check_known_keys(m, "/motion", {"speed_m_s", "waypoints"});
    s.motion.speed_m_s =
        get_number(m, "/motion", "speed_m_s", s.motion.speed_m_s);
    if (m.contains("waypoints")) {
      const auto& w = m.at("waypoints");
      if (!w.is_array()) throw ConfigError("/motion/waypoints", "expected an array");
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string path = "/motion/waypoints/" + std::to_string(i);
        check_known_keys(w.at(i), path, {"x_m", "y_m"});
        s.motion.waypoints.push_back({require_number(w.at(i), path, "x_m"),
                                      require_number(w.at(i), path, "y_m")});
      }
    }
  }

  s.controller.tick_dt_s = s.tick_dt_s;
  s.controller.layout = s.layout;
  s.controller.corner_geometry = s.corner_geometry;
  if (s.controller.use_extension_table) {
    s.controller.build_extension_tables();
  }
  return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const std::exception& err) {
    throw ConfigError("", std::string("invalid JSON: ") + err.what());
  }
  return parse_scenario(root);
}

// Semantic validation beyond parsing. Errors make the scenario unrunnable;
// warnings flag legitimate but noteworthy setups such as slopes beyond the
// achievable correction range.
inline std::vector<Finding> validate_scenario(const Scenario& s) {
  std::vector<Finding> findings;
  const auto error = [&findings](const std::string& path, const std::string& m) {
    findings.push_back({Finding::Severity::kError, path, m});
  };
  const auto warning = [&findings](const std::string& path,
                                   const std::string& m) {
    findings.push_back({Finding::Severity::kWarning, path, m});
  };

  if (!(s.duration_s > 0.0)) error("/duration_s", "must be > 0");
  if (!(s.tick_dt_s > 0.0)) error("/tick_dt_s", "must be > 0");
  if (s.duration_s > 0.0 && s.tick_dt_s > 0.0 &&
      s.duration_s / s.tick_dt_s > 1e7) {
    error("/duration_s", "duration/tick_dt exceeds 1e7 ticks");
  }

  double min_range_m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const std::string path = "/geometry (corner " + std::to_string(i) + ")";
    const SuspensionGeometry& geom = s.corner_geometry[i];
    HeightInterval reach{0.0, 0.0};
    bool reach_ok = true;
    try {
      reach = reachable_height_interval(geom, s.controller.height_cap_frac);
    } catch (const std::exception& err) {
      error(path, err.what());
      reach_ok = false;
    }
    if (reach_ok) {
      min_range_m = std::min(min_range_m, reach.hi_m - reach.lo_m);
      const double h0 = s.initial.h_prime_m[i];
      if (!(h0 >= reach.lo_m) || !(h0 <= reach.hi_m)) {
        error("/initial/h_prime_m",
              "initial height outside reachable interval [" +
                  std::to_string(reach.lo_m) + ", " + std::to_string(reach.hi_m) +
                  "] for corner " + std::to_string(i));
      }
      // Holding the clearance set point on flat ground needs a height of
      // (setpoint - wheel_radius) at every corner.
      const double needed_h =
          s.controller.clearance_setpoint_m - geom.wheel_radius_m();
      if (needed_h < reach.lo_m - s.controller.clearance_deadband_m ||
          needed_h > reach.hi_m + s.controller.clearance_deadband_m) {
        error("/controller/clearance_setpoint_m",
              "set point unreachable for corner " + std::to_string(i) +
                  ": needs h' = " + std::to_string(needed_h) +
                  " m, reachable [" + std::to_string(reach.lo_m) + ", " +
                  std::to_string(reach.hi_m) + "]");
      }
    }
  }

  if (!(s.actuator.no_load_speed_m_s > 0.0)) {
    error("/actuator/no_load_speed_m_s", "must be > 0");
  }
  if (!(s.actuator.max_load_n > 0.0)) error("/actuator/max_load_n", "must be > 0");
  if (s.actuator.load_n < 0.0) error("/actuator/load_n", "must be >= 0");
  if (s.actuator.load_n >= s.actuator.max_load_n) {
    warning("/actuator/load_n",
            "load at or above max_load: actuators cannot move");
  }

  // Slope feasibility: a ramp of grade g needs a height closure of
  // span*tan(g) across the wheelbase or track; warn when the reachable
  // range cannot provide it (saturation scenarios are legitimate).
  if (std::isfinite(min_range_m)) {
    for (std::size_t i = 0; i < s.terrain.parts().size(); ++i) {
      const auto& p = s.terrain.parts()[i];
      if (p.type != TerrainPrimitive::Type::kRamp) continue;
      const double span = std::max(s.layout.wheelbase_m, s.layout.track_m);
      const double needed = span * std::tan(deg_to_rad(std::fabs(p.grade_deg)));
      if (needed > min_range_m) {
        warning("/terrain/" + std::to_string(i),
                "grade needs " + std::to_string(needed) +
                    " m of height closure but only " +
                    std::to_string(min_range_m) +
                    " m is reachable: corrections will saturate");
      }
    }
  }

  if (s.motion.speed_m_s < 0.0) error("/motion/speed_m_s", "must be >= 0");
  if (s.motion.speed_m_s > 0.0 && s.motion.waypoints.size() < 2) {
    warning("/motion/waypoints", "speed set but fewer than 2 waypoints");
  }
  for (std::size_t i = 0; i < s.motion.waypoints.size(); ++i) {
    const auto& wp = s.motion.waypoints[i];
    if (!std::isfinite(wp.x_m) || !std::isfinite(wp.y_m)) {
      error("/motion/waypoints/" + std::to_string(i), "must be finite");
    } else if (!std::isfinite(s.terrain.height_at(wp.x_m, wp.y_m))) {
      error("/terrain", "terrain not finite at waypoint " + std::to_string(i));
    }
  }

  try {
    s.controller.validate();
  } catch (const std::exception& err) {
    error("/controller", err.what());
  }
  try {
    s.imu_cal.validate();
  } catch (const std::exception& err) {
    error("/imu", err.what());
  }
  if (s.noise.acc_sigma_counts < 0.0 || s.noise.gyro_sigma_counts < 0.0 ||
      s.noise.pot_sigma < 0.0 || s.noise.ultrasonic_sigma_m < 0.0) {
    error("/noise", "noise sigmas must be >= 0");
  }
  return findings;
}

inline bool has_errors(const std::vector<Finding>& findings) {
  for (const auto& f : findings) {
    if (f.severity == Finding::Severity::kError) return true;
  }
  return false;
}

}  // namespace levelsim
