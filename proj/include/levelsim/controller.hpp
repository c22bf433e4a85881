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

// Chassis-leveling control law. Each tick resolves one error at a time,
// in fixed priority order: roll first (its effect on stability is largest),
// then pitch, then ground clearance. The outer loop plans per-corner
// chassis-height targets from the filtered attitude; the inner loop tracks
// the corresponding actuator extensions against potentiometer feedback.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "levelsim/attitude.hpp"
#include "levelsim/kinematics.hpp"
#include "levelsim/plant.hpp"

namespace levelsim {

enum class ControlPhase { kIdle, kCorrectRoll, kCorrectPitch, kCorrectClearance };

inline const char* to_string(ControlPhase phase) {
  switch (phase) {
    case ControlPhase::kIdle:
      return "IDLE";
    case ControlPhase::kCorrectRoll:
      return "CORRECT_ROLL";
    case ControlPhase::kCorrectPitch:
      return "CORRECT_PITCH";
    case ControlPhase::kCorrectClearance:
      return "CORRECT_CLEARANCE";
  }
  return "?";
}

// How an attitude correction is distributed over a wheel pair. Symmetric
// splits the correction +-delta/2 across both sides, preserving mean
// clearance; single-pair moves only the high side by the full delta.
enum class CorrectionMode { kSymmetric, kSinglePair };

struct ControllerConfig {
  double roll_deadband_rad = deg_to_rad(1.0);
  double pitch_deadband_rad = deg_to_rad(1.0);
  double clearance_setpoint_m = 0.16;
  double clearance_deadband_m = 0.005;
  double inner_gain_per_s = 5.0;
  double tick_dt_s = 0.02;
  CorrectionMode mode = CorrectionMode::kSymmetric;
  double height_cap_frac = 0.95;  // targets capped at this fraction of l2

  ChassisLayout layout{0.6, 0.5};
  std::vector<SuspensionGeometry> corner_geometry;  // exactly 4

  // When set, target extensions come from a precomputed lookup table
  // instead of the exact closed-form map (see build_extension_tables).
  bool use_extension_table = false;
  std::vector<ExtensionTable> extension_tables;

  void build_extension_tables() {
    extension_tables.clear();
    for (const auto& geom : corner_geometry) {
      extension_tables.emplace_back(geom, height_cap_frac);
    }
    use_extension_table = true;
  }

  void validate() const {
    if (!(roll_deadband_rad > 0.0) || !(pitch_deadband_rad > 0.0) ||
        !(clearance_deadband_m > 0.0)) {
      throw std::invalid_argument("ControllerConfig: deadbands must be positive");
    }
    if (!(tick_dt_s > 0.0) || !(inner_gain_per_s > 0.0)) {
      throw std::invalid_argument(
          "ControllerConfig: tick_dt and inner_gain must be positive");
    }
    if (corner_geometry.size() != 4) {
      throw std::invalid_argument(
          "ControllerConfig: need exactly 4 corner geometries");
    }
    if (use_extension_table && extension_tables.size() != 4) {
      throw std::invalid_argument(
          "ControllerConfig: extension tables not built (call "
          "build_extension_tables)");
    }
  }
};

struct ControllerState {
  ControlPhase phase = ControlPhase::kIdle;
  std::array<double, 4> target_h_prime_m{};
  std::array<bool, 4> saturated{};
  // Controller-side estimate of the current chassis heights, refreshed from
  // the potentiometers each tick; corrections are planned relative to these
  // so re-planning while actuators are still moving does not wind up.
  std::array<double, 4> current_h_prime_m{};
};

namespace detail {

// Potentiometer reading to chassis height, with the implied extension
// clamped into the geometry's invertible image to absorb sensor noise.
inline double pot_to_h_prime(double pot_reading,
                             const SuspensionGeometry& geom) {
  const double h_top = geom.arms().l2_m * (1.0 - 1e-9);
  const double b_hi = extension_for_height(geom, 0.0);
  const double b_lo = extension_for_height(geom, h_top);
  const double b = std::clamp(pot_reading * geom.stroke_m(), b_lo, b_hi);
  return height_for_extension(geom, b);
}

}  // namespace detail

inline ControllerState initial_controller_state(
    const ControllerConfig& cfg, const std::array<double, 4>& pot_readings) {
  cfg.validate();
  ControllerState state;
  for (int i = 0; i < 4; ++i) {
    state.current_h_prime_m[i] =
        detail::pot_to_h_prime(pot_readings[i], cfg.corner_geometry[i]);
    state.target_h_prime_m[i] = state.current_h_prime_m[i];
  }
  return state;
}

// Pick this tick's phase and per-corner height targets. Exactly one error
// is corrected per tick; raw targets are clamped to the reachable range and
// the saturated flags record whether clamping changed them.
inline ControllerState plan_correction(const Attitude& attitude,
                                       double clearance_m,
                                       const ControllerConfig& cfg,
                                       const ControllerState& state) {
  if (attitude.convention != AttitudeConvention::kZeroLevel) {
    throw std::invalid_argument(
        "plan_correction: attitude must be zero-level convention");
  }
  ControllerState next = state;
  std::array<double, 4> raw = state.current_h_prime_m;

  const double roll = attitude.roll_rad;
  const double pitch = attitude.pitch_rad;
  const double clearance_err = clearance_m - cfg.clearance_setpoint_m;

  if (std::fabs(roll) > cfg.roll_deadband_rad) {
    next.phase = ControlPhase::kCorrectRoll;
    const double delta = cfg.layout.track_m * std::tan(roll);
    if (cfg.mode == CorrectionMode::kSymmetric) {
      raw[kFrontLeft] -= 0.5 * delta;
      raw[kRearLeft] -= 0.5 * delta;
      raw[kFrontRight] += 0.5 * delta;
      raw[kRearRight] += 0.5 * delta;
    } else if (delta >= 0.0) {  // left side high
      raw[kFrontLeft] -= delta;
      raw[kRearLeft] -= delta;
    } else {  // right side high
      raw[kFrontRight] += delta;
      raw[kRearRight] += delta;
    }
  } else if (std::fabs(pitch) > cfg.pitch_deadband_rad) {
    next.phase = ControlPhase::kCorrectPitch;
    const double delta = cfg.layout.wheelbase_m * std::tan(pitch);
    if (cfg.mode == CorrectionMode::kSymmetric) {
      raw[kFrontLeft] -= 0.5 * delta;
      raw[kFrontRight] -= 0.5 * delta;
      raw[kRearLeft] += 0.5 * delta;
      raw[kRearRight] += 0.5 * delta;
    } else if (delta >= 0.0) {  // front high
      raw[kFrontLeft] -= delta;
      raw[kFrontRight] -= delta;
    } else {  // rear high
      raw[kRearLeft] += delta;
      raw[kRearRight] += delta;
    }
  } else if (std::fabs(clearance_err) > cfg.clearance_deadband_m) {
    next.phase = ControlPhase::kCorrectClearance;
    for (double& h : raw) h -= clearance_err;
  } else {
    next.phase = ControlPhase::kIdle;
  }

  for (int i = 0; i < 4; ++i) {
    const HeightInterval reach = reachable_height_interval(
        cfg.corner_geometry[i], cfg.height_cap_frac);
    const double clamped = std::clamp(raw[i], reach.lo_m, reach.hi_m);
    next.saturated[i] = std::fabs(clamped - raw[i]) > 1e-12;
    next.target_h_prime_m[i] = clamped;
  }
  return next;
}

// Inner loop: proportional tracking of the target extensions against the
// potentiometer feedback. Targets are reachable by construction, so the
// height-to-extension map cannot fail here.
inline std::array<double, 4> track_targets(const ControllerState& state,
                                           const std::array<double, 4>& pots,
                                           const ControllerConfig& cfg,
                                           double dt_s) {
  if (!(dt_s > 0.0)) {
    throw std::domain_error("track_targets: dt must be positive");
  }
  std::array<double, 4> commands{};
  const double gain = std::min(cfg.inner_gain_per_s * dt_s, 1.0);
  for (int i = 0; i < 4; ++i) {
    const SuspensionGeometry& geom = cfg.corner_geometry[i];
    if (!(pots[i] >= 0.0) || !(pots[i] <= 1.0)) {
      throw std::domain_error("track_targets: pot reading outside [0, 1]");
    }
    const double h_top = geom.arms().l2_m * (1.0 - 1e-9);
    const double b_hi = extension_for_height(geom, 0.0);
    const double b_lo = extension_for_height(geom, h_top);
    const double current_b =
        std::clamp(pots[i] * geom.stroke_m(), std::max(b_lo, 0.0),
                   std::min(b_hi, geom.stroke_m()));
    const double target_b =
        cfg.use_extension_table
            ? cfg.extension_tables[static_cast<std::size_t>(i)]
                  .extension_for_height(state.target_h_prime_m[i])
            : extension_for_height(geom, state.target_h_prime_m[i]);
    commands[i] = std::clamp(current_b + gain * (target_b - current_b), 0.0,
                             geom.stroke_m());
  }
  return commands;
}

struct ControlOutput {
  ControllerState state;
  std::array<double, 4> extension_commands_m;
};

// One controller tick: refresh the height estimates from the pots, plan the
// correction, track the targets. Deterministic in its inputs.
inline ControlOutput control_tick(const Attitude& attitude, double clearance_m,
                                  const std::array<double, 4>& pots,
                                  const ControllerConfig& cfg,
                                  const ControllerState& state) {
  ControllerState fresh = state;
  for (int i = 0; i < 4; ++i) {
    fresh.current_h_prime_m[i] =
        detail::pot_to_h_prime(pots[i], cfg.corner_geometry[i]);
  }
  ControllerState planned = plan_correction(attitude, clearance_m, cfg, fresh);
  std::array<double, 4> commands =
      track_targets(planned, pots, cfg, cfg.tick_dt_s);
  return {planned, commands};
}

}  // namespace levelsim
