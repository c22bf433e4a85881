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

// Ground-truth simulation of the four-corner vehicle. The plant is
// quasi-static: chassis attitude follows actuator positions and terrain
// instantaneously, with no spring-mass dynamics or wheel slip. Wheel
// contact is taken directly below the wheel center. Rover motion is
// scripted (waypoints at constant speed), not driven by a drivetrain model.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "levelsim/attitude.hpp"
#include "levelsim/kinematics.hpp"
#include "levelsim/rng.hpp"
#include "levelsim/terrain.hpp"

namespace levelsim {

// Wheel numbering: W1 front-left, W2 rear-left, W3 rear-right,
// W4 front-right. Array indices follow this order.
enum Corner {
  kFrontLeft = 0,
  kRearLeft = 1,
  kRearRight = 2,
  kFrontRight = 3
};

struct ChassisLayout {
  double wheelbase_m;  // front-rear
  double track_m;      // left-right

  ChassisLayout(double wheelbase, double track)
      : wheelbase_m(wheelbase), track_m(track) {
    if (!(wheelbase > 0.0) || !(track > 0.0)) {
      throw std::invalid_argument("ChassisLayout: dimensions must be positive");
    }
  }
};

// Body-frame corner offset, x forward, y left.
struct BodyOffset {
  double x_m;
  double y_m;
};

inline BodyOffset corner_offset(const ChassisLayout& layout, int corner) {
  const double hw = 0.5 * layout.wheelbase_m;
  const double ht = 0.5 * layout.track_m;
  switch (corner) {
    case kFrontLeft:
      return {hw, ht};
    case kRearLeft:
      return {-hw, ht};
    case kRearRight:
      return {-hw, -ht};
    case kFrontRight:
      return {hw, -ht};
    default:
      throw std::out_of_range("corner_offset: corner index must be 0..3");
  }
}

// Chassis attitude from the four corner heights by side/end pair averaging,
// which for a rectangular layout equals the least-squares plane fit.
// Positive roll = left side high, positive pitch = front high.
inline Attitude chassis_attitude_from_heights(
    const std::array<double, 4>& heights_m, const ChassisLayout& layout) {
  for (double h : heights_m) {
    if (!std::isfinite(h)) {
      throw std::domain_error("chassis_attitude_from_heights: non-finite height");
    }
  }
  const double left = 0.5 * (heights_m[kFrontLeft] + heights_m[kRearLeft]);
  const double right = 0.5 * (heights_m[kFrontRight] + heights_m[kRearRight]);
  const double front = 0.5 * (heights_m[kFrontLeft] + heights_m[kFrontRight]);
  const double rear = 0.5 * (heights_m[kRearLeft] + heights_m[kRearRight]);
  return {std::atan((front - rear) / layout.wheelbase_m),
          std::atan((left - right) / layout.track_m),
          AttitudeConvention::kZeroLevel};
}

// One linear actuator with rate limiting and linear load derating.
struct ActuatorState {
  double extension_m = 0.0;
  double target_m = 0.0;
  double no_load_speed_m_s = 0.02;
  double max_load_n = 1000.0;
  double load_n = 0.0;
  double stroke_m = 0.1016;
  double pot_reading = 0.0;  // extension / stroke, ideal
};

// Advance the actuator one step: move toward the target at the derated
// speed, never overshooting and never leaving [0, stroke].
inline ActuatorState step_actuator(const ActuatorState& state, double dt_s) {
  if (!(dt_s > 0.0)) {
    throw std::domain_error("step_actuator: dt must be positive");
  }
  const double derate = std::max(0.0, 1.0 - state.load_n / state.max_load_n);
  const double max_step = state.no_load_speed_m_s * derate * dt_s;
  ActuatorState next = state;
  const double delta = state.target_m - state.extension_m;
  const double step = std::clamp(delta, -max_step, max_step);
  next.extension_m =
      std::clamp(state.extension_m + step, 0.0, state.stroke_m);
  next.pot_reading = next.extension_m / next.stroke_m;
  return next;
}

struct Pose2D {
  double x_m = 0.0;
  double y_m = 0.0;
  double heading_rad = 0.0;
};

// Chassis-corner height over the world origin plane: ground under the wheel
// plus wheel radius plus the linkage height for the given extension.
inline double corner_height(const Terrain& terrain, const Pose2D& pose,
                            const ChassisLayout& layout, int corner,
                            double extension_m,
                            const SuspensionGeometry& geom) {
  const BodyOffset off = corner_offset(layout, corner);
  const double ch = std::cos(pose.heading_rad);
  const double sh = std::sin(pose.heading_rad);
  const double wx = pose.x_m + ch * off.x_m - sh * off.y_m;
  const double wy = pose.y_m + sh * off.x_m + ch * off.y_m;
  const double ground = terrain.height_at(wx, wy);
  const double h_prime = height_for_extension(geom, extension_m);
  return ground + geom.wheel_radius_m() + h_prime;
}

struct MotionScript {
  struct Waypoint {
    double x_m = 0.0;
    double y_m = 0.0;
  };
  std::vector<Waypoint> waypoints;
  double speed_m_s = 0.0;
};

// Per-channel sensor noise levels. Gyro bias is a constant offset in deg/s
// added per axis; sigmas are Gaussian standard deviations.
struct SensorNoise {
  double acc_sigma_counts = 0.0;
  double gyro_sigma_counts = 0.0;
  std::array<double, 3> gyro_bias_deg_s{0.0, 0.0, 0.0};
  double pot_sigma = 0.0;
  double ultrasonic_sigma_m = 0.0;
};

struct RoverState {
  Pose2D pose;
  std::array<ActuatorState, 4> actuators;
  Attitude attitude;  // zero-level, recomputed from wheel heights
  double clearance_m = 0.0;
};

// Everything the sensor suite reports in one tick.
struct SensedTick {
  ImuSample imu;
  std::array<double, 4> pot_readings;
  double ultrasonic_clearance_m;
};

class Plant {
 public:
  Plant(Terrain terrain, const ChassisLayout& layout,
        std::vector<SuspensionGeometry> corner_geometry,
        const std::array<ActuatorState, 4>& actuators, MotionScript motion)
      : terrain_(std::move(terrain)),
        layout_(layout),
        geoms_(std::move(corner_geometry)),
        motion_(std::move(motion)) {
    if (geoms_.size() != 4) {
      throw std::invalid_argument("Plant: need exactly 4 corner geometries");
    }
    state_.actuators = actuators;
    for (auto& a : state_.actuators) {
      a.pot_reading = a.extension_m / a.stroke_m;
    }
    if (!motion_.waypoints.empty()) {
      state_.pose.x_m = motion_.waypoints.front().x_m;
      state_.pose.y_m = motion_.waypoints.front().y_m;
      aim_at_next_waypoint();
    }
    refresh_geometry();
    prev_attitude_ = state_.attitude;
  }

  const RoverState& state() const { return state_; }
  const ChassisLayout& layout() const { return layout_; }
  const SuspensionGeometry& geometry(int corner) const {
    return geoms_.at(corner);
  }

  std::array<double, 4> corner_heights() const {
    std::array<double, 4> h{};
    for (int i = 0; i < 4; ++i) {
      h[i] = corner_height(terrain_, state_.pose, layout_, i,
                           state_.actuators[i].extension_m, geoms_[i]);
    }
    return h;
  }

  // Synthesize one tick of sensor output from the true state: accelerometer
  // counts from the gravity projection of the true attitude, gyro counts
  // from the true attitude rate plus bias, potentiometers from extension
  // over stroke, ultrasonic from center clearance. Gaussian noise per
  // channel. Counts are clamped to the ADC range.
  SensedTick sense(double t_s, const ImuCalibration& cal,
                   const SensorNoise& noise, Rng& rng) const {
    const Attitude& att = state_.attitude;
    const double gyro_pitch_rate_deg_s =
        rad_to_deg((att.pitch_rad - prev_attitude_.pitch_rad) * inv_dt_);
    const double gyro_roll_rate_deg_s =
        rad_to_deg((att.roll_rad - prev_attitude_.roll_rad) * inv_dt_);

    // Accelerometer counts: inverse of the atan2 tilt extraction. The Z
    // component is shared between the two axes, so X is coupled through
    // tan(roll) to keep both equations exactly consistent.
    const double g_counts = cal.acc_counts_per_g;
    const double acc_z = g_counts * std::cos(att.pitch_rad);
    const double acc_y = g_counts * std::sin(att.pitch_rad);
    const double acc_x = acc_z * std::tan(att.roll_rad);

    SensedTick out{};
    out.imu.t_s = t_s;
    const double zero = cal.acc_zero_counts();
    const std::array<double, 3> acc{acc_x, acc_y, acc_z};
    for (int axis = 0; axis < 3; ++axis) {
      out.imu.acc_adc[axis] =
          std::clamp(zero + acc[axis] + rng.normal(noise.acc_sigma_counts),
                     0.0, cal.adc_full_scale_counts);
    }
    const std::array<double, 3> rates{gyro_roll_rate_deg_s,
                                      gyro_pitch_rate_deg_s, 0.0};
    for (int axis = 0; axis < 3; ++axis) {
      const double counts =
          cal.gyro_zero_counts[axis] +
          cal.gyro_sensitivity_counts_per_deg_s *
              (rates[axis] + noise.gyro_bias_deg_s[axis]) +
          rng.normal(noise.gyro_sigma_counts);
      out.imu.gyro_adc[axis] =
          std::clamp(counts, 0.0, cal.adc_full_scale_counts);
    }
    for (int i = 0; i < 4; ++i) {
      out.pot_readings[i] = std::clamp(
          state_.actuators[i].pot_reading + rng.normal(noise.pot_sigma), 0.0,
          1.0);
    }
    out.ultrasonic_clearance_m =
        state_.clearance_m + rng.normal(noise.ultrasonic_sigma_m);
    return out;
  }

  void set_targets(const std::array<double, 4>& target_extensions_m) {
    for (int i = 0; i < 4; ++i) {
      state_.actuators[i].target_m = target_extensions_m[i];
    }
  }

  // Advance one tick: actuators slew toward their targets, the rover moves
  // along the motion script, and the true pose geometry is recomputed.
  void step(double dt_s) {
    prev_attitude_ = state_.attitude;
    inv_dt_ = 1.0 / dt_s;
    for (auto& a : state_.actuators) {
      a = step_actuator(a, dt_s);
    }
    advance_motion(dt_s);
    refresh_geometry();
  }

 private:
  void refresh_geometry() {
    const auto heights = corner_heights();
    state_.attitude = chassis_attitude_from_heights(heights, layout_);
    const double mean =
        0.25 * (heights[0] + heights[1] + heights[2] + heights[3]);
    state_.clearance_m =
        mean - terrain_.height_at(state_.pose.x_m, state_.pose.y_m);
  }

  void aim_at_next_waypoint() {
    if (next_waypoint_ >= motion_.waypoints.size()) return;
    const auto& wp = motion_.waypoints[next_waypoint_];
    const double dx = wp.x_m - state_.pose.x_m;
    const double dy = wp.y_m - state_.pose.y_m;
    if (dx != 0.0 || dy != 0.0) {
      state_.pose.heading_rad = std::atan2(dy, dx);
    }
  }

  void advance_motion(double dt_s) {
    if (motion_.speed_m_s <= 0.0) return;
    double budget = motion_.speed_m_s * dt_s;
    while (budget > 0.0 && next_waypoint_ < motion_.waypoints.size()) {
      const auto& wp = motion_.waypoints[next_waypoint_];
      const double dx = wp.x_m - state_.pose.x_m;
      const double dy = wp.y_m - state_.pose.y_m;
      const double dist = std::hypot(dx, dy);
      if (dist <= budget) {
        state_.pose.x_m = wp.x_m;
        state_.pose.y_m = wp.y_m;
        budget -= dist;
        ++next_waypoint_;
        aim_at_next_waypoint();
      } else {
        state_.pose.x_m += dx / dist * budget;
        state_.pose.y_m += dy / dist * budget;
        budget = 0.0;
      }
    }
  }

  Terrain terrain_;
  ChassisLayout layout_;
  std::vector<SuspensionGeometry> geoms_;
  MotionScript motion_;
  RoverState state_;
  Attitude prev_attitude_;
  double inv_dt_ = 0.0;
  std::size_t next_waypoint_ = 1;
};

}  // namespace levelsim
