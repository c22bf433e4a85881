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

// Raw ADC-level IMU samples and their conversion to physical rates and
// angles. The accelerometer tilt angles are computed in a "raw" convention
// where a level chassis reads pi on both axes (atan2 of the gravity
// components plus pi); the "zero level" convention shifts that so level
// reads (0, 0). All internal arithmetic is in radians; the gyro ADC path
// produces degrees per second and is converted once at the boundary.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "levelsim/kinematics.hpp"

namespace levelsim {

enum Axis { kAxisX = 0, kAxisY = 1, kAxisZ = 2 };

enum class AttitudeConvention { kRawPiLevel, kZeroLevel };

// Pitch/roll pair with an explicit convention tag.
//   kRawPiLevel: angles in [0, 2*pi), level chassis reads (pi, pi).
//   kZeroLevel:  angles in (-pi, pi], level chassis reads (0, 0).
struct Attitude {
  double pitch_rad = 0.0;
  double roll_rad = 0.0;
  AttitudeConvention convention = AttitudeConvention::kZeroLevel;
};

namespace detail {

inline double wrap_raw(double angle) {
  // into [0, 2*pi)
  double a = std::fmod(angle, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  if (a >= 2.0 * kPi) a = 0.0;
  return a;
}

inline double wrap_zero(double angle) {
  // into (-pi, pi]
  double a = std::fmod(angle, 2.0 * kPi);
  if (a > kPi) a -= 2.0 * kPi;
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace detail

inline Attitude to_zero_level(const Attitude& att) {
  if (att.convention == AttitudeConvention::kZeroLevel) return att;
  return {detail::wrap_zero(att.pitch_rad - kPi),
          detail::wrap_zero(att.roll_rad - kPi),
          AttitudeConvention::kZeroLevel};
}

inline Attitude to_raw_pi_level(const Attitude& att) {
  if (att.convention == AttitudeConvention::kRawPiLevel) return att;
  return {detail::wrap_raw(att.pitch_rad + kPi),
          detail::wrap_raw(att.roll_rad + kPi),
          AttitudeConvention::kRawPiLevel};
}

// ADC-level calibration of the IMU. The accelerometer zero-g level is given
// as a voltage and translated to counts through the ADC reference and full
// scale; gyro zeros are per-axis counts.
struct ImuCalibration {
  std::array<double, 3> gyro_zero_counts{512.0, 512.0, 512.0};
  double gyro_sensitivity_counts_per_deg_s = 14.375;
  double acc_zero_g_voltage_v = 1.5;
  double adc_ref_voltage_v = 3.3;
  double adc_full_scale_counts = 1023.0;
  double acc_counts_per_g = 93.0;

  double acc_zero_counts() const {
    return acc_zero_g_voltage_v / adc_ref_voltage_v * adc_full_scale_counts;
  }

  void validate() const {
    if (!(gyro_sensitivity_counts_per_deg_s > 0.0) ||
        !(adc_ref_voltage_v > 0.0) || !(adc_full_scale_counts > 0.0) ||
        !(acc_counts_per_g > 0.0) || !(acc_zero_g_voltage_v > 0.0)) {
      throw std::invalid_argument("ImuCalibration: parameters must be positive");
    }
  }
};

// One raw IMU reading: timestamp plus accelerometer and gyro ADC counts for
// the three axes.
struct ImuSample {
  double t_s = 0.0;
  std::array<double, 3> acc_adc{};
  std::array<double, 3> gyro_adc{};
};

// Gyro counts to angular rate in degrees per second.
inline double gyro_rate_deg_s(double counts, double zero_counts,
                              double sensitivity_counts_per_deg_s) {
  return (counts - zero_counts) / sensitivity_counts_per_deg_s;
}

inline double gyro_rate_deg_s(const ImuSample& sample, Axis axis,
                              const ImuCalibration& cal) {
  return gyro_rate_deg_s(sample.gyro_adc[axis], cal.gyro_zero_counts[axis],
                         cal.gyro_sensitivity_counts_per_deg_s);
}

// One Euler step of the gyro angle, rate in deg/s, result in radians.
inline double integrate_gyro(double prev_angle_rad, double rate_deg_s,
                             double dt_s) {
  if (!(dt_s > 0.0)) {
    throw std::domain_error("integrate_gyro: dt must be positive");
  }
  return prev_angle_rad + deg_to_rad(rate_deg_s) * dt_s;
}

// Tilt from the accelerometer alone, raw convention:
//   pitch = atan2(accYval, accZval) + pi
//   roll  = atan2(accXval, accZval) + pi
// with accVal = accAdc - accZero. atan2 is scale invariant, so counts are
// used directly without converting to g.
inline Attitude accel_attitude(const ImuSample& sample,
                               const ImuCalibration& cal) {
  const double zero = cal.acc_zero_counts();
  const double ax = sample.acc_adc[kAxisX] - zero;
  const double ay = sample.acc_adc[kAxisY] - zero;
  const double az = sample.acc_adc[kAxisZ] - zero;
  if ((ay == 0.0 && az == 0.0) || (ax == 0.0 && az == 0.0)) {
    throw std::domain_error(
        "accel_attitude: indeterminate attitude, both atan2 arguments zero");
  }
  return {detail::wrap_raw(std::atan2(ay, az) + kPi),
          detail::wrap_raw(std::atan2(ax, az) + kPi),
          AttitudeConvention::kRawPiLevel};
}

}  // namespace levelsim
