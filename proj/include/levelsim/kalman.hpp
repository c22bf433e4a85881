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

// Per-axis gyro/accelerometer fusion. Each axis runs an independent
// two-state Kalman filter with state [angle, gyro_bias]:
//
//   predict: x <- F x + B u,  F = [[1, -dt], [0, 1]],  B = [dt, 0]^T
//            P <- F P F^T + Q
//   update:  y = z - H x,  S = H P H^T + r,  K = P H^T / S
//            x <- x + K y,  P <- (I - K H) P
//
// with u the gyro rate (rad/s) and z the accelerometer tilt angle (rad),
// H = [1, 0]. P is re-symmetrized after every step to stop floating-point
// drift, since the simple covariance update is not Joseph-stabilized.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "levelsim/attitude.hpp"

namespace levelsim {

// Row-major symmetric 2x2 matrix helpers.
using Mat2 = std::array<double, 4>;

inline double min_eigenvalue_sym2(const Mat2& m) {
  const double tr = m[0] + m[3];
  const double det = m[0] * m[3] - m[1] * m[2];
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return 0.5 * (tr - disc);
}

// State of one scalar-measurement angle/bias filter.
struct KalmanState {
  std::array<double, 2> x{0.0, 0.0};  // [angle_rad, gyro_bias_rad_s]
  Mat2 p{1.0, 0.0, 0.0, 1.0};
  Mat2 q{0.0, 0.0, 0.0, 0.0};  // per-step process noise
  double r = 0.03;             // measurement noise variance (rad^2)
};

inline KalmanState kalman_predict(const KalmanState& state,
                                  double gyro_rate_rad_s, double dt_s) {
  if (!(dt_s > 0.0)) {
    throw std::domain_error("kalman_predict: dt must be positive");
  }
  KalmanState next = state;
  next.x[0] = state.x[0] - dt_s * state.x[1] + dt_s * gyro_rate_rad_s;
  next.x[1] = state.x[1];

  // P <- F P F^T + Q with F = [[1, -dt], [0, 1]].
  const double p00 = state.p[0], p01 = state.p[1];
  const double p10 = state.p[2], p11 = state.p[3];
  const double a00 = p00 - dt_s * p10;
  const double a01 = p01 - dt_s * p11;
  next.p[0] = a00 - dt_s * a01 + state.q[0];
  next.p[1] = a01 + state.q[1];
  next.p[2] = p10 - dt_s * p11 + state.q[2];
  next.p[3] = p11 + state.q[3];
  const double sym = 0.5 * (next.p[1] + next.p[2]);
  next.p[1] = sym;
  next.p[2] = sym;
  return next;
}

inline KalmanState kalman_update(const KalmanState& state, double z_rad) {
  if (!(state.r > 0.0)) {
    throw std::domain_error("kalman_update: measurement noise must be > 0");
  }
  const double innovation = z_rad - state.x[0];
  const double s = state.p[0] + state.r;
  if (!(s > 0.0)) {
    throw std::runtime_error("kalman_update: innovation covariance not positive");
  }
  const double k0 = state.p[0] / s;
  const double k1 = state.p[2] / s;

  KalmanState next = state;
  next.x[0] = state.x[0] + k0 * innovation;
  next.x[1] = state.x[1] + k1 * innovation;
  // P <- (I - K H) P
  next.p[0] = (1.0 - k0) * state.p[0];
  next.p[1] = (1.0 - k0) * state.p[1];
  next.p[2] = state.p[2] - k1 * state.p[0];
  next.p[3] = state.p[3] - k1 * state.p[1];
  const double sym = 0.5 * (next.p[1] + next.p[2]);
  next.p[1] = sym;
  next.p[2] = sym;
  return next;
}

// Noise configuration for the attitude filter. Process noise is specified
// per second and scaled by dt each step.
struct AttitudeFilterParams {
  double q_angle_rad2_per_s = 1e-3;
  double q_bias_rad2_per_s = 3e-5;
  double r_measure_rad2 = 0.03;
  double p0_angle_rad2 = 1.0;
  double p0_bias_rad2 = 1.0;
};

// Two independent angle/bias filters: the pitch axis is fed by the
// accelerometer Y/Z tilt and the Y gyro, the roll axis by the X/Z tilt and
// the X gyro. The first sample initializes the angle states from the
// accelerometer; later samples run predict (gyro) + update (accelerometer).
class AttitudeFilter {
 public:
  AttitudeFilter(const ImuCalibration& cal, const AttitudeFilterParams& params)
      : cal_(cal), params_(params) {
    cal_.validate();
    pitch_.r = params.r_measure_rad2;
    roll_.r = params.r_measure_rad2;
    pitch_.p = {params.p0_angle_rad2, 0.0, 0.0, params.p0_bias_rad2};
    roll_.p = pitch_.p;
  }

  Attitude step(const ImuSample& sample) {
    const Attitude meas = to_zero_level(accel_attitude(sample, cal_));
    if (!initialized_) {
      pitch_.x = {meas.pitch_rad, 0.0};
      roll_.x = {meas.roll_rad, 0.0};
      initialized_ = true;
    } else {
      const double dt = sample.t_s - prev_t_s_;
      if (!(dt > 0.0)) {
        throw std::domain_error("AttitudeFilter: timestamps must increase");
      }
      const Mat2 q{params_.q_angle_rad2_per_s * dt, 0.0, 0.0,
                   params_.q_bias_rad2_per_s * dt};
      pitch_.q = q;
      roll_.q = q;
      const double pitch_rate =
          deg_to_rad(gyro_rate_deg_s(sample, kAxisY, cal_));
      const double roll_rate =
          deg_to_rad(gyro_rate_deg_s(sample, kAxisX, cal_));
      pitch_ = kalman_update(kalman_predict(pitch_, pitch_rate, dt),
                             meas.pitch_rad);
      roll_ = kalman_update(kalman_predict(roll_, roll_rate, dt),
                            meas.roll_rad);
    }
    prev_t_s_ = sample.t_s;
    return attitude();
  }

  Attitude attitude() const {
    return {pitch_.x[0], roll_.x[0], AttitudeConvention::kZeroLevel};
  }

  double pitch_bias_rad_s() const { return pitch_.x[1]; }
  double roll_bias_rad_s() const { return roll_.x[1]; }
  const KalmanState& pitch_state() const { return pitch_; }
  const KalmanState& roll_state() const { return roll_; }

 private:
  ImuCalibration cal_;
  AttitudeFilterParams params_;
  KalmanState pitch_;
  KalmanState roll_;
  bool initialized_ = false;
  double prev_t_s_ = 0.0;
};

// Batch convenience: filter a time-ordered sample stream, one zero-level
// attitude per sample.
inline std::vector<Attitude> estimate_attitude(
    const std::vector<ImuSample>& stream, const ImuCalibration& cal,
    const AttitudeFilterParams& params) {
  AttitudeFilter filter(cal, params);
  std::vector<Attitude> out;
  out.reserve(stream.size());
  for (const auto& sample : stream) {
    out.push_back(filter.step(sample));
  }
  return out;
}

}  // namespace levelsim
