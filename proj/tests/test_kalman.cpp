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

#include "levelsim/kalman.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"

using namespace levelsim;

namespace {

KalmanState make_state(double angle, double bias, const Mat2& p, const Mat2& q,
                       double r) {
  KalmanState s;
  s.x = {angle, bias};
  s.p = p;
  s.q = q;
  s.r = r;
  return s;
}

Mat2 random_psd(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
  // A A^T + eps I is symmetric positive definite.
  return {scale * (a * a + b * b) + 1e-6, scale * (a * c + b * d),
          scale * (a * c + b * d), scale * (c * c + d * d) + 1e-6};
}

}  // namespace

// ---------------------------------------------------------------------------
// Predict
// ---------------------------------------------------------------------------

TEST(KalmanPredict, NullDynamicsFixedPoint) {
  const KalmanState s =
      make_state(0.0, 0.0, {0, 0, 0, 0}, {0, 0, 0, 0}, 0.03);
  const KalmanState next = kalman_predict(s, 0.0, 0.1);
  EXPECT_DOUBLE_EQ(0.0, next.x[0]);
  EXPECT_DOUBLE_EQ(0.0, next.x[1]);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(0.0, next.p[i]);
}

TEST(KalmanPredict, BiasIsSubtractedFromRate) {
  const KalmanState s =
      make_state(0.0, 0.1, {0, 0, 0, 0}, {0, 0, 0, 0}, 0.03);
  const KalmanState next = kalman_predict(s, 0.5, 0.1);
  EXPECT_NEAR(0.04, next.x[0], 1e-15);  // (0.5 - 0.1) * 0.1
  EXPECT_DOUBLE_EQ(0.1, next.x[1]);
}

TEST(KalmanPredict, MatchesMatrixArithmetic) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Mat2 p = random_psd(rng, 0.5);
    const Mat2 q = random_psd(rng, 1e-3);
    const KalmanState s = make_state(u(rng), u(rng), p, q, 0.03);
    const double rate = u(rng);
    const double dt = 0.07;
    const KalmanState next = kalman_predict(s, rate, dt);

    Eigen::Matrix2d f;
    f << 1.0, -dt, 0.0, 1.0;
    Eigen::Vector2d x(s.x[0], s.x[1]);
    Eigen::Matrix2d pp;
    pp << p[0], p[1], p[2], p[3];
    Eigen::Matrix2d qq;
    qq << q[0], q[1], q[2], q[3];
    const Eigen::Vector2d xe = f * x + Eigen::Vector2d(dt, 0.0) * rate;
    const Eigen::Matrix2d pe = f * pp * f.transpose() + qq;
    EXPECT_NEAR(xe(0), next.x[0], 1e-14);
    EXPECT_NEAR(xe(1), next.x[1], 1e-14);
    EXPECT_NEAR(pe(0, 0), next.p[0], 1e-14);
    EXPECT_NEAR(pe(0, 1), next.p[1], 1e-14);
    EXPECT_NEAR(pe(1, 1), next.p[3], 1e-14);
  }
}

TEST(KalmanPredict, NonPositiveDtRejected) {
  const KalmanState s;
  EXPECT_THROW(kalman_predict(s, 0.0, 0.0), std::domain_error);
}

// ---------------------------------------------------------------------------
// Update
// ---------------------------------------------------------------------------

TEST(KalmanUpdate, ZeroInnovationKeepsState) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const KalmanState s =
        make_state(u(rng), u(rng), random_psd(rng, 0.5), {0, 0, 0, 0}, 0.03);
    const KalmanState next = kalman_update(s, s.x[0]);
    EXPECT_DOUBLE_EQ(s.x[0], next.x[0]);
    EXPECT_DOUBLE_EQ(s.x[1], next.x[1]);
  }
}

TEST(KalmanUpdate, ZeroCovarianceIgnoresMeasurement) {
  const KalmanState s = make_state(0.2, -0.05, {0, 0, 0, 0}, {0, 0, 0, 0}, 0.03);
  const KalmanState next = kalman_update(s, 99.0);
  EXPECT_DOUBLE_EQ(0.2, next.x[0]);
  EXPECT_DOUBLE_EQ(-0.05, next.x[1]);
}

TEST(KalmanUpdate, NonPositiveMeasurementNoiseRejected) {
  KalmanState s;
  s.r = 0.0;
  EXPECT_THROW(kalman_update(s, 0.0), std::domain_error);
}

// ---------------------------------------------------------------------------
// Oracle comparisons
// ---------------------------------------------------------------------------

TEST(KalmanFilter, MatchesInformationFilterOnConstantAngleRun) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  const double dt = 0.02;
  const double truth = 0.15;

  KalmanState s = make_state(0.0, 0.0, {1, 0, 0, 1},
                             {1e-3 * dt, 0, 0, 3e-5 * dt}, 0.03);
  test::InformationFilter oracle({0.0, 0.0}, {1, 0, 0, 1});
  for (int k = 0; k < 100; ++k) {
    const double z = truth + noise(rng);
    s = kalman_update(kalman_predict(s, 0.0, dt), z);
    oracle.predict(0.0, dt, s.q);
    oracle.update(z, s.r);
    const test::Vec2 ox = oracle.state();
    EXPECT_NEAR(ox[0], s.x[0], 1e-9);
    EXPECT_NEAR(ox[1], s.x[1], 1e-9);
  }
  EXPECT_NEAR(truth, s.x[0], 0.02);
}

TEST(KalmanFilter, MatchesBatchLeastSquaresPosterior) {
  // Full-trajectory MAP estimate: prior + dynamics + measurement residuals
  // stacked into one normal-equation system. The filter posterior at the
  // final step must equal the batch estimate of the final state.
  std::mt19937 rng(123);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int steps = 50;
  const double dt = 0.05;

  for (int trial = 0; trial < 5; ++trial) {
    // Keep Q and P0 comfortably away from singular so the stacked normal
    // equations stay well conditioned at the 1e-9 comparison tolerance.
    const double qa = 2e-3 + 8e-3 * std::fabs(u(rng));
    const double qb = 2e-3 + 8e-3 * std::fabs(u(rng));
    const double qc = 0.3 * u(rng) * std::sqrt(qa * qb);
    const Mat2 q{qa, qc, qc, qb};
    const double r = 0.02 + 0.1 * std::fabs(u(rng));
    Mat2 p0 = random_psd(rng, 0.8);
    p0[0] += 0.05;
    p0[3] += 0.05;
    const test::Vec2 x0{0.3 * u(rng), 0.1 * u(rng)};

    KalmanState s = make_state(x0[0], x0[1], p0, q, r);
    std::vector<double> rates, measurements;
    for (int k = 0; k < steps; ++k) {
      rates.push_back(0.5 * u(rng));
      measurements.push_back(0.3 * u(rng));
      s = kalman_update(kalman_predict(s, rates.back(), dt), measurements.back());
    }

    const int n = 2 * (steps + 1);
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    Eigen::Matrix2d p0inv;
    p0inv << p0[0], p0[1], p0[2], p0[3];
    p0inv = p0inv.inverse().eval();
    big.block<2, 2>(0, 0) = p0inv;
    rhs.segment<2>(0) = p0inv * Eigen::Vector2d(x0[0], x0[1]);

    Eigen::Matrix2d f;
    f << 1.0, -dt, 0.0, 1.0;
    Eigen::Matrix2d qinv;
    qinv << q[0], q[1], q[2], q[3];
    qinv = qinv.inverse().eval();
    for (int k = 0; k < steps; ++k) {
      const int i = 2 * k;
      const Eigen::Vector2d bu(dt * rates[static_cast<std::size_t>(k)], 0.0);
      big.block<2, 2>(i, i) += f.transpose() * qinv * f;
      big.block<2, 2>(i, i + 2) -= f.transpose() * qinv;
      big.block<2, 2>(i + 2, i) -= qinv * f;
      big.block<2, 2>(i + 2, i + 2) += qinv;
      rhs.segment<2>(i) -= f.transpose() * qinv * bu;
      rhs.segment<2>(i + 2) += qinv * bu;
      // measurement z_k on state k+1
      big(i + 2, i + 2) += 1.0 / r;
      rhs(i + 2) += measurements[static_cast<std::size_t>(k)] / r;
    }

    const Eigen::VectorXd solution = big.ldlt().solve(rhs);
    EXPECT_NEAR(solution(n - 2), s.x[0], 1e-9);
    EXPECT_NEAR(solution(n - 1), s.x[1], 1e-9);

    const Eigen::MatrixXd cov = big.inverse();
    EXPECT_NEAR(cov(n - 2, n - 2), s.p[0], 1e-9);
    EXPECT_NEAR(cov(n - 2, n - 1), s.p[1], 1e-9);
    EXPECT_NEAR(cov(n - 1, n - 1), s.p[3], 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Covariance properties
// ---------------------------------------------------------------------------

TEST(KalmanCovariance, StaysPsdAcrossRandomSequences) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    KalmanState s = make_state(0.0, 0.0, random_psd(rng, 1.0),
                               random_psd(rng, 1e-4), 0.01 + std::fabs(u(rng)));
    for (int k = 0; k < 200; ++k) {
      s = kalman_predict(s, u(rng), 0.02);
      EXPECT_GE(min_eigenvalue_sym2(s.p), -1e-12);
      s = kalman_update(s, 0.2 * u(rng));
      EXPECT_GE(min_eigenvalue_sym2(s.p), -1e-12);
      EXPECT_DOUBLE_EQ(s.p[1], s.p[2]);
    }
  }
}

TEST(KalmanCovariance, TraceNonIncreasingWithoutProcessNoise) {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  KalmanState s = make_state(0.0, 0.0, {1, 0, 0, 1}, {0, 0, 0, 0}, 0.03);
  double prev_trace = s.p[0] + s.p[3];
  for (int k = 0; k < 500; ++k) {
    s = kalman_update(kalman_predict(s, 0.0, 0.02), 0.1 + noise(rng));
    const double trace = s.p[0] + s.p[3];
    EXPECT_LE(trace, prev_trace + 1e-12);
    prev_trace = trace;
  }
}

// ---------------------------------------------------------------------------
// Attitude filter stream behavior
// ---------------------------------------------------------------------------

namespace {

// Stream where the true attitude follows `pitch(t)` and the gyro reports its
// exact derivative plus an optional constant bias.
std::vector<ImuSample> synth_stream(const ImuCalibration& cal, int count,
                                    double dt, double pitch_rate_rad_s,
                                    double gyro_bias_deg_s) {
  std::vector<ImuSample> stream;
  const double zero = cal.acc_zero_counts();
  for (int k = 0; k < count; ++k) {
    const double t = k * dt;
    const double pitch = pitch_rate_rad_s * t;
    ImuSample s;
    s.t_s = t;
    s.acc_adc = {zero,
                 zero + cal.acc_counts_per_g * std::sin(pitch),
                 zero + cal.acc_counts_per_g * std::cos(pitch)};
    const double rate_deg = rad_to_deg(pitch_rate_rad_s) + gyro_bias_deg_s;
    s.gyro_adc = {cal.gyro_zero_counts[0],
                  cal.gyro_zero_counts[1] +
                      cal.gyro_sensitivity_counts_per_deg_s * rate_deg,
                  cal.gyro_zero_counts[2]};
    stream.push_back(s);
  }
  return stream;
}

}  // namespace

TEST(EstimateAttitude, LevelStreamStaysZero) {
  const ImuCalibration cal;
  const auto stream = synth_stream(cal, 200, 0.02, 0.0, 0.0);
  const auto out = estimate_attitude(stream, cal, AttitudeFilterParams{});
  ASSERT_EQ(stream.size(), out.size());
  for (const auto& att : out) {
    EXPECT_DOUBLE_EQ(0.0, att.pitch_rad);
    EXPECT_DOUBLE_EQ(0.0, att.roll_rad);
  }
}

TEST(EstimateAttitude, TracksRampWithAgreeingGyro) {
  // With an exact gyro feed-forward the innovation is zero and the filter
  // tracks the ramp with no lag at all.
  const ImuCalibration cal;
  const double rate = deg_to_rad(5.0);
  const auto stream = synth_stream(cal, 500, 0.02, rate, 0.0);
  const auto out = estimate_attitude(stream, cal, AttitudeFilterParams{});
  for (std::size_t k = 0; k < out.size(); ++k) {
    EXPECT_NEAR(rate * stream[k].t_s, out[k].pitch_rad, 1e-9);
  }
}

TEST(EstimateAttitude, BiasStateConvergesToInjectedBias) {
  const ImuCalibration cal;
  const double bias_deg_s = 2.0;
  const int count = 1500;  // 30 s at 50 Hz
  const auto stream = synth_stream(cal, count, 0.02, 0.0, bias_deg_s);
  AttitudeFilter filter(cal, AttitudeFilterParams{});
  for (const auto& s : stream) filter.step(s);
  EXPECT_NEAR(deg_to_rad(bias_deg_s), filter.pitch_bias_rad_s(),
              0.05 * deg_to_rad(bias_deg_s));
}

TEST(EstimateAttitude, DeterministicOnIdenticalStreams) {
  const ImuCalibration cal;
  const auto stream = synth_stream(cal, 300, 0.02, deg_to_rad(3.0), 0.7);
  const auto a = estimate_attitude(stream, cal, AttitudeFilterParams{});
  const auto b = estimate_attitude(stream, cal, AttitudeFilterParams{});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pitch_rad, b[i].pitch_rad);
    EXPECT_EQ(a[i].roll_rad, b[i].roll_rad);
  }
}

TEST(EstimateAttitude, RejectsNonIncreasingTimestamps) {
  const ImuCalibration cal;
  auto stream = synth_stream(cal, 3, 0.02, 0.0, 0.0);
  stream[2].t_s = stream[1].t_s;
  AttitudeFilter filter(cal, AttitudeFilterParams{});
  filter.step(stream[0]);
  filter.step(stream[1]);
  EXPECT_THROW(filter.step(stream[2]), std::domain_error);
}
