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

#include "levelsim/simulation.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace levelsim;

namespace {

Scenario base_scenario() {
  Scenario s;
  s.duration_s = 20.0;
  s.tick_dt_s = 0.02;
  s.seed = 1;
  s.corner_geometry.assign(4, default_corner_geometry());
  s.controller.corner_geometry = s.corner_geometry;
  s.controller.layout = s.layout;
  s.controller.tick_dt_s = s.tick_dt_s;
  return s;
}

Scenario ramp_scenario(double grade_deg) {
  Scenario s = base_scenario();
  s.duration_s = 40.0;
  s.terrain = Terrain({TerrainPrimitive::ramp(grade_deg, 0.0)});
  s.motion.speed_m_s = 0.5;
  s.motion.waypoints = {{0.0, 0.0}, {2.0, 0.0}};
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

TEST(ParseScenario, DefaultsFillMissingSections) {
  const Scenario s = parse_scenario_text("{}");
  EXPECT_DOUBLE_EQ(40.0, s.duration_s);
  EXPECT_DOUBLE_EQ(0.02, s.tick_dt_s);
  EXPECT_EQ(4u, s.corner_geometry.size());
  EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(ParseScenario, ReadsFullConfig) {
  const Scenario s = parse_scenario_text(R"({
    "duration_s": 12.5,
    "tick_dt_s": 0.01,
    "seed": 99,
    "terrain": [{"type": "ramp", "grade_deg": 10.0, "azimuth_deg": 0.0},
                {"type": "flat", "height_m": 0.05}],
    "layout": {"wheelbase_m": 0.7, "track_m": 0.55},
    "geometry": {"a_m": 0.10, "stroke_m": 0.1016, "c_m": 0.18,
                 "l1_m": 0.08, "l2_m": 0.13, "wheel_radius_m": 0.10},
    "actuator": {"no_load_speed_m_s": 0.03, "max_load_n": 900.0, "load_n": 200.0},
    "initial": {"h_prime_m": [0.05, 0.05, 0.06, 0.06]},
    "controller": {"roll_deadband_rad": 0.02, "inner_gain_per_s": 4.0,
                   "correction_mode": "single_pair",
                   "clearance_setpoint_m": 0.155},
    "imu": {"gyro_zero_counts": [500, 501, 502],
            "kalman": {"r_measure_rad2": 0.05}},
    "noise": {"acc_sigma_counts": 2.5, "gyro_bias_deg_s": [0.1, -0.1, 0.0]},
    "motion": {"speed_m_s": 0.4, "waypoints": [{"x_m": 0, "y_m": 0},
                                               {"x_m": 3, "y_m": 1}]}
  })");
  EXPECT_DOUBLE_EQ(12.5, s.duration_s);
  EXPECT_EQ(99u, s.seed);
  EXPECT_EQ(2u, s.terrain.parts().size());
  EXPECT_DOUBLE_EQ(0.7, s.layout.wheelbase_m);
  EXPECT_DOUBLE_EQ(0.05, s.initial.h_prime_m[0]);
  EXPECT_DOUBLE_EQ(0.06, s.initial.h_prime_m[3]);
  EXPECT_EQ(CorrectionMode::kSinglePair, s.controller.mode);
  EXPECT_DOUBLE_EQ(0.02, s.controller.roll_deadband_rad);
  EXPECT_DOUBLE_EQ(501.0, s.imu_cal.gyro_zero_counts[1]);
  EXPECT_DOUBLE_EQ(0.05, s.filter_params.r_measure_rad2);
  EXPECT_DOUBLE_EQ(2.5, s.noise.acc_sigma_counts);
  EXPECT_EQ(2u, s.motion.waypoints.size());
  // Controller inherits the loop geometry.
  EXPECT_DOUBLE_EQ(0.01, s.controller.tick_dt_s);
  EXPECT_DOUBLE_EQ(0.7, s.controller.layout.wheelbase_m);
}

TEST(ParseScenario, UnknownKeyNamesItsPath) {
  try {
    parse_scenario_text(R"({"controller": {"roll_deadband": 0.02}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& err) {
    EXPECT_EQ("/controller/roll_deadband", err.path());
  }
}

TEST(ParseScenario, BadTerrainTypeNamesItsPath) {
  try {
    parse_scenario_text(R"({"terrain": [{"type": "volcano"}]})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& err) {
    EXPECT_EQ("/terrain/0/type", err.path());
  }
}

TEST(ParseScenario, InvalidJsonRejected) {
  EXPECT_THROW(parse_scenario_text("{"), ConfigError);
}

// ---------------------------------------------------------------------------
// Validation findings
// ---------------------------------------------------------------------------

TEST(ValidateScenario, DefaultScenarioIsClean) {
  EXPECT_TRUE(validate_scenario(base_scenario()).empty());
}

TEST(ValidateScenario, UnreachableClearanceSetPointIsAnError) {
  Scenario s = base_scenario();
  s.controller.clearance_setpoint_m = 0.5;  // far beyond l2 travel
  const auto findings = validate_scenario(s);
  ASSERT_TRUE(has_errors(findings));
  bool named = false;
  for (const auto& f : findings) {
    if (f.path == "/controller/clearance_setpoint_m") named = true;
  }
  EXPECT_TRUE(named);
}

TEST(ValidateScenario, InitialHeightOutsideReachIsAnError) {
  Scenario s = base_scenario();
  s.initial.h_prime_m.fill(0.2);  // beyond 0.95 * l2
  EXPECT_TRUE(has_errors(validate_scenario(s)));
}

TEST(ValidateScenario, SteepRampIsASaturationWarningNotAnError) {
  Scenario s = ramp_scenario(45.0);
  const auto findings = validate_scenario(s);
  EXPECT_FALSE(has_errors(findings));
  bool warned = false;
  for (const auto& f : findings) {
    if (f.severity == Finding::Severity::kWarning &&
        f.message.find("saturate") != std::string::npos) {
      warned = true;
    }
  }
  EXPECT_TRUE(warned);
}

TEST(ValidateScenario, TickBudgetGuard) {
  Scenario s = base_scenario();
  s.duration_s = 1e6;
  s.tick_dt_s = 1e-3;
  EXPECT_TRUE(has_errors(validate_scenario(s)));
}

TEST(RunScenario, ErrorFindingsBlockTheRun) {
  Scenario s = base_scenario();
  s.initial.h_prime_m.fill(0.2);
  EXPECT_THROW(run_scenario(s), ConfigError);
}

// ---------------------------------------------------------------------------
// Closed-loop runs
// ---------------------------------------------------------------------------

TEST(RunScenario, FlatLevelStartStaysIdle) {
  const RunResult result = run_scenario(base_scenario());
  ASSERT_EQ(1000, result.summary.tick_count);
  for (const auto& rec : result.telemetry) {
    EXPECT_DOUBLE_EQ(0.0, rec.true_pitch_rad);
    EXPECT_DOUBLE_EQ(0.0, rec.true_roll_rad);
    EXPECT_EQ(ControlPhase::kIdle, rec.phase);
  }
  EXPECT_DOUBLE_EQ(0.0, result.summary.max_abs_true_pitch_rad);
  EXPECT_DOUBLE_EQ(0.0, result.summary.settle_time_s);
}

TEST(RunScenario, TenDegreeRampSettlesIntoDeadband) {
  const RunResult result = run_scenario(ramp_scenario(10.0));
  EXPECT_GE(result.summary.settle_time_s, 0.0);
  EXPECT_LE(result.summary.settle_time_s, 30.0);
  EXPECT_LT(std::fabs(result.telemetry.back().true_pitch_rad),
            deg_to_rad(1.0));
  EXPECT_LT(std::fabs(result.telemetry.back().true_roll_rad),
            deg_to_rad(1.0));
}

TEST(RunScenario, LookupTableModeAlsoSettles) {
  Scenario s = ramp_scenario(10.0);
  s.controller.build_extension_tables();
  const RunResult result = run_scenario(s);
  EXPECT_GE(result.summary.settle_time_s, 0.0);
  EXPECT_LE(result.summary.settle_time_s, 30.0);
  EXPECT_LT(std::fabs(result.telemetry.back().true_pitch_rad),
            deg_to_rad(1.0));
}

TEST(RunScenario, SeedChangesNoisyTelemetry) {
  Scenario s = ramp_scenario(10.0);
  s.noise.acc_sigma_counts = 4.0;
  const RunResult a = run_scenario(s);
  const RunResult b = run_scenario(s, 123456u);
  ASSERT_EQ(a.telemetry.size(), b.telemetry.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.telemetry.size() && !differs; ++i) {
    differs = a.telemetry[i].est_pitch_rad != b.telemetry[i].est_pitch_rad;
  }
  EXPECT_TRUE(differs);
}

// ---------------------------------------------------------------------------
// Telemetry CSV
// ---------------------------------------------------------------------------

TEST(TelemetryCsv, GoldenHeader) {
  EXPECT_STREQ(
      "t,true_pitch,true_roll,est_pitch,est_roll,clearance,"
      "b1,b2,b3,b4,pot1,pot2,pot3,pot4,phase,sat1,sat2,sat3,sat4",
      telemetry_csv_header());
}

TEST(TelemetryCsv, RoundTripsExactly) {
  Scenario s = ramp_scenario(10.0);
  s.duration_s = 5.0;
  s.noise.acc_sigma_counts = 4.0;
  s.noise.pot_sigma = 0.002;
  const RunResult result = run_scenario(s);

  std::ostringstream out;
  write_telemetry_csv(out, result.telemetry);
  std::istringstream in(out.str());
  const auto parsed = parse_telemetry_csv(in);

  ASSERT_EQ(result.telemetry.size(), parsed.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    EXPECT_EQ(result.telemetry[i].t_s, parsed[i].t_s);
    EXPECT_EQ(result.telemetry[i].true_pitch_rad, parsed[i].true_pitch_rad);
    EXPECT_EQ(result.telemetry[i].est_pitch_rad, parsed[i].est_pitch_rad);
    EXPECT_EQ(result.telemetry[i].clearance_m, parsed[i].clearance_m);
    EXPECT_EQ(result.telemetry[i].extension_m, parsed[i].extension_m);
    EXPECT_EQ(result.telemetry[i].pot, parsed[i].pot);
    EXPECT_EQ(result.telemetry[i].phase, parsed[i].phase);
    EXPECT_EQ(result.telemetry[i].saturated, parsed[i].saturated);
  }
}

TEST(TelemetryCsv, SummaryRecomputedFromCsvMatchesExactly) {
  Scenario s = ramp_scenario(10.0);
  s.noise.acc_sigma_counts = 4.0;
  s.noise.gyro_sigma_counts = 3.0;
  const RunResult result = run_scenario(s);

  std::ostringstream out;
  write_telemetry_csv(out, result.telemetry);
  std::istringstream in(out.str());
  const SummaryReport recomputed =
      summarize(parse_telemetry_csv(in), s.controller.pitch_deadband_rad,
                s.controller.roll_deadband_rad);
  EXPECT_EQ(result.summary, recomputed);
}

TEST(TelemetryCsv, RejectsWrongHeader) {
  std::istringstream in("t,nope\n0,1\n");
  EXPECT_THROW(parse_telemetry_csv(in), std::invalid_argument);
}

TEST(SummaryReport, SettleTimeNegativeWhenNeverSettled) {
  const RunResult result = run_scenario(ramp_scenario(20.0));
  EXPECT_DOUBLE_EQ(-1.0, result.summary.settle_time_s);
  EXPECT_GT(result.summary.saturated_tick_count, 0);
}

TEST(SummaryReport, JsonSerializationContainsKeyFields) {
  const RunResult result = run_scenario(base_scenario());
  const std::string json = summary_to_json(result.summary);
  EXPECT_NE(json.find("\"settle_time_s\""), std::string::npos);
  EXPECT_NE(json.find("\"saturated_tick_count\""), std::string::npos);
  EXPECT_NO_THROW(nlohmann::json::parse(json));
}
