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

// Closed-loop scenario execution: plant -> sensors -> estimator ->
// controller -> actuators, one telemetry record per tick. Runs are fully
// deterministic in (scenario, seed); telemetry CSV is emitted with
// round-trippable 17-significant-digit floats so summaries recomputed from
// the file match the in-run summary bit for bit.

#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "levelsim/controller.hpp"
#include "levelsim/csv.hpp"
#include "levelsim/kalman.hpp"
#include "levelsim/plant.hpp"
#include "levelsim/scenario.hpp"

namespace levelsim {

struct TelemetryRecord {
  double t_s = 0.0;
  double true_pitch_rad = 0.0;
  double true_roll_rad = 0.0;
  double est_pitch_rad = 0.0;
  double est_roll_rad = 0.0;
  double clearance_m = 0.0;
  std::array<double, 4> extension_m{};
  std::array<double, 4> pot{};
  ControlPhase phase = ControlPhase::kIdle;
  std::array<bool, 4> saturated{};
};

inline ControlPhase phase_from_string(const std::string& name) {
  if (name == "IDLE") return ControlPhase::kIdle;
  if (name == "CORRECT_ROLL") return ControlPhase::kCorrectRoll;
  if (name == "CORRECT_PITCH") return ControlPhase::kCorrectPitch;
  if (name == "CORRECT_CLEARANCE") return ControlPhase::kCorrectClearance;
  throw std::invalid_argument("unknown control phase '" + name + "'");
}

inline const char* telemetry_csv_header() {
  return "t,true_pitch,true_roll,est_pitch,est_roll,clearance,"
         "b1,b2,b3,b4,pot1,pot2,pot3,pot4,phase,sat1,sat2,sat3,sat4";
}

inline void write_telemetry_csv(std::ostream& out,
                                const std::vector<TelemetryRecord>& records) {
  out << telemetry_csv_header() << "\n";
  for (const auto& r : records) {
    out << format_double(r.t_s) << ',' << format_double(r.true_pitch_rad)
        << ',' << format_double(r.true_roll_rad) << ','
        << format_double(r.est_pitch_rad) << ','
        << format_double(r.est_roll_rad) << ',' << format_double(r.clearance_m);
    for (double b : r.extension_m) out << ',' << format_double(b);
    for (double p : r.pot) out << ',' << format_double(p);
    out << ',' << to_string(r.phase);
    for (bool sat : r.saturated) out << ',' << (sat ? '1' : '0');
    out << '\n';
  }
}

inline std::vector<TelemetryRecord> parse_telemetry_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  const std::string expected = telemetry_csv_header();
  std::string got;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) got += ',';
    got += table.header[i];
  }
  if (got != expected) {
    throw std::invalid_argument("telemetry csv: unexpected header '" + got + "'");
  }
  std::vector<TelemetryRecord> records;
  records.reserve(table.rows.size());
  for (const auto& f : table.rows) {
    if (f.size() != 19) {
      throw std::invalid_argument("telemetry csv: expected 19 fields per row");
    }
    TelemetryRecord r;
    r.t_s = parse_double(f[0]);
    r.true_pitch_rad = parse_double(f[1]);
    r.true_roll_rad = parse_double(f[2]);
    r.est_pitch_rad = parse_double(f[3]);
    r.est_roll_rad = parse_double(f[4]);
    r.clearance_m = parse_double(f[5]);
    for (int i = 0; i < 4; ++i) r.extension_m[i] = parse_double(f[6 + i]);
    for (int i = 0; i < 4; ++i) r.pot[i] = parse_double(f[10 + i]);
    r.phase = phase_from_string(f[14]);
    for (int i = 0; i < 4; ++i) r.saturated[i] = f[15 + i] == "1";
    records.push_back(r);
  }
  return records;
}

// Run statistics. Derived exclusively from telemetry records so that an
// independent pass over the emitted CSV reproduces it exactly.
struct SummaryReport {
  long tick_count = 0;
  double duration_s = 0.0;
  double settle_time_s = -1.0;  // -1: never settled into both deadbands
  double max_abs_true_pitch_rad = 0.0;
  double max_abs_true_roll_rad = 0.0;
  double mean_abs_true_pitch_tail_rad = 0.0;
  double mean_abs_true_roll_tail_rad = 0.0;
  double tail_window_s = 10.0;
  double max_abs_est_pitch_err_rad = 0.0;
  double max_abs_est_roll_err_rad = 0.0;
  long saturated_tick_count = 0;
  std::array<long, 4> phase_ticks{};  // IDLE, ROLL, PITCH, CLEARANCE
  double final_clearance_m = 0.0;

  bool operator==(const SummaryReport&) const = default;
};

inline SummaryReport summarize(const std::vector<TelemetryRecord>& records,
                               double pitch_deadband_rad,
                               double roll_deadband_rad,
                               double tail_window_s = 10.0) {
  SummaryReport s;
  s.tick_count = static_cast<long>(records.size());
  s.tail_window_s = tail_window_s;
  if (records.empty()) return s;
  s.duration_s = records.back().t_s - records.front().t_s;
  s.final_clearance_m = records.back().clearance_m;

  for (const auto& r : records) {
    s.max_abs_true_pitch_rad =
        std::max(s.max_abs_true_pitch_rad, std::fabs(r.true_pitch_rad));
    s.max_abs_true_roll_rad =
        std::max(s.max_abs_true_roll_rad, std::fabs(r.true_roll_rad));
    s.max_abs_est_pitch_err_rad =
        std::max(s.max_abs_est_pitch_err_rad,
                 std::fabs(r.est_pitch_rad - r.true_pitch_rad));
    s.max_abs_est_roll_err_rad =
        std::max(s.max_abs_est_roll_err_rad,
                 std::fabs(r.est_roll_rad - r.true_roll_rad));
    s.phase_ticks[static_cast<int>(r.phase)] += 1;
    for (bool sat : r.saturated) {
      if (sat) {
        s.saturated_tick_count += 1;
        break;
      }
    }
  }

  // Earliest time from which both attitudes stay inside their deadbands.
  long settle_index = -1;
  for (long i = static_cast<long>(records.size()) - 1; i >= 0; --i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    if (std::fabs(r.true_pitch_rad) <= pitch_deadband_rad &&
        std::fabs(r.true_roll_rad) <= roll_deadband_rad) {
      settle_index = i;
    } else {
      break;
    }
  }
  if (settle_index >= 0) {
    s.settle_time_s = records[static_cast<std::size_t>(settle_index)].t_s;
  }

  const double tail_start = records.back().t_s - tail_window_s;
  double pitch_sum = 0.0;
  double roll_sum = 0.0;
  long tail_count = 0;
  for (const auto& r : records) {
    if (r.t_s >= tail_start) {
      pitch_sum += std::fabs(r.true_pitch_rad);
      roll_sum += std::fabs(r.true_roll_rad);
      ++tail_count;
    }
  }
  if (tail_count > 0) {
    s.mean_abs_true_pitch_tail_rad = pitch_sum / tail_count;
    s.mean_abs_true_roll_tail_rad = roll_sum / tail_count;
  }
  return s;
}

inline std::string summary_to_json(const SummaryReport& s) {
  std::ostringstream out;
  out << "{\n"
      << "  \"tick_count\": " << s.tick_count << ",\n"
      << "  \"duration_s\": " << format_double(s.duration_s) << ",\n"
      << "  \"settle_time_s\": " << format_double(s.settle_time_s) << ",\n"
      << "  \"max_abs_true_pitch_rad\": "
      << format_double(s.max_abs_true_pitch_rad) << ",\n"
      << "  \"max_abs_true_roll_rad\": "
      << format_double(s.max_abs_true_roll_rad) << ",\n"
      << "  \"mean_abs_true_pitch_tail_rad\": "
      << format_double(s.mean_abs_true_pitch_tail_rad) << ",\n"
      << "  \"mean_abs_true_roll_tail_rad\": "
      << format_double(s.mean_abs_true_roll_tail_rad) << ",\n"
      << "  \"tail_window_s\": " << format_double(s.tail_window_s) << ",\n"
      << "  \"max_abs_est_pitch_err_rad\": "
      << format_double(s.max_abs_est_pitch_err_rad) << ",\n"
      << "  \"max_abs_est_roll_err_rad\": "
      << format_double(s.max_abs_est_roll_err_rad) << ",\n"
      << "  \"saturated_tick_count\": " << s.saturated_tick_count << ",\n"
      << "  \"idle_ticks\": " << s.phase_ticks[0] << ",\n"
      << "  \"roll_ticks\": " << s.phase_ticks[1] << ",\n"
      << "  \"pitch_ticks\": " << s.phase_ticks[2] << ",\n"
      << "  \"clearance_ticks\": " << s.phase_ticks[3] << ",\n"
      << "  \"final_clearance_m\": " << format_double(s.final_clearance_m)
      << "\n}\n";
  return out.str();
}

struct RunResult {
  std::vector<TelemetryRecord> telemetry;
  SummaryReport summary;
};

// Execute the closed loop. Throws ConfigError when validation reports any
// error-severity finding. Optional seed override for CLI use.
inline RunResult run_scenario(const Scenario& scenario,
                              std::optional<std::uint64_t> seed_override = {}) {
  const auto findings = validate_scenario(scenario);
  for (const auto& f : findings) {
    if (f.severity == Finding::Severity::kError) {
      throw ConfigError(f.path, f.message);
    }
  }

  const std::uint64_t seed = seed_override.value_or(scenario.seed);
  Rng rng(seed);

  std::array<ActuatorState, 4> actuators{};
  for (int i = 0; i < 4; ++i) {
    const SuspensionGeometry& geom = scenario.corner_geometry[i];
    ActuatorState a;
    a.stroke_m = geom.stroke_m();
    a.no_load_speed_m_s = scenario.actuator.no_load_speed_m_s;
    a.max_load_n = scenario.actuator.max_load_n;
    a.load_n = scenario.actuator.load_n;
    a.extension_m = extension_for_height(geom, scenario.initial.h_prime_m[i]);
    a.target_m = a.extension_m;
    actuators[i] = a;
  }

  Plant plant(scenario.terrain, scenario.layout, scenario.corner_geometry,
              actuators, scenario.motion);
  AttitudeFilter filter(scenario.imu_cal, scenario.filter_params);

  std::array<double, 4> initial_pots{};
  for (int i = 0; i < 4; ++i) {
    initial_pots[i] = plant.state().actuators[i].pot_reading;
  }
  ControllerState ctrl_state =
      initial_controller_state(scenario.controller, initial_pots);

  const long num_ticks =
      static_cast<long>(std::llround(scenario.duration_s / scenario.tick_dt_s));
  RunResult result;
  result.telemetry.reserve(static_cast<std::size_t>(num_ticks));

  for (long tick = 0; tick < num_ticks; ++tick) {
    const double t = static_cast<double>(tick) * scenario.tick_dt_s;
    const SensedTick sensed =
        plant.sense(t, scenario.imu_cal, scenario.noise, rng);
    const Attitude est = filter.step(sensed.imu);
    const ControlOutput out =
        control_tick(est, sensed.ultrasonic_clearance_m, sensed.pot_readings,
                     scenario.controller, ctrl_state);
    ctrl_state = out.state;

    TelemetryRecord rec;
    rec.t_s = t;
    rec.true_pitch_rad = plant.state().attitude.pitch_rad;
    rec.true_roll_rad = plant.state().attitude.roll_rad;
    rec.est_pitch_rad = est.pitch_rad;
    rec.est_roll_rad = est.roll_rad;
    rec.clearance_m = plant.state().clearance_m;
    for (int i = 0; i < 4; ++i) {
      rec.extension_m[i] = plant.state().actuators[i].extension_m;
      rec.pot[i] = sensed.pot_readings[i];
    }
    rec.phase = ctrl_state.phase;
    rec.saturated = ctrl_state.saturated;
    result.telemetry.push_back(rec);

    plant.set_targets(out.extension_commands_m);
    plant.step(scenario.tick_dt_s);
  }

  result.summary =
      summarize(result.telemetry, scenario.controller.pitch_deadband_rad,
                scenario.controller.roll_deadband_rad);
  return result;
}

}  // namespace levelsim
