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

// Command-line front end.
//
//   simulate    run a closed-loop scenario, write telemetry CSV + summary
//   validate    check a scenario config and print findings
//   kinematics  one-shot height <-> extension conversions
//   filter      run the attitude filter over an IMU CSV
//   power       audit a power budget CSV and estimate battery runtime
//
// Exit codes: 0 success, 1 usage error, 2 config/validation error,
// 3 runtime numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "levelsim/csv.hpp"
#include "levelsim/power.hpp"
#include "levelsim/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw levelsim::ConfigError("", "cannot open file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

levelsim::Scenario load_scenario(const std::string& path) {
  return levelsim::parse_scenario_text(read_file(path));
}

levelsim::SuspensionGeometry load_geometry(const std::string& path) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& err) {
    throw levelsim::ConfigError("", std::string("invalid JSON: ") + err.what());
  }
  return levelsim::cfg_detail::parse_geometry_object(root, "");
}

struct CalFile {
  levelsim::ImuCalibration cal;
  levelsim::AttitudeFilterParams params;
};

CalFile load_calibration(const std::string& path) {
  // Reuse the scenario parser: a calibration file is the "imu" section.
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& err) {
    throw levelsim::ConfigError("", std::string("invalid JSON: ") + err.what());
  }
  nlohmann::json wrapped;
  wrapped["imu"] = root;
  const levelsim::Scenario s = levelsim::parse_scenario(wrapped);
  return {s.imu_cal, s.filter_params};
}

levelsim::BatteryBank load_bank(const std::string& path,
                                std::optional<double>* claimed_minutes) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& err) {
    throw levelsim::ConfigError("", std::string("invalid JSON: ") + err.what());
  }
  levelsim::cfg_detail::check_known_keys(
      root, "",
      {"cell_series_per_pack", "pack_capacity_mah", "packs_in_series",
       "nominal_cell_voltage_v", "derating", "claimed_runtime_min"});
  levelsim::BatteryBank bank;
  bank.cell_series_per_pack = static_cast<int>(levelsim::cfg_detail::get_number(
      root, "", "cell_series_per_pack", bank.cell_series_per_pack));
  bank.pack_capacity_mah = levelsim::cfg_detail::get_number(
      root, "", "pack_capacity_mah", bank.pack_capacity_mah);
  bank.packs_in_series = static_cast<int>(levelsim::cfg_detail::get_number(
      root, "", "packs_in_series", bank.packs_in_series));
  bank.nominal_cell_voltage_v = levelsim::cfg_detail::get_number(
      root, "", "nominal_cell_voltage_v", bank.nominal_cell_voltage_v);
  bank.derating =
      levelsim::cfg_detail::get_number(root, "", "derating", bank.derating);
  if (root.contains("claimed_runtime_min")) {
    *claimed_minutes = root.at("claimed_runtime_min").get<double>();
  }
  bank.validate();
  return bank;
}

int run_simulate(const std::string& config_path, const std::string& out_path,
                 const std::string& summary_path,
                 std::optional<std::uint64_t> seed) {
  const levelsim::Scenario scenario = load_scenario(config_path);
  const auto findings = levelsim::validate_scenario(scenario);
  for (const auto& f : findings) {
    if (f.severity == levelsim::Finding::Severity::kWarning) {
      std::cerr << "warning at " << f.path << ": " << f.message << "\n";
    }
  }
  const levelsim::RunResult result = levelsim::run_scenario(scenario, seed);

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitConfig;
  }
  levelsim::write_telemetry_csv(out, result.telemetry);

  const std::string summary_json = levelsim::summary_to_json(result.summary);
  if (!summary_path.empty()) {
    std::ofstream sum(summary_path);
    if (!sum) {
      std::cerr << "error: cannot write '" << summary_path << "'\n";
      return kExitConfig;
    }
    sum << summary_json;
  }
  std::cout << summary_json;
  return kExitOk;
}

int run_validate(const std::string& config_path) {
  const levelsim::Scenario scenario = load_scenario(config_path);
  const auto findings = levelsim::validate_scenario(scenario);
  if (findings.empty()) {
    std::cout << "ok: no findings\n";
    return kExitOk;
  }
  for (const auto& f : findings) {
    std::cout << (f.severity == levelsim::Finding::Severity::kError
                      ? "error"
                      : "warning")
              << " at " << f.path << ": " << f.message << "\n";
  }
  return levelsim::has_errors(findings) ? kExitConfig : kExitOk;
}

int run_filter(const std::string& cal_path, const std::string& in_path,
               const std::string& out_path) {
  const CalFile cal = load_calibration(cal_path);
  std::ifstream in(in_path);
  if (!in) {
    std::cerr << "error: cannot open '" << in_path << "'\n";
    return kExitConfig;
  }
  const levelsim::CsvTable table = levelsim::read_csv(in);
  const std::vector<std::string> expected{"t",  "ax", "ay", "az",
                                          "gx", "gy", "gz"};
  if (table.header != expected) {
    std::cerr << "error: filter input must have header t,ax,ay,az,gx,gy,gz\n";
    return kExitConfig;
  }

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitConfig;
  }
  out << "t,pitch_rad,roll_rad,pitch_raw,roll_raw,bias_pitch,bias_roll\n";
  levelsim::AttitudeFilter filter(cal.cal, cal.params);
  for (const auto& fields : table.rows) {
    if (fields.size() != 7) {
      std::cerr << "error: expected 7 fields per row\n";
      return kExitConfig;
    }
    levelsim::ImuSample sample;
    sample.t_s = levelsim::parse_double(fields[0]);
    for (int i = 0; i < 3; ++i) {
      sample.acc_adc[i] = levelsim::parse_double(fields[1 + i]);
      sample.gyro_adc[i] = levelsim::parse_double(fields[4 + i]);
    }
    const levelsim::Attitude est = filter.step(sample);
    const levelsim::Attitude raw =
        levelsim::accel_attitude(sample, cal.cal);  // unfiltered diagnostics
    out << levelsim::format_double(sample.t_s) << ','
        << levelsim::format_double(est.pitch_rad) << ','
        << levelsim::format_double(est.roll_rad) << ','
        << levelsim::format_double(raw.pitch_rad) << ','
        << levelsim::format_double(raw.roll_rad) << ','
        << levelsim::format_double(filter.pitch_bias_rad_s()) << ','
        << levelsim::format_double(filter.roll_bias_rad_s()) << '\n';
  }
  return kExitOk;
}

int run_power(const std::string& rows_path, const std::string& bank_path) {
  std::ifstream in(rows_path);
  if (!in) {
    std::cerr << "error: cannot open '" << rows_path << "'\n";
    return kExitConfig;
  }
  const levelsim::PowerTable table = levelsim::parse_power_rows_csv(in);
  const levelsim::AuditReport report =
      levelsim::audit_table(table.rows, table.published_total_mwh);

  std::printf("%-42s %12s %12s  %s\n", "module", "computed mWh",
              "published mWh", "match");
  for (const auto& e : report.entries) {
    if (e.published_mwh) {
      std::printf("%-42s %12.1f %12.1f  %s\n", e.name.c_str(), e.computed_mwh,
                  *e.published_mwh, e.match ? "yes" : "MISMATCH");
    } else {
      std::printf("%-42s %12.1f %12s  %s\n", e.name.c_str(), e.computed_mwh,
                  "-", "-");
    }
  }
  if (report.published_total_mwh) {
    std::printf("%-42s %12.1f %12.1f  %s (delta %+.1f)\n", "TOTAL",
                report.computed_total_mwh, *report.published_total_mwh,
                report.total_match ? "yes" : "MISMATCH",
                report.computed_total_mwh - *report.published_total_mwh);
  } else {
    std::printf("%-42s %12.1f\n", "TOTAL", report.computed_total_mwh);
  }

  if (!bank_path.empty()) {
    std::optional<double> claimed;
    const levelsim::BatteryBank bank = load_bank(bank_path, &claimed);
    const double minutes = levelsim::runtime_estimate_min(table.rows, bank);
    std::printf("\nbank: %.1f V nominal, %.1f Wh, derating %.2f\n",
                bank.nominal_voltage_v(), bank.energy_wh(), bank.derating);
    if (claimed) {
      std::printf("estimated runtime: %.1f min (published claim: %.1f min)\n",
                  minutes, *claimed);
    } else {
      std::printf("estimated runtime: %.1f min\n", minutes);
    }
  }
  return kExitOk;  // mismatches are output, not failure
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"levelsim: active-suspension chassis leveling simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, summary_path;
  std::uint64_t seed_value = 0;
  bool seed_given = false;

  CLI::App* simulate = app.add_subcommand("simulate", "run a scenario");
  simulate->add_option("--config", config_path, "scenario JSON")->required();
  simulate->add_option("--out", out_path, "telemetry CSV output")->required();
  simulate->add_option("--summary", summary_path, "summary JSON output");
  simulate->add_option("--seed", seed_value, "override the scenario seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });

  CLI::App* validate = app.add_subcommand("validate", "check a scenario");
  validate->add_option("--config", config_path, "scenario JSON")->required();

  CLI::App* kinematics =
      app.add_subcommand("kinematics", "height <-> extension conversions");
  kinematics->require_subcommand(1);
  std::string geom_path;
  double h_value = 0.0, b_value = 0.0;
  CLI::App* h2b = kinematics->add_subcommand("h2b", "height to extension");
  h2b->set_help_flag("--help", "print help");  // frees -h for the value flag
  h2b->add_option("--h", h_value, "chassis height above wheel center (m)")
      ->required();
  h2b->add_option("--geom", geom_path, "geometry JSON")->required();
  CLI::App* b2h = kinematics->add_subcommand("b2h", "extension to height");
  b2h->set_help_flag("--help", "print help");
  b2h->add_option("--b", b_value, "actuator extension (m)")->required();
  b2h->add_option("--geom", geom_path, "geometry JSON")->required();

  CLI::App* filter = app.add_subcommand("filter", "filter an IMU CSV");
  std::string cal_path, in_path;
  filter->add_option("--cal", cal_path, "calibration JSON")->required();
  filter->add_option("--in", in_path, "input CSV (t,ax,ay,az,gx,gy,gz)")
      ->required();
  filter->add_option("--out", out_path, "output CSV")->required();

  CLI::App* power = app.add_subcommand("power", "audit a power budget CSV");
  std::string rows_path, bank_path;
  power->add_option("--rows", rows_path, "budget rows CSV")->required();
  power->add_option("--bank", bank_path, "battery bank JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      return run_simulate(config_path, out_path, summary_path,
                          seed_given ? std::optional<std::uint64_t>(seed_value)
                                     : std::nullopt);
    }
    if (validate->parsed()) {
      return run_validate(config_path);
    }
    if (kinematics->parsed()) {
      const levelsim::SuspensionGeometry geom = load_geometry(geom_path);
      if (h2b->parsed()) {
        std::cout << levelsim::format_double(
                         levelsim::extension_for_height(geom, h_value))
                  << "\n";
      } else {
        std::cout << levelsim::format_double(
                         levelsim::height_for_extension(geom, b_value))
                  << "\n";
      }
      return kExitOk;
    }
    if (filter->parsed()) {
      return run_filter(cal_path, in_path, out_path);
    }
    if (power->parsed()) {
      return run_power(rows_path, bank_path);
    }
  } catch (const levelsim::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
