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

// Power budget audit: per-module energy rows, battery runtime estimation,
// and a recomputation pass that checks published energy figures against
// their own arithmetic. The audit never corrects published values; it
// reports computed and published side by side and flags disagreements.

#pragma once

#include <cmath>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "levelsim/csv.hpp"

namespace levelsim {

// One budget row: a module drawing `current_ma` at `voltage_v`, `count`
// units, for `duty_h` hours at stated power.
struct PowerRow {
  std::string name;
  double voltage_v = 0.0;
  double current_ma = 0.0;
  int count = 1;
  double duty_h = 0.0;
  std::optional<double> published_mwh;

  void validate() const {
    if (!(voltage_v > 0.0) || !(current_ma >= 0.0) || count < 1 ||
        !(duty_h > 0.0)) {
      throw std::invalid_argument("PowerRow '" + name + "': invalid fields");
    }
  }
};

inline double row_power_mw(const PowerRow& row) {
  return row.voltage_v * row.current_ma * row.count;
}

inline double row_energy_mwh(const PowerRow& row) {
  row.validate();
  return row.voltage_v * row.current_ma * row.count * row.duty_h;
}

struct AuditEntry {
  std::string name;
  double computed_mwh = 0.0;
  std::optional<double> published_mwh;
  bool match = true;  // true when no published value or within tolerance
};

struct AuditReport {
  static constexpr double kToleranceMwh = 0.1;

  std::vector<AuditEntry> entries;
  double computed_total_mwh = 0.0;
  std::optional<double> published_total_mwh;
  bool total_match = true;

  int mismatch_count() const {
    int n = 0;
    for (const auto& e : entries) {
      if (!e.match) ++n;
    }
    return n;
  }
};

// Recompute every row and compare against its published value where one is
// given; compare the recomputed total against the published total.
inline AuditReport audit_table(const std::vector<PowerRow>& rows,
                               std::optional<double> published_total_mwh = {}) {
  AuditReport report;
  for (const auto& row : rows) {
    AuditEntry entry;
    entry.name = row.name;
    entry.computed_mwh = row_energy_mwh(row);
    entry.published_mwh = row.published_mwh;
    if (row.published_mwh) {
      entry.match = std::fabs(entry.computed_mwh - *row.published_mwh) <=
                    AuditReport::kToleranceMwh;
    }
    report.computed_total_mwh += entry.computed_mwh;
    report.entries.push_back(std::move(entry));
  }
  report.published_total_mwh = published_total_mwh;
  if (published_total_mwh) {
    report.total_match =
        std::fabs(report.computed_total_mwh - *published_total_mwh) <=
        AuditReport::kToleranceMwh;
  }
  return report;
}

// Battery bank made of identical packs wired in series. Series wiring sums
// voltage; the chain capacity stays at one pack's capacity.
struct BatteryBank {
  int cell_series_per_pack = 4;
  double pack_capacity_mah = 6000.0;
  int packs_in_series = 3;
  double nominal_cell_voltage_v = 3.7;
  double derating = 1.0;  // fraction of stored energy treated as usable

  void validate() const {
    if (cell_series_per_pack < 1 || packs_in_series < 1 ||
        !(pack_capacity_mah > 0.0) || !(nominal_cell_voltage_v > 0.0) ||
        !(derating > 0.0) || !(derating <= 1.0)) {
      throw std::invalid_argument("BatteryBank: invalid fields");
    }
  }

  double nominal_voltage_v() const {
    return cell_series_per_pack * packs_in_series * nominal_cell_voltage_v;
  }

  double energy_wh() const {
    return nominal_voltage_v() * pack_capacity_mah / 1000.0;
  }
};

// Runtime in minutes: usable bank energy over total average power.
inline double runtime_estimate_min(const std::vector<PowerRow>& rows,
                                   const BatteryBank& bank) {
  bank.validate();
  double total_power_w = 0.0;
  for (const auto& row : rows) {
    row.validate();
    total_power_w += row_power_mw(row) / 1000.0;
  }
  if (!(total_power_w > 0.0)) {
    throw std::domain_error("runtime_estimate: total power must be positive");
  }
  return 60.0 * bank.energy_wh() * bank.derating / total_power_w;
}

struct PowerTable {
  std::vector<PowerRow> rows;
  std::optional<double> published_total_mwh;
};

// CSV columns: name,voltage_v,current_ma,count,duty_h,published_mwh with the
// last column optional per row. A row named TOTAL with only published_mwh
// set carries the published grand total.
inline PowerTable parse_power_rows_csv(std::istream& in) {
  const CsvTable csv = read_csv(in);
  const std::vector<std::string> expected{"name",  "voltage_v", "current_ma",
                                          "count", "duty_h",    "published_mwh"};
  if (csv.header.size() < 5) {
    throw std::invalid_argument("power csv: expected at least 5 columns");
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (csv.header[i] != expected[i]) {
      throw std::invalid_argument("power csv: column " + std::to_string(i) +
                                  " must be '" + expected[i] + "'");
    }
  }
  PowerTable table;
  for (const auto& fields : csv.rows) {
    if (fields.size() < 5) {
      throw std::invalid_argument("power csv: malformed row '" +
                                  (fields.empty() ? "" : fields[0]) + "'");
    }
    const bool has_published = fields.size() >= 6 && !fields[5].empty();
    if (fields[0] == "TOTAL") {
      if (!has_published) {
        throw std::invalid_argument(
            "power csv: TOTAL row needs a published_mwh value");
      }
      table.published_total_mwh = parse_double(fields[5]);
      continue;
    }
    PowerRow row;
    row.name = fields[0];
    try {
      row.voltage_v = parse_double(fields[1]);
      row.current_ma = parse_double(fields[2]);
      row.count = static_cast<int>(std::lround(parse_double(fields[3])));
      row.duty_h = parse_double(fields[4]);
      if (has_published) row.published_mwh = parse_double(fields[5]);
    } catch (const std::exception& err) {
      throw std::invalid_argument("power csv: malformed row '" + row.name +
                                  "': " + err.what());
    }
    row.validate();
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace levelsim
