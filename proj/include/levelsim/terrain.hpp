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

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "levelsim/kinematics.hpp"

namespace levelsim {

// Synthetic ground heightfield assembled from additive primitives. Each
// primitive has a direction given by an azimuth (0 = +x, measured toward
// +y); "along" below is the coordinate in that direction. Step edges are
// evaluated right-continuous: the step value applies at the edge itself.
struct TerrainPrimitive {
  enum class Type { kFlat, kRamp, kStep, kSinusoid };

  Type type = Type::kFlat;
  double height_m = 0.0;      // flat offset or step height
  double grade_deg = 0.0;     // ramp slope angle
  double azimuth_deg = 0.0;   // direction of the primitive
  double edge_m = 0.0;        // step edge position along azimuth
  double amplitude_m = 0.0;   // sinusoid amplitude
  double wavelength_m = 1.0;  // sinusoid wavelength

  static TerrainPrimitive flat(double height_m) {
    TerrainPrimitive p;
    p.type = Type::kFlat;
    p.height_m = height_m;
    return p;
  }

  static TerrainPrimitive ramp(double grade_deg, double azimuth_deg) {
    TerrainPrimitive p;
    p.type = Type::kRamp;
    p.grade_deg = grade_deg;
    p.azimuth_deg = azimuth_deg;
    return p;
  }

  static TerrainPrimitive step(double height_m, double edge_m,
                               double azimuth_deg) {
    TerrainPrimitive p;
    p.type = Type::kStep;
    p.height_m = height_m;
    p.edge_m = edge_m;
    p.azimuth_deg = azimuth_deg;
    return p;
  }

  static TerrainPrimitive sinusoid(double amplitude_m, double wavelength_m,
                                   double azimuth_deg) {
    if (!(wavelength_m > 0.0)) {
      throw std::invalid_argument("sinusoid: wavelength must be positive");
    }
    TerrainPrimitive p;
    p.type = Type::kSinusoid;
    p.amplitude_m = amplitude_m;
    p.wavelength_m = wavelength_m;
    p.azimuth_deg = azimuth_deg;
    return p;
  }

  double height_at(double x_m, double y_m) const {
    const double az = deg_to_rad(azimuth_deg);
    const double along = x_m * std::cos(az) + y_m * std::sin(az);
    switch (type) {
      case Type::kFlat:
        return height_m;
      case Type::kRamp:
        return std::tan(deg_to_rad(grade_deg)) * along;
      case Type::kStep:
        return along >= edge_m ? height_m : 0.0;
      case Type::kSinusoid:
        return amplitude_m * std::sin(2.0 * kPi * along / wavelength_m);
    }
    return 0.0;
  }
};

class Terrain {
 public:
  Terrain() = default;
  explicit Terrain(std::vector<TerrainPrimitive> parts)
      : parts_(std::move(parts)) {}

  double height_at(double x_m, double y_m) const {
    double z = 0.0;
    for (const auto& p : parts_) z += p.height_at(x_m, y_m);
    return z;
  }

  const std::vector<TerrainPrimitive>& parts() const { return parts_; }

 private:
  std::vector<TerrainPrimitive> parts_;
};

}  // namespace levelsim
