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
#include <cstdint>
#include <random>

namespace levelsim {

// Deterministic random source. mt19937_64 is fully specified by the
// standard, and the uniform/normal transforms below are spelled out here
// instead of using std distributions, whose output is implementation
// defined. Identical seeds therefore give identical streams on any
// conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Zero-mean Gaussian via Box-Muller. sigma == 0 consumes no randomness.
  double normal(double sigma) {
    if (sigma == 0.0) return 0.0;
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi_ * u2);
  }

 private:
  static constexpr double kTwoPi_ = 6.28318530717958647692;
  std::mt19937_64 engine_;
};

}  // namespace levelsim
