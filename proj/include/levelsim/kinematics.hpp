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

// Closed-form geometry of one suspension corner: a bell crank lever driven
// by a linear actuator. Link 1 (arm length l1) connects the crank pivot to
// the actuator rod end, link 2 (arm length l2) connects the pivot to the
// wheel center. The actuator is anchored to the chassis a distance c from
// the pivot and has unactuated length a. With alpha the angle between
// link 1 and the chassis, the rod-end sits at (l1 cos a, l1 sin a) from the
// pivot and the required extension is
//
//   b(alpha) = sqrt((l1 sin a)^2 + (c - l1 cos a)^2) - a
//
// while the chassis height above the wheel center is h' = l2 cos(alpha).
// All angles are radians, all lengths meters.

#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace levelsim {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

// Arm lengths of a two-arm bell crank lever.
struct LeverArms {
  double l1_m;
  double l2_m;

  LeverArms(double l1, double l2) : l1_m(l1), l2_m(l2) {
    if (!(l1 > 0.0) || !(l2 > 0.0)) {
      throw std::invalid_argument("LeverArms: arm lengths must be positive");
    }
  }
};

// Angle between link 1 and the chassis, restricted to (0, pi/2] so that the
// complementary link-2 angle stays in [0, pi/2).
struct LinkAngle {
  double alpha_rad;

  explicit LinkAngle(double alpha) : alpha_rad(alpha) {
    if (!(alpha > 0.0) || !(alpha <= kPi / 2.0)) {
      throw std::domain_error("LinkAngle: alpha must lie in (0, pi/2]");
    }
  }
};

// Static force balance of the lever: f1 * l1 = f2 * l2.
inline double lever_output_force(double f1_n, const LeverArms& arms) {
  if (!std::isfinite(f1_n)) {
    throw std::domain_error("lever_output_force: input force must be finite");
  }
  return f1_n * arms.l1_m / arms.l2_m;
}

// Small-rotation displacement ratio dx/dy = l1/l2. This is the linearized
// relation; finite rotations go through extension_for_angle instead.
inline double lever_displacement_ratio(const LeverArms& arms) {
  return arms.l1_m / arms.l2_m;
}

// Fixed linkage constants of one suspension corner. Construction validates
// that at least one link angle in (0, pi/2] puts the actuator extension
// inside [0, stroke], and records the interval of h' over which the
// extension map was verified strictly monotone.
class SuspensionGeometry {
 public:
  SuspensionGeometry(double a_m, double stroke_m, double c_m,
                     const LeverArms& arms, double wheel_radius_m)
      : a_m_(a_m),
        stroke_m_(stroke_m),
        c_m_(c_m),
        arms_(arms),
        wheel_radius_m_(wheel_radius_m) {
    if (!(a_m > 0.0) || !(stroke_m > 0.0) || !(c_m > 0.0) ||
        !(wheel_radius_m > 0.0)) {
      throw std::invalid_argument(
          "SuspensionGeometry: lengths must be positive");
    }
    // Image of b over alpha in (0, pi/2]. b is increasing in alpha, so the
    // image is (b(alpha->0+), b(pi/2)].
    extension_min_m_ = extension_at_alpha(1e-12);
    extension_max_m_ = extension_at_alpha(kPi / 2.0);
    if (extension_min_m_ > stroke_m_ || extension_max_m_ < 0.0) {
      throw std::invalid_argument(
          "SuspensionGeometry: no link angle puts the extension inside "
          "[0, stroke]");
    }
    scan_monotone_interval();
  }

  double a_m() const { return a_m_; }
  double stroke_m() const { return stroke_m_; }
  double c_m() const { return c_m_; }
  const LeverArms& arms() const { return arms_; }
  double wheel_radius_m() const { return wheel_radius_m_; }

  // Bounds of the extension image over the whole angle domain. The lower
  // bound is an open limit (alpha -> 0), the upper bound is attained at
  // alpha = pi/2 (h' = 0).
  double extension_min_m() const { return extension_min_m_; }
  double extension_max_m() const { return extension_max_m_; }

  // Upper end of the h' interval on which the extension map was verified
  // strictly monotone at construction. The lower end is 0.
  double monotone_h_prime_max_m() const { return monotone_h_prime_max_m_; }

  double extension_at_alpha(double alpha_rad) const {
    const double h = arms_.l1_m * std::sin(alpha_rad);
    const double x = c_m_ - arms_.l1_m * std::cos(alpha_rad);
    return std::sqrt(h * h + x * x) - a_m_;
  }

 private:
  void scan_monotone_interval() {
    // b is strictly decreasing in h' wherever db/dalpha keeps its sign;
    // verify on a dense grid and keep the largest prefix from h' = 0.
    constexpr int kSamples = 512;
    const double h_top = arms_.l2_m * (1.0 - 1e-9);
    double prev_b = extension_max_m_;  // b at h' = 0
    monotone_h_prime_max_m_ = 0.0;
    for (int i = 1; i <= kSamples; ++i) {
      const double h = h_top * static_cast<double>(i) / kSamples;
      const double alpha = kPi / 2.0 - std::asin(h / arms_.l2_m);
      const double b = extension_at_alpha(alpha);
      if (!(b < prev_b)) break;
      prev_b = b;
      monotone_h_prime_max_m_ = h;
    }
  }

  double a_m_;
  double stroke_m_;
  double c_m_;
  LeverArms arms_;
  double wheel_radius_m_;
  double extension_min_m_;
  double extension_max_m_;
  double monotone_h_prime_max_m_;
};

// Actuator extension required to hold link 1 at the given angle. The result
// may be negative or exceed the stroke; reachability is the caller's check.
inline double extension_for_angle(const SuspensionGeometry& geom,
                                  const LinkAngle& angle) {
  return geom.extension_at_alpha(angle.alpha_rad);
}

// Link angle that puts the chassis a height h' above the wheel center,
// h' = l2 cos(alpha). Valid for h' in [0, l2).
inline LinkAngle angle_for_height(const SuspensionGeometry& geom,
                                  double h_prime_m) {
  const double l2 = geom.arms().l2_m;
  if (!(h_prime_m >= 0.0) || !(h_prime_m < l2)) {
    throw std::domain_error(
        "angle_for_height: height exceeds Link 2 reach (need 0 <= h' < l2)");
  }
  return LinkAngle(kPi / 2.0 - std::asin(h_prime_m / l2));
}

// Extension required for a desired chassis height above the wheel center.
// Defined as the composition of angle_for_height and extension_for_angle.
inline double extension_for_height(const SuspensionGeometry& geom,
                                   double h_prime_m) {
  return extension_for_angle(geom, angle_for_height(geom, h_prime_m));
}

// Numerical inverse of extension_for_height by bisection. The extension map
// is strictly decreasing in h' on the validated interval, so bisection
// converges unconditionally; the result reproduces b to well under 1e-10 m.
inline double height_for_extension(const SuspensionGeometry& geom,
                                   double extension_m) {
  const double h_top = geom.arms().l2_m * (1.0 - 1e-9);
  const double b_at_zero = extension_for_height(geom, 0.0);   // largest b
  const double b_at_top = extension_for_height(geom, h_top);  // smallest b
  if (!(extension_m <= b_at_zero) || !(extension_m >= b_at_top)) {
    std::ostringstream msg;
    msg << "height_for_extension: extension " << extension_m
        << " m outside reachable range [" << b_at_top << ", " << b_at_zero
        << "] m";
    throw std::out_of_range(msg.str());
  }
  double lo = 0.0;
  double hi = h_top;
  for (int i = 0; i < 200 && (hi - lo) > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (extension_for_height(geom, mid) >= extension_m) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Interval of h' values the actuator can actually hold, i.e. where the
// required extension lies in [0, stroke], additionally capped at
// cap_frac * l2. Used by the controller to clamp targets.
struct HeightInterval {
  double lo_m;
  double hi_m;
};

inline HeightInterval reachable_height_interval(const SuspensionGeometry& geom,
                                                double cap_frac = 0.95) {
  const double h_cap = cap_frac * geom.arms().l2_m;
  double lo = 0.0;
  double hi = h_cap;
  // b decreasing in h': b(h) <= stroke bounds h from below, b(h) >= 0 from
  // above.
  if (extension_for_height(geom, 0.0) > geom.stroke_m()) {
    lo = height_for_extension(geom, geom.stroke_m());
  }
  if (extension_for_height(geom, h_cap) < 0.0) {
    hi = height_for_extension(geom, 0.0);
  }
  if (!(lo <= hi)) {
    throw std::domain_error(
        "reachable_height_interval: empty reachable interval");
  }
  return {lo, hi};
}

// Precomputed height-to-extension map with linear interpolation, mirroring
// a lookup table preloaded in RAM on a flight controller. Interpolation
// error over the tabulated interval stays well under 0.5 mm at the default
// resolution (the table tests pin this).
class ExtensionTable {
 public:
  explicit ExtensionTable(const SuspensionGeometry& geom,
                          double cap_frac = 0.95, int samples = 256)
      : h_lo_m_(0.0), h_hi_m_(cap_frac * geom.arms().l2_m) {
    if (samples < 2) {
      throw std::invalid_argument("ExtensionTable: need at least 2 samples");
    }
    extensions_.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
      const double h =
          h_lo_m_ + (h_hi_m_ - h_lo_m_) * static_cast<double>(i) / (samples - 1);
      extensions_.push_back(levelsim::extension_for_height(geom, h));
    }
  }

  double extension_for_height(double h_prime_m) const {
    if (!(h_prime_m >= h_lo_m_) || !(h_prime_m <= h_hi_m_)) {
      throw std::domain_error("ExtensionTable: height outside tabulated range");
    }
    const double n = static_cast<double>(extensions_.size() - 1);
    const double pos = (h_prime_m - h_lo_m_) / (h_hi_m_ - h_lo_m_) * n;
    const std::size_t i =
        std::min(static_cast<std::size_t>(pos), extensions_.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return extensions_[i] + frac * (extensions_[i + 1] - extensions_[i]);
  }

  double h_lo_m() const { return h_lo_m_; }
  double h_hi_m() const { return h_hi_m_; }

 private:
  double h_lo_m_;
  double h_hi_m_;
  std::vector<double> extensions_;
};

}  // namespace levelsim
