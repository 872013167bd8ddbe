// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_ANGLES_HPP
#define SLIPWAY_ANGLES_HPP

#include <cmath>
#include <numbers>

namespace slipway {

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle to (-pi, pi].
inline double wrap_to_pi(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

// Signed shortest rotation from b to a, in (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_to_pi(a - b); }

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace slipway

#endif  // SLIPWAY_ANGLES_HPP
