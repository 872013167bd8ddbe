// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_BAIL_HPP
#define SLIPWAY_BAIL_HPP

#include "slipway/config.hpp"
#include "slipway/dubins.hpp"
#include "slipway/vessel.hpp"

namespace slipway {

// Geometry and thresholds of the terminal feasibility funnel. The funnel is
// a curvature-bounded reachability approximation built on the pair of
// minimum-radius turning circles at the current heading; wind torque is
// deliberately left out of it.
struct FunnelParams {
  double r_max = 0.15;              // rad/s, max commanded yaw rate
  double u_fix = 1.0;               // m/s, fixed terminal surge speed
  double hysteresis_enter = 0.5;    // m, drop below switches to reversing
  double hysteresis_exit = 1.5;     // m, rise above resumes docking
  double lat_tolerance = 2.0;       // m, acceptable arrival offset
  double heading_tolerance = 0.1745;  // rad, acceptable arrival error
  double heading_gain = 12.0;       // m per rad, converts error to margin
  double reverse_rpm = -1200.0;     // rev/min while backing out
  double reverse_steer_gain = 2.0;  // rad per rad/s of yaw rate
  double alpha_limit = 0.5;         // rad, azimuth clip while backing

  double turn_radius() const { return u_fix / r_max; }
  void validate() const;
  static FunnelParams from_config(const Config& cfg);
};

enum class BailMode { kDocking, kReversing };

struct BailState {
  BailMode mode = BailMode::kDocking;
  double margin = 0.0;  // m, last evaluated funnel clearance
};

// Signed clearance of the trailer approach pose with respect to the funnel.
// Positive means the dock is reachable from here at the terminal speed with
// bounded yaw rate; the magnitude is a distance-like slack. Built from the
// constant-curvature arc through the trailer point: the arc must clear both
// minimum turning circles, arrive acceptably aligned, and there must be
// along-track room left in front of the dock plane.
double funnel_margin(const Pose2D& vessel_pose, const Pose2D& trailer_pose,
                     const FunnelParams& funnel);

// Schmitt trigger between docking and reversing. Drops to reversing when
// the margin falls below the enter threshold, returns to docking only after
// the margin recovers past the exit threshold.
BailState update_mode(const BailState& state, double margin,
                      const FunnelParams& funnel);

// Fixed reverse thrust with the azimuth steering against the current yaw
// rate, so the vessel backs out along its heading.
ControlInput reverse_command(const VesselState& state,
                             const FunnelParams& funnel);

}  // namespace slipway

#endif  // SLIPWAY_BAIL_HPP
