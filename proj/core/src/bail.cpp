// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/bail.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slipway/angles.hpp"

namespace slipway {

void FunnelParams::validate() const {
  if (!(r_max > 0.0) || !(u_fix > 0.0)) {
    throw std::invalid_argument("funnel needs positive yaw rate and speed");
  }
  if (!(hysteresis_enter >= 0.0) || !(hysteresis_exit > hysteresis_enter)) {
    throw std::invalid_argument(
        "hysteresis thresholds must satisfy exit > enter >= 0");
  }
  if (!(lat_tolerance > 0.0) || !(heading_tolerance > 0.0) ||
      !(heading_gain > 0.0)) {
    throw std::invalid_argument("funnel tolerances must be positive");
  }
  if (!(reverse_rpm < 0.0)) {
    throw std::invalid_argument("reverse rpm must be negative");
  }
  if (!(alpha_limit > 0.0) || !(reverse_steer_gain >= 0.0)) {
    throw std::invalid_argument("reverse steering limits must be positive");
  }
}

FunnelParams FunnelParams::from_config(const Config& cfg) {
  FunnelParams f;
  f.r_max = cfg.get_double("bail.r_max", f.r_max);
  f.u_fix = cfg.get_double("bail.u_fix", f.u_fix);
  f.hysteresis_enter =
      cfg.get_double("bail.hysteresis_enter", f.hysteresis_enter);
  f.hysteresis_exit = cfg.get_double("bail.hysteresis_exit", f.hysteresis_exit);
  f.lat_tolerance = cfg.get_double("bail.lat_tolerance", f.lat_tolerance);
  f.heading_tolerance =
      cfg.get_double("bail.heading_tolerance", f.heading_tolerance);
  f.heading_gain = cfg.get_double("bail.heading_gain", f.heading_gain);
  f.reverse_rpm = cfg.get_double("bail.reverse_rpm", f.reverse_rpm);
  f.reverse_steer_gain =
      cfg.get_double("bail.reverse_steer_gain", f.reverse_steer_gain);
  f.alpha_limit = cfg.get_double("bail.alpha_limit", f.alpha_limit);
  f.validate();
  return f;
}

double funnel_margin(const Pose2D& vessel_pose, const Pose2D& trailer_pose,
                     const FunnelParams& funnel) {
  const double radius = funnel.turn_radius();
  const double ct = std::cos(trailer_pose.theta);
  const double st = std::sin(trailer_pose.theta);
  // Along-track room in front of the dock plane.
  const double d_along = ct * (trailer_pose.x - vessel_pose.x) +
                         st * (trailer_pose.y - vessel_pose.y);
  if (d_along <= 0.0) return d_along;

  const double e =
      wrap_to_pi(vessel_pose.theta - trailer_pose.theta);
  // Every bounded-curvature arc that crosses the dock plane crosses it at
  // some lateral offset, so scanning aim points across the acceptance gate
  // parametrizes the whole single-arc family. For each aim the arc through
  // it must clear both minimum turning circles (the |sin| term is exactly
  // the inside-a-circle test) and arrive acceptably aligned; the margin of
  // the best aim is the funnel clearance.
  const int n = 81;
  double best = -1e30;
  for (int i = 0; i < n; ++i) {
    const double off =
        -funnel.lat_tolerance + 2.0 * funnel.lat_tolerance * i / (n - 1);
    const double ax = trailer_pose.x - st * off;
    const double ay = trailer_pose.y + ct * off;
    const double ddx = ax - vessel_pose.x;
    const double ddy = ay - vessel_pose.y;
    const double dist = std::hypot(ddx, ddy);
    if (dist < 1e-9) continue;
    const double bearing =
        wrap_to_pi(std::atan2(ddy, ddx) - vessel_pose.theta);
    const double arrival = wrap_to_pi(e + 2.0 * bearing);
    const double m_circle =
        dist - 2.0 * radius * std::abs(std::sin(bearing));
    const double m_align =
        (funnel.heading_tolerance - std::abs(arrival)) * funnel.heading_gain;
    best = std::max(best, std::min(m_circle, m_align));
  }
  return std::min(best, d_along);
}

BailState update_mode(const BailState& state, double margin,
                      const FunnelParams& funnel) {
  BailState next = state;
  next.margin = margin;
  if (state.mode == BailMode::kDocking &&
      margin < funnel.hysteresis_enter) {
    next.mode = BailMode::kReversing;
  } else if (state.mode == BailMode::kReversing &&
             margin > funnel.hysteresis_exit) {
    next.mode = BailMode::kDocking;
  }
  return next;
}

ControlInput reverse_command(const VesselState& state,
                             const FunnelParams& funnel) {
  ControlInput cmd;
  cmd.rpm = funnel.reverse_rpm;
  cmd.alpha = std::clamp(-funnel.reverse_steer_gain * state.r,
                         -funnel.alpha_limit, funnel.alpha_limit);
  return cmd;
}

}  // namespace slipway
