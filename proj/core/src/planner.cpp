// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/planner.hpp"

#include <cmath>
#include <stdexcept>

#include "slipway/angles.hpp"

namespace slipway {

Pose2D extend_docking_point(const Pose2D& trailer, double extension) {
  if (extension < 0.0) {
    throw std::invalid_argument("extend_docking_point: extension must be nonnegative");
  }
  return {trailer.x - extension * std::cos(trailer.theta),
          trailer.y - extension * std::sin(trailer.theta), trailer.theta};
}

double project_onto_path(const DubinsPath& path, const Eigen::Vector2d& position,
                         double sample_spacing) {
  if (!(sample_spacing > 0.0)) {
    throw std::invalid_argument("project_onto_path: spacing must be positive");
  }
  int n = std::max(1, static_cast<int>(std::ceil(path.total_length / sample_spacing)));
  double best_s = 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    double s = path.total_length * static_cast<double>(i) / n;
    Pose2D p = dubins_sample(path, s);
    double d2 = (Eigen::Vector2d(p.x, p.y) - position).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = s;
    }
  }
  return best_s;
}

BufferPoint compute_buffer_point(const DubinsPath& path, const Pose2D& vessel_pose,
                                 const BufferParams& params, const WindCondition& wind,
                                 const Pose2D& trailer_pose) {
  Eigen::Vector2d vessel(vessel_pose.x, vessel_pose.y);
  double s_vessel = project_onto_path(path, vessel, params.sample_spacing);
  double s_look = std::min(s_vessel + params.lookahead, path.total_length);
  Pose2D look = dubins_sample(path, s_look);

  Eigen::Vector2d axis(std::cos(trailer_pose.theta), std::sin(trailer_pose.theta));
  Eigen::Vector2d to_trailer(trailer_pose.x - look.x, trailer_pose.y - look.y);
  double projected = to_trailer.dot(axis);

  BufferPoint out;
  if (projected < params.gate_distance) {
    out.position = {trailer_pose.x, trailer_pose.y};
    out.heading = trailer_pose.theta;
    out.is_terminal_phase = true;
    return out;
  }
  Eigen::Vector2d upwind(std::cos(wind.direction), std::sin(wind.direction));
  out.position = Eigen::Vector2d(look.x, look.y) +
                 params.shift_gain * wind.speed * upwind;
  out.heading = look.theta;
  out.is_terminal_phase = false;
  return out;
}

}  // namespace slipway
