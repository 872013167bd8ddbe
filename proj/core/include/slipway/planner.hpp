// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_PLANNER_HPP
#define SLIPWAY_PLANNER_HPP

#include <Eigen/Dense>

#include "slipway/dubins.hpp"
#include "slipway/vessel.hpp"

namespace slipway {

// Reference point handed to the trajectory optimizer. In the terminal phase
// the point is the docking target itself and no wind shift is applied.
struct BufferPoint {
  Eigen::Vector2d position{0.0, 0.0};
  double heading = 0.0;
  bool is_terminal_phase = false;
};

struct BufferParams {
  double lookahead = 20.0;      // m ahead of the vessel projection
  double shift_gain = 0.5;      // m per (m/s) of wind, shift into the wind
  double gate_distance = 50.0;  // m, switch to the docking target inside this
  double sample_spacing = 0.1;  // m, projection resolution along the path
};

// Virtual goal straightening the final approach: the trailer pose pushed
// back along its own axis. Throws std::invalid_argument for negative length.
Pose2D extend_docking_point(const Pose2D& trailer, double extension);

// Arc length of the path sample closest to the given position.
double project_onto_path(const DubinsPath& path, const Eigen::Vector2d& position,
                         double sample_spacing = 0.1);

// Floating reference ahead of the vessel on the path, shifted upwind, until
// the lookahead point projects within gate_distance of the trailer along the
// trailer axis; then the docking target is returned directly.
BufferPoint compute_buffer_point(const DubinsPath& path, const Pose2D& vessel_pose,
                                 const BufferParams& params, const WindCondition& wind,
                                 const Pose2D& trailer_pose);

}  // namespace slipway

#endif  // SLIPWAY_PLANNER_HPP
