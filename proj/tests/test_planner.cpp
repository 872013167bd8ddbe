// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/planner.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "slipway/angles.hpp"
#include "slipway/dubins.hpp"

using namespace slipway;

TEST_SUITE_BEGIN("planner");

TEST_CASE("extended docking point sits behind the trailer along its axis") {
  Pose2D ext = extend_docking_point({0, 0, 0}, 30.0);
  CHECK(ext.x == doctest::Approx(-30.0));
  CHECK(std::abs(ext.y) < 1e-12);
  CHECK(ext.theta == doctest::Approx(0.0));

  Pose2D trailer{5.0, 2.0, kPi / 3.0};
  Pose2D ext2 = extend_docking_point(trailer, 10.0);
  CHECK(ext2.x == doctest::Approx(5.0 - 10.0 * std::cos(kPi / 3.0)));
  CHECK(ext2.y == doctest::Approx(2.0 - 10.0 * std::sin(kPi / 3.0)));
  CHECK(ext2.theta == doctest::Approx(trailer.theta));

  CHECK_THROWS_AS(extend_docking_point(trailer, -1.0), std::invalid_argument);
}

TEST_CASE("path projection finds the closest point's arc length") {
  DubinsPath path = dubins_shortest({-100, 0, 0}, {-40, 0, 0}, 13.3);
  CHECK(project_onto_path(path, {-73.0, 4.0}) == doctest::Approx(27.0).epsilon(1e-6));
  CHECK(project_onto_path(path, {-200.0, 0.0}) == doctest::Approx(0.0));
  CHECK(project_onto_path(path, {0.0, 0.0}) == doctest::Approx(60.0));
  CHECK_THROWS_AS(project_onto_path(path, {0.0, 0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("buffer point leads the vessel by the lookahead distance") {
  Pose2D trailer{0, 0, 0};
  DubinsPath path = dubins_shortest({-100, 0, 0}, {-40, 0, 0}, 13.3);
  BufferParams params;
  BufferPoint bp = compute_buffer_point(path, {-100, 0, 0}, params, {0.0, 0.0}, trailer);
  CHECK(!bp.is_terminal_phase);
  CHECK(bp.position.x() == doctest::Approx(-80.0).epsilon(1e-6));
  CHECK(std::abs(bp.position.y()) < 1e-9);
  CHECK(bp.heading == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("crosswind shifts the buffer point upwind in proportion to speed") {
  Pose2D trailer{0, 0, 0};
  DubinsPath path = dubins_shortest({-100, 0, 0}, {-40, 0, 0}, 13.3);
  BufferParams params;
  // Wind blowing from +y at 6 m/s: the target moves 0.5 * 6 = 3 m toward +y.
  WindCondition wind{6.0, kPi / 2.0};
  BufferPoint bp = compute_buffer_point(path, {-100, 0, 0}, params, wind, trailer);
  CHECK(bp.position.x() == doctest::Approx(-80.0).epsilon(1e-6));
  CHECK(bp.position.y() == doctest::Approx(3.0).epsilon(1e-6));

  // The shift always points into the wind, whatever the direction.
  Eigen::Vector2d unshifted(-80.0, 0.0);
  for (double dir : {0.3, 1.7, -2.4, 3.0}) {
    WindCondition w{4.0, dir};
    BufferPoint shifted = compute_buffer_point(path, {-100, 0, 0}, params, w, trailer);
    Eigen::Vector2d delta = shifted.position - unshifted;
    Eigen::Vector2d upwind(std::cos(dir), std::sin(dir));
    CHECK(delta.dot(upwind) == doctest::Approx(params.shift_gain * w.speed).epsilon(1e-6));
    CHECK(delta.norm() == doctest::Approx(params.shift_gain * w.speed).epsilon(1e-6));
  }
}

TEST_CASE("inside the gate the target snaps to the docking pose unshifted") {
  Pose2D trailer{0, 0, 0};
  DubinsPath path = dubins_shortest({-100, 0, 0}, {-40, 0, 0}, 13.3);
  BufferParams params;
  WindCondition wind{8.0, kPi / 2.0};
  // The lookahead point saturates at the path end (-40, 0), which projects
  // 40 m short of the trailer along its axis, inside the 50 m gate.
  BufferPoint bp = compute_buffer_point(path, {-40, 0, 0}, params, wind, trailer);
  CHECK(bp.is_terminal_phase);
  CHECK(bp.position.x() == doctest::Approx(0.0));
  CHECK(std::abs(bp.position.y()) < 1e-12);
  CHECK(bp.heading == doctest::Approx(0.0));
}

TEST_CASE("buffer point moves continuously as the vessel advances") {
  Pose2D trailer{20, -15, 0.4};
  Pose2D ext = extend_docking_point(trailer, 40.0);
  Pose2D start{-90, 30, -0.8};
  DubinsPath path = dubins_shortest(start, ext, 13.3);
  BufferParams params;
  WindCondition wind{5.0, 2.0};

  BufferPoint prev = compute_buffer_point(path, start, params, wind, trailer);
  for (int k = 1; k <= 400; ++k) {
    double s = std::min(0.05 * k, path.total_length);
    Pose2D vessel = dubins_sample(path, s);
    BufferPoint bp = compute_buffer_point(path, vessel, params, wind, trailer);
    if (!bp.is_terminal_phase && !prev.is_terminal_phase) {
      CHECK((bp.position - prev.position).norm() < 0.4);
    }
    prev = bp;
  }
}

TEST_SUITE_END();
