// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_DUBINS_HPP
#define SLIPWAY_DUBINS_HPP

#include <array>
#include <optional>
#include <vector>

namespace slipway {

struct Pose2D {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad
};

// The six candidate turn/straight/turn words.
enum class DubinsWord { kLSL, kRSR, kLSR, kRSL, kRLR, kLRL };

const char* dubins_word_name(DubinsWord word);

// A fixed-radius path of three primitives. Segment lengths are arc lengths
// in meters, zero-length segments allowed.
struct DubinsPath {
  Pose2D start;
  Pose2D goal;
  double radius = 1.0;
  DubinsWord word = DubinsWord::kLSL;
  std::array<double, 3> lengths{0.0, 0.0, 0.0};
  double total_length = 0.0;
};

// Length of one candidate word, if that word is geometrically feasible.
std::optional<DubinsPath> dubins_word(const Pose2D& start, const Pose2D& goal,
                                      double radius, DubinsWord word);

// Shortest path over all six words. Throws std::invalid_argument for a
// nonpositive radius.
DubinsPath dubins_shortest(const Pose2D& start, const Pose2D& goal, double radius);

// Pose after arc length s along the path, s clamped to [0, total_length].
Pose2D dubins_sample(const DubinsPath& path, double s);

// Poses at roughly the given spacing, always including both endpoints.
// Throws std::invalid_argument for a nonpositive spacing.
std::vector<Pose2D> sample_path(const DubinsPath& path, double spacing);

}  // namespace slipway

#endif  // SLIPWAY_DUBINS_HPP
