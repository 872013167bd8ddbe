// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/dubins.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "slipway/angles.hpp"

namespace slipway {
namespace {

double mod2pi(double a) {
  double m = std::fmod(a, 2.0 * kPi);
  if (m < 0.0) m += 2.0 * kPi;
  return m;
}

struct WordAngles {
  double t, p, q;  // in turn-radius units
};

// Closed forms in the normalized frame: start at the origin pointing along
// alpha, goal at distance d on the x axis pointing along beta.
std::optional<WordAngles> solve_word(DubinsWord word, double alpha, double beta,
                                     double d) {
  double sa = std::sin(alpha), ca = std::cos(alpha);
  double sb = std::sin(beta), cb = std::cos(beta);
  double c_ab = std::cos(alpha - beta);
  auto sqrt_clamped = [](double v) -> std::optional<double> {
    if (v < -1e-12) return std::nullopt;
    return std::sqrt(std::max(v, 0.0));
  };
  switch (word) {
    case DubinsWord::kLSL: {
      double p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
      auto p = sqrt_clamped(p_sq);
      if (!p) return std::nullopt;
      double tmp = std::atan2(cb - ca, d + sa - sb);
      return WordAngles{mod2pi(tmp - alpha), *p, mod2pi(beta - tmp)};
    }
    case DubinsWord::kRSR: {
      double p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
      auto p = sqrt_clamped(p_sq);
      if (!p) return std::nullopt;
      double tmp = std::atan2(ca - cb, d - sa + sb);
      return WordAngles{mod2pi(alpha - tmp), *p, mod2pi(tmp - beta)};
    }
    case DubinsWord::kLSR: {
      double p_sq = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
      auto p = sqrt_clamped(p_sq);
      if (!p) return std::nullopt;
      double tmp = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, *p);
      return WordAngles{mod2pi(tmp - alpha), *p, mod2pi(tmp - mod2pi(beta))};
    }
    case DubinsWord::kRSL: {
      double p_sq = d * d - 2.0 + 2.0 * c_ab - 2.0 * d * (sa + sb);
      auto p = sqrt_clamped(p_sq);
      if (!p) return std::nullopt;
      double tmp = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, *p);
      return WordAngles{mod2pi(alpha - tmp), *p, mod2pi(beta - tmp)};
    }
    case DubinsWord::kRLR: {
      double tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
      if (std::abs(tmp) > 1.0) return std::nullopt;
      double p = mod2pi(2.0 * kPi - std::acos(tmp));
      double t = mod2pi(alpha - std::atan2(ca - cb, d - sa + sb) + mod2pi(p / 2.0));
      double q = mod2pi(alpha - beta - t + mod2pi(p));
      return WordAngles{t, p, q};
    }
    case DubinsWord::kLRL: {
      double tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
      if (std::abs(tmp) > 1.0) return std::nullopt;
      double p = mod2pi(2.0 * kPi - std::acos(tmp));
      double t = mod2pi(-alpha - std::atan2(ca - cb, d + sa - sb) + p / 2.0);
      double q = mod2pi(mod2pi(beta) - alpha - t + mod2pi(p));
      return WordAngles{t, p, q};
    }
  }
  return std::nullopt;
}

// Segment kinds per word, 'L' left turn, 'S' straight, 'R' right turn.
const char* word_segments(DubinsWord word) {
  switch (word) {
    case DubinsWord::kLSL: return "LSL";
    case DubinsWord::kRSR: return "RSR";
    case DubinsWord::kLSR: return "LSR";
    case DubinsWord::kRSL: return "RSL";
    case DubinsWord::kRLR: return "RLR";
    case DubinsWord::kLRL: return "LRL";
  }
  return "???";
}

Pose2D advance(const Pose2D& pose, char kind, double length, double radius) {
  Pose2D out = pose;
  if (length <= 0.0) return out;
  if (kind == 'S') {
    out.x += length * std::cos(pose.theta);
    out.y += length * std::sin(pose.theta);
    return out;
  }
  double phi = length / radius;
  if (kind == 'L') {
    double cx = pose.x - radius * std::sin(pose.theta);
    double cy = pose.y + radius * std::cos(pose.theta);
    out.theta = pose.theta + phi;
    out.x = cx + radius * std::sin(out.theta);
    out.y = cy - radius * std::cos(out.theta);
  } else {
    double cx = pose.x + radius * std::sin(pose.theta);
    double cy = pose.y - radius * std::cos(pose.theta);
    out.theta = pose.theta - phi;
    out.x = cx - radius * std::sin(out.theta);
    out.y = cy + radius * std::cos(out.theta);
  }
  return out;
}

}  // namespace

const char* dubins_word_name(DubinsWord word) { return word_segments(word); }

std::optional<DubinsPath> dubins_word(const Pose2D& start, const Pose2D& goal,
                                      double radius, DubinsWord word) {
  if (!(radius > 0.0)) throw std::invalid_argument("dubins: radius must be positive");
  double dx = goal.x - start.x;
  double dy = goal.y - start.y;
  double d = std::hypot(dx, dy) / radius;
  double phi = std::atan2(dy, dx);
  if (dx == 0.0 && dy == 0.0) phi = 0.0;
  double alpha = mod2pi(start.theta - phi);
  double beta = mod2pi(goal.theta - phi);
  auto angles = solve_word(word, alpha, beta, d);
  if (!angles) return std::nullopt;
  DubinsPath path;
  path.start = start;
  path.goal = goal;
  path.radius = radius;
  path.word = word;
  path.lengths = {angles->t * radius, angles->p * radius, angles->q * radius};
  path.total_length = path.lengths[0] + path.lengths[1] + path.lengths[2];
  return path;
}

DubinsPath dubins_shortest(const Pose2D& start, const Pose2D& goal, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("dubins: radius must be positive");
  std::optional<DubinsPath> best;
  for (DubinsWord word : {DubinsWord::kLSL, DubinsWord::kRSR, DubinsWord::kLSR,
                          DubinsWord::kRSL, DubinsWord::kRLR, DubinsWord::kLRL}) {
    auto candidate = dubins_word(start, goal, radius, word);
    if (!candidate) continue;
    if (!best || candidate->total_length < best->total_length) best = candidate;
  }
  // The outer tangent words always exist, so best is never empty.
  return *best;
}

Pose2D dubins_sample(const DubinsPath& path, double s) {
  s = std::clamp(s, 0.0, path.total_length);
  const char* kinds = word_segments(path.word);
  Pose2D pose = path.start;
  for (int i = 0; i < 3; ++i) {
    double seg = path.lengths[i];
    if (s <= seg) {
      pose = advance(pose, kinds[i], s, path.radius);
      pose.theta = wrap_to_pi(pose.theta);
      return pose;
    }
    pose = advance(pose, kinds[i], seg, path.radius);
    s -= seg;
  }
  pose.theta = wrap_to_pi(pose.theta);
  return pose;
}

std::vector<Pose2D> sample_path(const DubinsPath& path, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("sample_path: spacing must be positive");
  std::vector<Pose2D> poses;
  int n = std::max(1, static_cast<int>(std::ceil(path.total_length / spacing)));
  poses.reserve(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    double s = path.total_length * static_cast<double>(i) / n;
    poses.push_back(dubins_sample(path, s));
  }
  return poses;
}

}  // namespace slipway
