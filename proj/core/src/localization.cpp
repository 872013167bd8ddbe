// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/localization.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "slipway/angles.hpp"
#include "slipway/rng.hpp"

namespace slipway {
namespace {

constexpr double kDeg = kPi / 180.0;
constexpr double kVarianceCap = 1e30;
constexpr double kPsdTol = 1e-9;

// Next knot b so that a linear sigma ramp a -> b has RMS equal to target
// over the band: (a^2 + a b + b^2) / 3 = target^2.
double solve_rms_knot(double a, double target) {
  const double disc = 12.0 * target * target - 3.0 * a * a;
  if (disc < 0.0) {
    throw std::invalid_argument(
        "noise bands decrease too steeply for an RMS-matched ramp");
  }
  return 0.5 * (-a + std::sqrt(disc));
}

// Piecewise-linear sigma over the camera regime. Knots at range 0, the two
// band edges, and the camera range are solved so the RMS over each band
// reproduces the band value; past the camera range the outer value holds.
double camera_sigma(const NoiseBands& b, const double band_values[3],
                    double range) {
  if (range >= b.camera_range) return band_values[2];
  double knots[4];
  knots[0] = 0.3 * band_values[0];
  knots[1] = solve_rms_knot(knots[0], band_values[0]);
  knots[2] = solve_rms_knot(knots[1], band_values[1]);
  knots[3] = solve_rms_knot(knots[2], band_values[2]);
  const double edges[4] = {0.0, b.band_edges[0], b.band_edges[1],
                           b.camera_range};
  for (int i = 3; i > 0; --i) {
    if (range >= edges[i - 1]) {
      const double f = (range - edges[i - 1]) / (edges[i] - edges[i - 1]);
      return knots[i - 1] + f * (knots[i] - knots[i - 1]);
    }
  }
  return knots[0];
}

void require_psd(const Eigen::MatrixXd& m, const char* what) {
  if (!m.isApprox(m.transpose(), 1e-9)) {
    throw std::invalid_argument(std::string(what) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() < -kPsdTol) {
    throw std::invalid_argument(std::string(what) +
                                " is not positive semidefinite");
  }
}

Matrix6d transition(double dt) {
  Matrix6d f = Matrix6d::Identity();
  f.block<3, 3>(0, 3) = dt * Eigen::Matrix3d::Identity();
  return f;
}

Matrix6d process_noise(double dt, const KalmanConfig& cfg) {
  Matrix6d q = Matrix6d::Zero();
  const double dens[3] = {cfg.q_pos, cfg.q_pos, cfg.q_heading};
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  for (int i = 0; i < 3; ++i) {
    q(i, i) = dens[i] * dt3 / 3.0;
    q(i, i + 3) = q(i + 3, i) = dens[i] * dt2 / 2.0;
    q(i + 3, i + 3) = dens[i] * dt;
  }
  return q;
}

}  // namespace

RelativePose relative_pose(const Pose2D& vessel, const Pose2D& trailer) {
  const double dx = trailer.x - vessel.x;
  const double dy = trailer.y - vessel.y;
  const double c = std::cos(vessel.theta);
  const double s = std::sin(vessel.theta);
  RelativePose rel;
  rel.longitudinal = c * dx + s * dy;
  rel.lateral = -s * dx + c * dy;
  rel.heading = wrap_to_pi(trailer.theta - vessel.theta);
  return rel;
}

Pose2D vessel_pose_from_relative(const Pose2D& trailer, const RelativePose& rel) {
  Pose2D vessel;
  vessel.theta = wrap_to_pi(trailer.theta - rel.heading);
  const double c = std::cos(vessel.theta);
  const double s = std::sin(vessel.theta);
  vessel.x = trailer.x - (c * rel.longitudinal - s * rel.lateral);
  vessel.y = trailer.y - (s * rel.longitudinal + c * rel.lateral);
  return vessel;
}

NoiseBands NoiseBands::requirement() { return NoiseBands{}; }

NoiseBands NoiseBands::measured() {
  NoiseBands b;
  b.heading_deg[0] = 2.3;
  b.lateral_m[0] = 0.26;
  b.longitudinal_m[0] = 0.58;
  return b;
}

NoiseBands NoiseBands::zero() {
  NoiseBands b;
  for (int i = 0; i < 3; ++i) {
    b.heading_deg[i] = 0.0;
    b.lateral_m[i] = 0.0;
    b.longitudinal_m[i] = 0.0;
  }
  b.camera_jitter_s = 0.0;
  b.init_bias_sigma_pos = 0.0;
  b.init_bias_sigma_heading_deg = 0.0;
  return b;
}

NoiseBands NoiseBands::from_config(const Config& cfg) {
  const std::string profile = cfg.get_string("noise.profile", "measured");
  NoiseBands b;
  if (profile == "requirement") {
    b = requirement();
  } else if (profile == "measured") {
    b = measured();
  } else if (profile == "zero") {
    b = zero();
  } else {
    throw std::invalid_argument("unknown noise profile: " + profile);
  }
  b.band_edges[0] = cfg.get_double("noise.band_edge_near", b.band_edges[0]);
  b.band_edges[1] = cfg.get_double("noise.band_edge_far", b.band_edges[1]);
  const char* band_names[3] = {"near", "mid", "far"};
  for (int i = 0; i < 3; ++i) {
    const std::string tag = band_names[i];
    b.heading_deg[i] =
        cfg.get_double("noise.heading_deg_" + tag, b.heading_deg[i]);
    b.lateral_m[i] = cfg.get_double("noise.lateral_m_" + tag, b.lateral_m[i]);
    b.longitudinal_m[i] =
        cfg.get_double("noise.longitudinal_m_" + tag, b.longitudinal_m[i]);
  }
  b.camera_range = cfg.get_double("noise.camera_range", b.camera_range);
  b.camera_rate_hz = cfg.get_double("noise.camera_rate_hz", b.camera_rate_hz);
  b.system_rate_hz = cfg.get_double("noise.system_rate_hz", b.system_rate_hz);
  b.camera_jitter_s =
      cfg.get_double("noise.camera_jitter_s", b.camera_jitter_s);
  b.init_bias_sigma_pos =
      cfg.get_double("noise.init_bias_sigma_pos", b.init_bias_sigma_pos);
  b.init_bias_sigma_heading_deg = cfg.get_double(
      "noise.init_bias_sigma_heading_deg", b.init_bias_sigma_heading_deg);
  b.validate();
  return b;
}

void NoiseBands::validate() const {
  if (!(band_edges[0] > 0.0) || !(band_edges[1] > band_edges[0])) {
    throw std::invalid_argument("band edges must be increasing and positive");
  }
  if (!(camera_range > band_edges[1])) {
    throw std::invalid_argument("camera range must exceed the far band edge");
  }
  for (int i = 0; i < 3; ++i) {
    if (heading_deg[i] < 0.0 || lateral_m[i] < 0.0 || longitudinal_m[i] < 0.0) {
      throw std::invalid_argument("noise sigmas must be non-negative");
    }
  }
  if (!(camera_rate_hz > 0.0) || !(system_rate_hz > 0.0)) {
    throw std::invalid_argument("sensor rates must be positive");
  }
  if (camera_jitter_s < 0.0 || camera_jitter_s >= 0.5 / camera_rate_hz) {
    throw std::invalid_argument("camera jitter must stay below half a frame");
  }
  if (init_bias_sigma_pos < 0.0 || init_bias_sigma_heading_deg < 0.0) {
    throw std::invalid_argument("bias sigmas must be non-negative");
  }
}

double NoiseBands::sigma_longitudinal(double range) const {
  return camera_sigma(*this, longitudinal_m, range);
}

double NoiseBands::sigma_lateral(double range) const {
  return camera_sigma(*this, lateral_m, range);
}

double NoiseBands::sigma_heading(double range) const {
  return camera_sigma(*this, heading_deg, range) * kDeg;
}

SensorSimulator::SensorSimulator(const NoiseBands& bands, std::uint64_t seed)
    : bands_(bands), rng_(make_rng(seed, "sensor")) {
  bands_.validate();
  std::normal_distribution<double> n01(0.0, 1.0);
  bias_longitudinal_ = bands_.init_bias_sigma_pos * n01(rng_);
  bias_lateral_ = bands_.init_bias_sigma_pos * n01(rng_);
  bias_heading_ = bands_.init_bias_sigma_heading_deg * kDeg * n01(rng_);
}

std::optional<PoseEstimate> SensorSimulator::measure(const RelativePose& truth,
                                                     double range,
                                                     double time) {
  if (!(range >= 0.0) || !std::isfinite(time)) {
    throw std::invalid_argument("range and time must be finite");
  }
  std::normal_distribution<double> n01(0.0, 1.0);
  PoseEstimate est;
  est.timestamp = time;
  const bool camera = range < bands_.camera_range;
  if (camera) {
    // Frames tick on their own clock with uniform jitter; the schedule only
    // advances while the target is in range, which models acquisition on
    // first detection.
    if (next_frame_ < 0.0) {
      std::uniform_real_distribution<double> phase(0.0,
                                                   1.0 / bands_.camera_rate_hz);
      next_frame_ = time + phase(rng_);
    }
    if (time < next_frame_) return std::nullopt;
    std::uniform_real_distribution<double> jitter(-bands_.camera_jitter_s,
                                                  bands_.camera_jitter_s);
    while (next_frame_ <= time) {
      next_frame_ += 1.0 / bands_.camera_rate_hz + jitter(rng_);
    }
    est.source = MeasurementSource::kCameraFused;
  } else {
    est.source = MeasurementSource::kGnssIns;
  }
  const double s_long =
      camera ? bands_.sigma_longitudinal(range) : bands_.longitudinal_m[2];
  const double s_lat =
      camera ? bands_.sigma_lateral(range) : bands_.lateral_m[2];
  const double s_head =
      camera ? bands_.sigma_heading(range) : bands_.heading_deg[2] * kDeg;
  est.pose.longitudinal = truth.longitudinal + s_long * n01(rng_);
  est.pose.lateral = truth.lateral + s_lat * n01(rng_);
  est.pose.heading = wrap_to_pi(truth.heading + s_head * n01(rng_));
  if (!camera) {
    est.pose.longitudinal += bias_longitudinal_;
    est.pose.lateral += bias_lateral_;
    est.pose.heading = wrap_to_pi(est.pose.heading + bias_heading_);
  }
  est.covariance = Eigen::Vector3d(s_long * s_long, s_lat * s_lat,
                                   s_head * s_head)
                       .asDiagonal();
  return est;
}

KalmanState kf_init(const PoseEstimate& first, const KalmanConfig& cfg) {
  require_psd(first.covariance, "measurement covariance");
  KalmanState s;
  s.x.head<3>() << first.pose.longitudinal, first.pose.lateral,
      first.pose.heading;
  s.P.setZero();
  s.P.topLeftCorner<3, 3>() = first.covariance;
  s.P(3, 3) = cfg.init_rate_var_pos;
  s.P(4, 4) = cfg.init_rate_var_pos;
  s.P(5, 5) = cfg.init_rate_var_heading;
  s.timestamp = first.timestamp;
  return s;
}

KalmanState kf_predict(const KalmanState& state, double dt,
                       const KalmanConfig& cfg) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("prediction interval must be positive");
  }
  require_psd(state.P, "state covariance");
  const Matrix6d f = transition(dt);
  KalmanState out;
  out.x = f * state.x;
  out.x(2) = wrap_to_pi(out.x(2));
  out.P = f * state.P * f.transpose() + process_noise(dt, cfg);
  out.timestamp = state.timestamp + dt;
  return out;
}

KalmanState kf_update(const KalmanState& state,
                      const PoseEstimate& measurement) {
  require_psd(state.P, "state covariance");
  Eigen::Matrix3d r = measurement.covariance;
  for (int i = 0; i < 3; ++i) {
    // Capped, so an infinite variance reads as "no information" instead of
    // propagating NaN through the gain.
    r(i, i) = std::min(r(i, i), kVarianceCap);
  }
  require_psd(r, "measurement covariance");
  Eigen::Matrix<double, 3, 6> h = Eigen::Matrix<double, 3, 6>::Zero();
  h.topLeftCorner<3, 3>().setIdentity();
  Eigen::Vector3d innovation(
      measurement.pose.longitudinal - state.x(0),
      measurement.pose.lateral - state.x(1),
      angle_diff(measurement.pose.heading, state.x(2)));
  const Eigen::Matrix3d s_mat = h * state.P * h.transpose() + r;
  const Eigen::Matrix<double, 6, 3> gain =
      state.P * h.transpose() * s_mat.ldlt().solve(Eigen::Matrix3d::Identity());
  KalmanState out;
  out.x = state.x + gain * innovation;
  out.x(2) = wrap_to_pi(out.x(2));
  const Matrix6d ikh = Matrix6d::Identity() - gain * h;
  out.P = ikh * state.P * ikh.transpose() + gain * r * gain.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  out.timestamp = measurement.timestamp;
  return out;
}

PoseEstimate to_pose_estimate(const KalmanState& state,
                              MeasurementSource source) {
  PoseEstimate est;
  est.pose.longitudinal = state.x(0);
  est.pose.lateral = state.x(1);
  est.pose.heading = wrap_to_pi(state.x(2));
  est.covariance = state.P.topLeftCorner<3, 3>();
  est.source = source;
  est.timestamp = state.timestamp;
  return est;
}

}  // namespace slipway
