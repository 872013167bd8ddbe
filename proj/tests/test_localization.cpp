// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/localization.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "slipway/angles.hpp"
#include "slipway/rng.hpp"

namespace slipway {
namespace {

constexpr double kDeg = kPi / 180.0;

double band_rms(double (NoiseBands::*sigma)(double) const, const NoiseBands& b,
                double lo, double hi) {
  const int n = 20000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = lo + (hi - lo) * (i + 0.5) / n;
    const double s = (b.*sigma)(r);
    acc += s * s;
  }
  return std::sqrt(acc / n);
}

Eigen::Matrix<double, 6, 6> chol_sqrt(const Matrix6d& m) {
  return Eigen::LLT<Matrix6d>(m).matrixL();
}

// Polls past the acquisition phase delay until the first camera frame.
std::optional<PoseEstimate> first_frame(SensorSimulator& sim,
                                        const RelativePose& truth,
                                        double range, double t0) {
  for (int i = 0; i < 10; ++i) {
    auto est = sim.measure(truth, range, t0 + 0.05 * i);
    if (est) return est;
  }
  return std::nullopt;
}

TEST_SUITE_BEGIN("localization");

TEST_CASE("accuracy profiles carry the published band values") {
  const NoiseBands req = NoiseBands::requirement();
  CHECK(req.longitudinal_m[0] == 0.67);
  CHECK(req.longitudinal_m[1] == 2.14);
  CHECK(req.longitudinal_m[2] == 3.58);
  CHECK(req.lateral_m[0] == 0.37);
  CHECK(req.lateral_m[1] == 1.33);
  CHECK(req.lateral_m[2] == 2.90);
  for (int i = 0; i < 3; ++i) CHECK(req.heading_deg[i] == 3.0);
  CHECK(req.band_edges[0] == 23.0);
  CHECK(req.band_edges[1] == 36.0);
  CHECK(req.camera_range == 60.0);

  const NoiseBands meas = NoiseBands::measured();
  CHECK(meas.longitudinal_m[0] == 0.58);
  CHECK(meas.lateral_m[0] == 0.26);
  CHECK(meas.heading_deg[0] == 2.3);
  CHECK(meas.longitudinal_m[1] == req.longitudinal_m[1]);
  CHECK(meas.lateral_m[2] == req.lateral_m[2]);

  const NoiseBands zero = NoiseBands::zero();
  for (int i = 0; i < 3; ++i) {
    CHECK(zero.longitudinal_m[i] == 0.0);
    CHECK(zero.lateral_m[i] == 0.0);
    CHECK(zero.heading_deg[i] == 0.0);
  }
  CHECK(zero.init_bias_sigma_pos == 0.0);
}

TEST_CASE("profile validation rejects malformed bands") {
  NoiseBands b;
  b.lateral_m[1] = -0.1;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = NoiseBands();
  b.band_edges[1] = b.band_edges[0];
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = NoiseBands();
  b.camera_range = 30.0;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = NoiseBands();
  b.camera_jitter_s = 0.2;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  b = NoiseBands();
  b.camera_rate_hz = 0.0;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
}

TEST_CASE("config loading selects a profile and applies overrides") {
  Config cfg;
  cfg.set("noise.profile", "requirement");
  cfg.set_double("noise.lateral_m_near", 0.5);
  const NoiseBands b = NoiseBands::from_config(cfg);
  CHECK(b.lateral_m[0] == 0.5);
  CHECK(b.lateral_m[1] == 1.33);
  CHECK(b.longitudinal_m[0] == 0.67);

  Config bad;
  bad.set("noise.profile", "imaginary");
  CHECK_THROWS_AS(NoiseBands::from_config(bad), std::invalid_argument);
}

TEST_CASE("camera sigma ramps reproduce each band value in RMS") {
  for (const NoiseBands& b :
       {NoiseBands::requirement(), NoiseBands::measured()}) {
    const double edges[4] = {0.0, b.band_edges[0], b.band_edges[1],
                             b.camera_range};
    const double* targets[3] = {b.longitudinal_m, b.lateral_m, b.heading_deg};
    double (NoiseBands::*sigmas[3])(double) const = {
        &NoiseBands::sigma_longitudinal, &NoiseBands::sigma_lateral,
        &NoiseBands::sigma_heading};
    const double scale[3] = {1.0, 1.0, kDeg};
    for (int f = 0; f < 3; ++f) {
      for (int band = 0; band < 3; ++band) {
        const double rms =
            band_rms(sigmas[f], b, edges[band], edges[band + 1]);
        const double want = targets[f][band] * scale[f];
        CHECK(rms == doctest::Approx(want).epsilon(1e-3));
      }
    }
    // Sigma grows with range while bands grow, and the satellite fallback
    // holds the outer value.
    CHECK(b.sigma_lateral(5.0) < b.sigma_lateral(20.0));
    CHECK(b.sigma_lateral(20.0) < b.sigma_lateral(30.0));
    CHECK(b.sigma_lateral(30.0) < b.sigma_lateral(50.0));
    CHECK(b.sigma_lateral(60.0) == b.lateral_m[2]);
    CHECK(b.sigma_lateral(200.0) == b.lateral_m[2]);
  }
}

TEST_CASE("measurement source switches at the camera range") {
  SensorSimulator sim(NoiseBands::measured(), 7);
  RelativePose truth{40.0, 1.0, 0.2};
  // Far away every system tick yields a satellite fix.
  for (int k = 0; k < 20; ++k) {
    auto est = sim.measure(truth, 100.0, 0.1 * k);
    REQUIRE(est.has_value());
    CHECK(est->source == MeasurementSource::kGnssIns);
    CHECK(est->timestamp == doctest::Approx(0.1 * k));
  }
  // Inside the camera range frames arrive near 6.9 Hz, not at 10 Hz.
  SensorSimulator cam(NoiseBands::measured(), 7);
  std::vector<double> arrivals;
  for (int k = 0; k < 3000; ++k) {
    const double t = 0.01 * k;
    auto est = cam.measure(truth, 10.0, t);
    if (est) {
      CHECK(est->source == MeasurementSource::kCameraFused);
      arrivals.push_back(t);
    }
  }
  const double expected = 30.0 * 6.9;
  CHECK(arrivals.size() > expected - 10);
  CHECK(arrivals.size() < expected + 10);
  for (std::size_t i = 1; i < arrivals.size(); ++i) {
    const double gap = arrivals[i] - arrivals[i - 1];
    CHECK(gap > 0.12);
    CHECK(gap < 0.18);
  }
}

TEST_CASE("zero noise reproduces the truth and skips the bias") {
  SensorSimulator sim(NoiseBands::zero(), 99);
  RelativePose truth{12.0, -0.5, 0.3};
  auto cam = first_frame(sim, truth, 10.0, 10.0);
  REQUIRE(cam.has_value());
  CHECK(cam->pose.longitudinal == doctest::Approx(12.0).epsilon(1e-15));
  CHECK(cam->pose.lateral == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(cam->pose.heading == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(cam->covariance.norm() == 0.0);
  auto gnss = sim.measure(truth, 100.0, 20.0);
  REQUIRE(gnss.has_value());
  CHECK(gnss->pose.longitudinal == doctest::Approx(12.0).epsilon(1e-15));
  CHECK(gnss->pose.lateral == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("initialization bias is constant, satellite-only, and seeded") {
  NoiseBands b = NoiseBands::zero();
  b.init_bias_sigma_pos = 0.1;
  b.init_bias_sigma_heading_deg = 0.5;
  SensorSimulator sim(b, 1234);
  RelativePose truth{50.0, 0.0, 0.0};
  auto first = sim.measure(truth, 100.0, 0.0);
  auto second = sim.measure(truth, 100.0, 0.1);
  REQUIRE(first.has_value());
  REQUIRE(second.has_value());
  const double bias_long = first->pose.longitudinal - truth.longitudinal;
  CHECK(bias_long != 0.0);
  CHECK(second->pose.longitudinal - truth.longitudinal ==
        doctest::Approx(bias_long).epsilon(1e-15));
  // The camera path measures the trailer directly and has no bias.
  auto cam = first_frame(sim, truth, 10.0, 1.0);
  REQUIRE(cam.has_value());
  CHECK(cam->pose.longitudinal == doctest::Approx(50.0).epsilon(1e-15));
  // Same seed, same bias; different seed, different bias.
  SensorSimulator again(b, 1234);
  auto rep = again.measure(truth, 100.0, 0.0);
  REQUIRE(rep.has_value());
  CHECK(rep->pose.longitudinal == first->pose.longitudinal);
  SensorSimulator other(b, 1235);
  auto alt = other.measure(truth, 100.0, 0.0);
  REQUIRE(alt.has_value());
  CHECK(alt->pose.longitudinal != first->pose.longitudinal);
}

TEST_CASE("measurement streams are reproducible per seed") {
  RelativePose truth{15.0, 2.0, -0.4};
  SensorSimulator a(NoiseBands::measured(), 42);
  SensorSimulator b(NoiseBands::measured(), 42);
  SensorSimulator c(NoiseBands::measured(), 43);
  bool diverged = false;
  for (int k = 0; k < 500; ++k) {
    const double t = 0.1 * k;
    const double range = (k < 250) ? 80.0 : 15.0;
    auto ea = a.measure(truth, range, t);
    auto eb = b.measure(truth, range, t);
    auto ec = c.measure(truth, range, t);
    CHECK(ea.has_value() == eb.has_value());
    if (ea && eb) {
      CHECK(ea->pose.longitudinal == eb->pose.longitudinal);
      CHECK(ea->pose.lateral == eb->pose.lateral);
      CHECK(ea->pose.heading == eb->pose.heading);
    }
    if (ea.has_value() != ec.has_value()) {
      diverged = true;
    } else if (ea && ec && ea->pose.longitudinal != ec->pose.longitudinal) {
      diverged = true;
    }
  }
  CHECK(diverged);
}

TEST_CASE("empirical band accuracy stays within 15 percent of the profile") {
  for (const NoiseBands& b :
       {NoiseBands::requirement(), NoiseBands::measured()}) {
    NoiseBands clean = b;
    clean.init_bias_sigma_pos = 0.0;
    clean.init_bias_sigma_heading_deg = 0.0;
    SensorSimulator sim(clean, 2026);
    auto ranges_rng = make_rng(2026, "band-ranges");
    RelativePose truth{0.0, 0.0, 0.1};
    const double edges[4] = {0.0, b.band_edges[0], b.band_edges[1],
                             b.camera_range};
    double t = 0.0;
    for (int band = 0; band < 3; ++band) {
      std::uniform_real_distribution<double> pick(edges[band],
                                                  edges[band + 1]);
      double s_long = 0.0, s_lat = 0.0, s_head = 0.0;
      int n = 0;
      while (n < 6000) {
        t += 0.2;  // longer than one frame, so at most the first call misses
        auto est = sim.measure(truth, pick(ranges_rng), t);
        if (!est) continue;
        const double e_long = est->pose.longitudinal - truth.longitudinal;
        const double e_lat = est->pose.lateral - truth.lateral;
        const double e_head = angle_diff(est->pose.heading, truth.heading);
        s_long += e_long * e_long;
        s_lat += e_lat * e_lat;
        s_head += e_head * e_head;
        ++n;
      }
      CHECK(std::sqrt(s_long / n) ==
            doctest::Approx(b.longitudinal_m[band]).epsilon(0.15));
      CHECK(std::sqrt(s_lat / n) ==
            doctest::Approx(b.lateral_m[band]).epsilon(0.15));
      CHECK(std::sqrt(s_head / n) ==
            doctest::Approx(b.heading_deg[band] * kDeg).epsilon(0.15));
    }
  }
}

TEST_CASE("relative pose round trips through the world frame") {
  auto rng = make_rng(5, "poses");
  std::uniform_real_distribution<double> span(-80.0, 80.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int k = 0; k < 200; ++k) {
    Pose2D vessel{span(rng), span(rng), ang(rng)};
    Pose2D trailer{span(rng), span(rng), ang(rng)};
    const RelativePose rel = relative_pose(vessel, trailer);
    const Pose2D back = vessel_pose_from_relative(trailer, rel);
    CHECK(back.x == doctest::Approx(vessel.x).epsilon(1e-12));
    CHECK(back.y == doctest::Approx(vessel.y).epsilon(1e-12));
    CHECK(std::abs(angle_diff(back.theta, vessel.theta)) < 1e-12);
  }
  // A trailer dead ahead is purely longitudinal.
  const RelativePose ahead =
      relative_pose(Pose2D{0.0, 0.0, kPi / 2.0}, Pose2D{0.0, 30.0, kPi / 2.0});
  CHECK(ahead.longitudinal == doctest::Approx(30.0));
  CHECK(ahead.lateral == doctest::Approx(0.0).scale(1.0));
  CHECK(ahead.heading == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("prediction grows uncertainty and validates its inputs") {
  PoseEstimate seed;
  seed.pose = {10.0, 1.0, 0.2};
  seed.covariance = Eigen::Vector3d(0.1, 0.1, 0.01).asDiagonal();
  KalmanState s = kf_init(seed);
  const double trace0 = s.P.trace();
  KalmanState s1 = kf_predict(s, 0.1);
  CHECK(s1.P.trace() > trace0);
  CHECK(s1.timestamp == doctest::Approx(0.1));
  KalmanState s2 = kf_predict(s1, 0.1);
  CHECK(s2.P.trace() > s1.P.trace());
  // Position advances with the velocity states.
  KalmanState moving = s;
  moving.x(3) = 2.0;
  CHECK(kf_predict(moving, 0.5).x(0) == doctest::Approx(11.0));
  CHECK_THROWS_AS(kf_predict(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kf_predict(s, -0.1), std::invalid_argument);
  KalmanState broken = s;
  broken.P(0, 0) = -1.0;
  CHECK_THROWS_AS(kf_predict(broken, 0.1), std::invalid_argument);
}

TEST_CASE("update obeys the limiting cases and rejects bad covariances") {
  PoseEstimate seed;
  seed.pose = {10.0, 1.0, 0.2};
  seed.covariance = Eigen::Vector3d(1.0, 1.0, 0.1).asDiagonal();
  KalmanState prior = kf_predict(kf_init(seed), 0.1);

  PoseEstimate z;
  z.pose = {11.0, 0.5, 0.1};
  z.timestamp = 0.1;

  // Vanishing measurement noise pins the pose states to the measurement.
  z.covariance = 1e-12 * Eigen::Matrix3d::Identity();
  KalmanState sharp = kf_update(prior, z);
  CHECK(sharp.x(0) == doctest::Approx(11.0).epsilon(1e-6));
  CHECK(sharp.x(1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sharp.x(2) == doctest::Approx(0.1).epsilon(1e-6));

  // Unbounded noise, infinity included, leaves the prior untouched.
  z.covariance = Eigen::Vector3d(std::numeric_limits<double>::infinity(),
                                 1e40, 1e40)
                     .asDiagonal();
  KalmanState none = kf_update(prior, z);
  CHECK((none.x - prior.x).norm() < 1e-8);
  CHECK((none.P - prior.P).norm() < 1e-6);

  // The measured subspace never gets less certain.
  z.covariance = Eigen::Vector3d(0.5, 0.5, 0.05).asDiagonal();
  KalmanState post = kf_update(prior, z);
  const Eigen::Matrix3d shrink =
      prior.P.topLeftCorner<3, 3>() - post.P.topLeftCorner<3, 3>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(shrink);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);

  PoseEstimate bad = z;
  bad.covariance(0, 0) = -1.0;
  CHECK_THROWS_AS(kf_update(prior, bad), std::invalid_argument);
  bad.covariance = Eigen::Matrix3d::Identity();
  bad.covariance(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(kf_update(prior, bad), std::invalid_argument);
}

TEST_CASE("heading innovations wrap across the seam") {
  PoseEstimate seed;
  seed.pose = {0.0, 0.0, kPi - 0.05};
  seed.covariance = Eigen::Vector3d(0.1, 0.1, 0.1).asDiagonal();
  KalmanState prior = kf_init(seed);
  PoseEstimate z;
  z.pose = {0.0, 0.0, -kPi + 0.05};
  z.covariance = 1e-10 * Eigen::Matrix3d::Identity();
  KalmanState post = kf_update(prior, z);
  // The short way around passes through pi, not through zero.
  CHECK(std::abs(angle_diff(post.x(2), -kPi + 0.05)) < 1e-4);
  CHECK(std::abs(post.x(2)) > 3.0);
}

TEST_CASE("filtering beats raw camera headings over a long stretch") {
  NoiseBands b = NoiseBands::measured();  // 2.3 degree heading band
  b.init_bias_sigma_pos = 0.0;
  b.init_bias_sigma_heading_deg = 0.0;
  SensorSimulator sim(b, 77);
  const RelativePose truth{15.0, 0.0, 0.25};
  KalmanConfig cfg;
  KalmanState state;
  bool started = false;
  double raw_sq = 0.0, filt_sq = 0.0;
  int raw_n = 0, filt_n = 0;
  const double dt = 0.1;
  for (int k = 0; k < 500; ++k) {
    const double t = dt * (k + 1);
    if (started) state = kf_predict(state, dt, cfg);
    auto est = sim.measure(truth, 15.0, t);
    if (est) {
      const double raw_err = angle_diff(est->pose.heading, truth.heading);
      raw_sq += raw_err * raw_err;
      ++raw_n;
      if (!started) {
        state = kf_init(*est, cfg);
        started = true;
      } else {
        state = kf_update(state, *est);
      }
    }
    if (started) {
      const double err = angle_diff(state.x(2), truth.heading);
      filt_sq += err * err;
      ++filt_n;
    }
  }
  REQUIRE(raw_n > 300);
  REQUIRE(filt_n > 450);
  const double raw_rms = std::sqrt(raw_sq / raw_n);
  const double filt_rms = std::sqrt(filt_sq / filt_n);
  CHECK(filt_rms < raw_rms);
}

TEST_CASE("estimator consistency holds on a matched synthetic run") {
  // Truth follows the same constant-velocity model the filter assumes, so
  // the normalized squared error must behave like a chi-square with six
  // degrees of freedom.
  KalmanConfig cfg;
  const double dt = 0.1;
  auto rng = make_rng(31337, "nees");
  std::normal_distribution<double> n01(0.0, 1.0);

  KalmanState state;
  state.x << 20.0, 1.0, 0.3, -0.5, 0.05, 0.01;
  state.P = Matrix6d::Zero();
  state.P.diagonal() << 0.25, 0.25, 0.01, 0.04, 0.04, 0.004;
  Vector6d truth = state.x;
  {
    const Eigen::Matrix<double, 6, 6> l = chol_sqrt(state.P);
    Vector6d w;
    for (int i = 0; i < 6; ++i) w(i) = n01(rng);
    truth += l * w;
  }

  Matrix6d q = Matrix6d::Zero();
  {
    const double dens[3] = {cfg.q_pos, cfg.q_pos, cfg.q_heading};
    for (int i = 0; i < 3; ++i) {
      q(i, i) = dens[i] * dt * dt * dt / 3.0;
      q(i, i + 3) = q(i + 3, i) = dens[i] * dt * dt / 2.0;
      q(i + 3, i + 3) = dens[i] * dt;
    }
  }
  const Eigen::Matrix<double, 6, 6> lq = chol_sqrt(q);
  Matrix6d f = Matrix6d::Identity();
  f.block<3, 3>(0, 3) = dt * Eigen::Matrix3d::Identity();

  const Eigen::Vector3d rdiag(0.37 * 0.37, 0.37 * 0.37, 0.05 * 0.05);
  int inside = 0;
  const int steps = 500;
  for (int k = 0; k < steps; ++k) {
    Vector6d w;
    for (int i = 0; i < 6; ++i) w(i) = n01(rng);
    truth = f * truth + lq * w;
    truth(2) = wrap_to_pi(truth(2));
    state = kf_predict(state, dt, cfg);

    PoseEstimate z;
    z.pose.longitudinal = truth(0) + std::sqrt(rdiag(0)) * n01(rng);
    z.pose.lateral = truth(1) + std::sqrt(rdiag(1)) * n01(rng);
    z.pose.heading = wrap_to_pi(truth(2) + std::sqrt(rdiag(2)) * n01(rng));
    z.covariance = rdiag.asDiagonal();
    z.timestamp = state.timestamp;
    state = kf_update(state, z);

    Vector6d err = state.x - truth;
    err(2) = angle_diff(state.x(2), truth(2));
    const double nees = err.dot(state.P.ldlt().solve(err));
    // Central 95 percent band of chi-square with 6 degrees of freedom.
    if (nees > 1.2373 && nees < 14.4494) ++inside;
  }
  CHECK(inside >= static_cast<int>(0.9 * steps));
}

TEST_CASE("ten hertz output continues between camera frames") {
  NoiseBands b = NoiseBands::measured();
  b.init_bias_sigma_pos = 0.0;
  b.init_bias_sigma_heading_deg = 0.0;
  SensorSimulator sim(b, 11);
  const RelativePose truth{18.0, 0.5, 0.1};
  KalmanState state;
  bool started = false;
  int outputs = 0;
  int corrections = 0;
  const double dt = 0.1;
  for (int k = 0; k < 300; ++k) {
    const double t = dt * (k + 1);
    if (started) state = kf_predict(state, dt);
    auto est = sim.measure(truth, 18.0, t);
    if (est) {
      state = started ? kf_update(state, *est) : kf_init(*est);
      started = true;
      ++corrections;
    }
    if (started) {
      const PoseEstimate out = to_pose_estimate(
          state, est ? MeasurementSource::kCameraFused
                     : MeasurementSource::kGnssIns);
      CHECK(out.timestamp == doctest::Approx(t));
      CHECK(out.covariance.isApprox(out.covariance.transpose(), 1e-12));
      ++outputs;
    }
  }
  // Every system tick after startup produced an estimate even though the
  // camera only corrected at roughly seven hertz.
  CHECK(outputs >= 298);
  CHECK(corrections < 230);
  CHECK(corrections > 180);
}

TEST_SUITE_END();

}  // namespace
}  // namespace slipway
