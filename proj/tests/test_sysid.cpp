// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "doctest.h"
#include "json.hpp"
#include "testutil.hpp"

using namespace slipway;

TEST_SUITE_BEGIN("sysid");

namespace {

// Hand-built log of an exactly steady condition; every sample passes the
// steadiness mask and the regressors are exactly rank deficient.
ManeuverLog constant_state_log(const VesselState& state, const ControlInput& control,
                               int samples) {
  ManeuverLog log;
  log.name = "constant";
  for (int i = 0; i < samples; ++i) {
    log.timestamps.push_back(0.1 * i);
    log.states.push_back(state);
    log.controls.push_back(control);
    log.winds.push_back({0.0, 0.0});
  }
  return log;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("standard suite covers straights, circles, and a zigzag") {
  auto suite = standard_maneuver_suite();
  int straight = 0, reverse = 0, port = 0, starboard = 0, zigzag = 0;
  for (const auto& spec : suite) {
    if (spec.zigzag_period > 0.0) ++zigzag;
    else if (spec.alpha > 0.0) ++port;
    else if (spec.alpha < 0.0) ++starboard;
    else if (spec.rpm > 0.0) ++straight;
    else ++reverse;
  }
  CHECK(straight >= 3);
  CHECK(reverse >= 1);
  CHECK(port >= 3);
  CHECK(starboard >= 3);
  CHECK(zigzag >= 1);
}

TEST_CASE("zero thrust from rest stays exactly at rest") {
  VesselParams params;
  ManeuverLog log = simulate_maneuver(params, {"idle", 0.0, 0.0, 20.0, 0.0});
  for (const VesselState& s : log.states) {
    CHECK(s.x == 0.0);
    CHECK(s.u == 0.0);
    CHECK(s.v == 0.0);
    CHECK(s.r == 0.0);
  }
}

TEST_CASE("straight runs never excite sway or yaw") {
  VesselParams params;
  ManeuverLog log = simulate_maneuver(params, {"straight", 1500.0, 0.0, 60.0, 0.0});
  double u_end = log.states.back().u;
  CHECK(u_end > 1.0);
  for (const VesselState& s : log.states) {
    CHECK(s.v == 0.0);
    CHECK(s.r == 0.0);
  }
}

TEST_CASE("zigzag yaw rate changes sign periodically") {
  VesselParams params;
  ManeuverLog log = simulate_maneuver(params, {"zigzag", 1800.0, 0.35, 140.0, 30.0});
  int sign_changes = 0;
  double prev = 0.0;
  for (const VesselState& s : log.states) {
    if (std::abs(s.r) > 0.02) {
      if (prev != 0.0 && s.r * prev < 0.0) ++sign_changes;
      prev = s.r;
    }
  }
  CHECK(sign_changes >= 3);
}

TEST_CASE("maneuver generation validates inputs and is deterministic") {
  VesselParams params;
  auto suite = standard_maneuver_suite();
  CHECK_THROWS_AS(generate_maneuvers(params, suite, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_maneuvers(params, {}, 0.0, 1), std::invalid_argument);

  auto a = generate_maneuvers(params, {suite[0], suite[8]}, 0.01, 42);
  auto b = generate_maneuvers(params, {suite[0], suite[8]}, 0.01, 42);
  auto c = generate_maneuvers(params, {suite[0], suite[8]}, 0.01, 43);
  REQUIRE(a.size() == 2);
  bool any_differs = false;
  for (size_t i = 0; i < a[0].states.size(); ++i) {
    CHECK(a[0].states[i].u == b[0].states[i].u);
    if (a[0].states[i].u != c[0].states[i].u) any_differs = true;
  }
  CHECK(any_differs);
}

TEST_CASE("steadiness mask drops the spin-up and keeps the plateau") {
  VesselParams params;
  ManeuverLog log = simulate_maneuver(params, {"straight", 1400.0, 0.0, 100.0, 0.0});
  auto mask = steady_mask(log, 1.0, 0.01);
  REQUIRE(mask.size() == log.states.size());
  CHECK(!mask.front());
  CHECK(!mask.back());  // edge samples have no centered stencil
  CHECK(!mask[40]);     // 4 s in, still accelerating hard
  CHECK(mask[900]);     // 90 s in, settled
  size_t steady_count = std::count(mask.begin(), mask.end(), true);
  CHECK(steady_count > 300);

  ManeuverLog tiny = constant_state_log({0, 0, 0, 1, 0, 0}, {800, 0}, 3);
  auto tiny_mask = steady_mask(tiny, 1.0, 0.01);
  CHECK(std::count(tiny_mask.begin(), tiny_mask.end(), true) == 0);
}

TEST_CASE("noiseless round trip recovers every damping coefficient within 1%") {
  VesselParams truth;
  SysidOptions opt;
  opt.reference = &truth;
  auto logs = generate_maneuvers(truth, standard_maneuver_suite(), 0.0, 0);

  RegressionReport surge = identify_surge(truth, logs, opt);
  REQUIRE(surge.estimated.size() == 2);
  for (const auto& [name, err] : surge.relative_error) {
    INFO(name, " rel err ", err);
    CHECK(err < 0.01);
  }
  CHECK(surge.sample_count > 100);
  CHECK(surge.condition_number > 1.0);

  RegressionReport swayyaw = identify_sway_yaw(truth, logs, opt);
  REQUIRE(swayyaw.estimated.size() == 7);
  for (const auto& [name, err] : swayyaw.relative_error) {
    INFO(name, " rel err ", err);
    CHECK(err < 0.01);
  }
}

TEST_CASE("round trip survives measurement noise within 10% in the median") {
  VesselParams truth;
  SysidOptions opt;
  opt.reference = &truth;
  std::map<std::string, std::vector<double>> errors;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto logs = generate_maneuvers(truth, standard_maneuver_suite(), 0.01, seed);
    RegressionReport surge = identify_surge(truth, logs, opt);
    RegressionReport swayyaw = identify_sway_yaw(truth, logs, opt);
    for (const auto& [name, err] : surge.relative_error) errors[name].push_back(err);
    for (const auto& [name, err] : swayyaw.relative_error) errors[name].push_back(err);
  }
  REQUIRE(errors.size() == 9);
  for (auto& [name, errs] : errors) {
    double med = median(errs);
    INFO(name, " median rel err ", med);
    CHECK(med < 0.10);
  }
}

TEST_CASE("pseudo-inverse estimates minimize the residual") {
  VesselParams truth;
  auto logs = generate_maneuvers(truth, standard_maneuver_suite(), 0.005, 7);
  RegressionReport surge = identify_surge(truth, logs);
  double xu = surge.estimated.at("Xu");
  double xuu = surge.estimated.at("Xuu");
  double base = surge_residual(truth, logs, xu, xuu);
  CHECK(base == doctest::Approx(surge.residual_norm).epsilon(1e-9));
  for (double f : {0.95, 1.05}) {
    CHECK(surge_residual(truth, logs, xu * f, xuu) > base);
    CHECK(surge_residual(truth, logs, xu, xuu * f) > base);
  }

  RegressionReport swayyaw = identify_sway_yaw(truth, logs);
  std::array<double, 7> est{};
  const char* names[] = {"Yv", "Yvv", "Yr", "Nv", "Nvv", "Nr", "Nrr"};
  for (int j = 0; j < 7; ++j) est[j] = swayyaw.estimated.at(names[j]);
  double base2 = sway_yaw_residual(truth, logs, est);
  CHECK(base2 == doctest::Approx(swayyaw.residual_norm).epsilon(1e-9));
  for (int j = 0; j < 7; ++j) {
    for (double f : {0.95, 1.05}) {
      auto perturbed = est;
      perturbed[j] *= f;
      CHECK(sway_yaw_residual(truth, logs, perturbed) > base2);
    }
  }
}

TEST_CASE("estimates are unchanged when the data is duplicated") {
  VesselParams truth;
  auto logs = generate_maneuvers(truth, standard_maneuver_suite(), 0.01, 3);
  auto doubled = logs;
  doubled.insert(doubled.end(), logs.begin(), logs.end());

  RegressionReport once = identify_sway_yaw(truth, logs);
  RegressionReport twice = identify_sway_yaw(truth, doubled);
  for (const auto& [name, value] : once.estimated) {
    CHECK(twice.estimated.at(name) == doctest::Approx(value).epsilon(1e-9));
  }
  RegressionReport s1 = identify_surge(truth, logs);
  RegressionReport s2 = identify_surge(truth, doubled);
  CHECK(s2.estimated.at("Xu") == doctest::Approx(s1.estimated.at("Xu")).epsilon(1e-9));
  CHECK(s2.estimated.at("Xuu") == doctest::Approx(s1.estimated.at("Xuu")).epsilon(1e-9));
}

TEST_CASE("single-speed data cannot separate linear from quadratic drag") {
  VesselParams truth;
  std::vector<ManeuverLog> logs{constant_state_log({0, 0, 0, 2.4, 0, 0}, {1200, 0}, 400)};
  try {
    identify_surge(truth, logs);
    FAIL("expected an ill-conditioning error");
  } catch (const IllConditionedError& e) {
    CHECK(e.condition_number() > 1e6);
  }
}

TEST_CASE("straight-line logs alone cannot identify sway and yaw") {
  VesselParams truth;
  std::vector<ManeuverSpec> straights;
  for (double rpm : {900.0, 1500.0, 2100.0}) {
    straights.push_back({"s", rpm, 0.0, 80.0, 0.0});
  }
  auto logs = generate_maneuvers(truth, straights, 0.01, 11);
  CHECK_THROWS_AS(identify_sway_yaw(truth, logs), IllConditionedError);
}

TEST_CASE("a single turning circle leaves the modulus terms unidentifiable") {
  VesselParams truth;
  std::vector<ManeuverLog> logs{
      constant_state_log({0, 0, 0, 2.0, -0.3, 0.15}, {1500, 0.3}, 400)};
  CHECK_THROWS_AS(identify_sway_yaw(truth, logs), IllConditionedError);
}

TEST_CASE("maneuver logs round trip through CSV exactly") {
  VesselParams params;
  ManeuverLog log = simulate_maneuver(params, {"circle", 1700.0, 0.25, 10.0, 0.0});
  std::string path = "/tmp/slipway_sysid_roundtrip.csv";
  log.save_csv(path);
  ManeuverLog loaded = ManeuverLog::load_csv(path);
  REQUIRE(loaded.states.size() == log.states.size());
  for (size_t i = 0; i < log.states.size(); ++i) {
    CHECK(loaded.timestamps[i] == log.timestamps[i]);
    CHECK(loaded.states[i].x == log.states[i].x);
    CHECK(loaded.states[i].psi == log.states[i].psi);
    CHECK(loaded.states[i].u == log.states[i].u);
    CHECK(loaded.controls[i].rpm == log.controls[i].rpm);
    CHECK(loaded.controls[i].alpha == log.controls[i].alpha);
  }

  std::FILE* f = std::fopen("/tmp/slipway_sysid_bad.csv", "w");
  std::fputs("nonsense header\n", f);
  std::fclose(f);
  CHECK_THROWS_AS(ManeuverLog::load_csv("/tmp/slipway_sysid_bad.csv"), std::runtime_error);
}

TEST_CASE("log shape violations are rejected") {
  ManeuverLog log = constant_state_log({0, 0, 0, 1, 0, 0}, {800, 0}, 5);
  log.timestamps[3] = log.timestamps[2];  // not strictly increasing
  CHECK_THROWS_AS(log.validate(), std::invalid_argument);

  ManeuverLog log2 = constant_state_log({0, 0, 0, 1, 0, 0}, {800, 0}, 5);
  log2.controls.resize(2);
  CHECK_THROWS_AS(log2.validate(), std::invalid_argument);

  ManeuverLog log3 = constant_state_log({0, 0, 0, 1, 0, 0}, {800, 0}, 5);
  log3.controls.resize(4);  // one shorter is allowed
  CHECK_NOTHROW(log3.validate());
}

TEST_CASE("regression reports serialize to parseable JSON") {
  VesselParams truth;
  SysidOptions opt;
  opt.reference = &truth;
  auto logs = generate_maneuvers(truth, standard_maneuver_suite(), 0.0, 0);
  RegressionReport report = identify_surge(truth, logs, opt);
  auto j = nlohmann::json::parse(report.to_json());
  CHECK(j.contains("estimated"));
  CHECK(j["estimated"].contains("Xu"));
  CHECK(j.contains("residual_norm"));
  CHECK(j.contains("condition_number"));
  CHECK(j["relative_error"]["Xuu"].get<double>() < 0.01);
}

TEST_SUITE_END();
