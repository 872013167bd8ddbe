// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_SYSID_HPP
#define SLIPWAY_SYSID_HPP

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "slipway/vessel.hpp"

namespace slipway {

// One scripted run of the plant. A positive zigzag_period flips the azimuth
// sign every half period; otherwise rpm and alpha are held constant.
struct ManeuverSpec {
  std::string name;
  double rpm = 0.0;
  double alpha = 0.0;
  double duration = 100.0;
  double zigzag_period = 0.0;
};

// Straight lines forward and reverse, turning circles at several throttle
// and azimuth settings in both directions, and one zigzag.
std::vector<ManeuverSpec> standard_maneuver_suite();

struct ManeuverLog {
  std::string name;
  std::vector<double> timestamps;
  std::vector<VesselState> states;
  std::vector<ControlInput> controls;  // same length as states, or one shorter
  std::vector<WindCondition> winds;

  void validate() const;
  void save_csv(const std::string& path) const;
  static ManeuverLog load_csv(const std::string& path);
};

ManeuverLog simulate_maneuver(const VesselParams& params, const ManeuverSpec& spec,
                              double dt = 0.1);

// Runs the whole suite in calm water and adds zero-mean Gaussian measurement
// noise to the recorded u, v, r. Throws std::invalid_argument for negative
// noise levels.
std::vector<ManeuverLog> generate_maneuvers(const VesselParams& params,
                                            const std::vector<ManeuverSpec>& suite,
                                            double noise_std, std::uint64_t seed,
                                            double dt = 0.1);

class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double condition_number);
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

struct SysidOptions {
  double steady_window = 1.0;      // s, half width of the acceleration stencil
  double steady_threshold = 0.01;  // m/s^2 and rad/s^2
  double max_condition = 1e6;      // of the RMS-normalized regressor
  double min_excitation = 0.02;    // RMS floor on the regressed velocities
  const VesselParams* reference = nullptr;  // fills relative_error when set
};

struct RegressionReport {
  std::map<std::string, double> estimated;
  std::map<std::string, double> relative_error;  // empty without a reference
  double residual_norm = 0.0;
  double condition_number = 0.0;
  int sample_count = 0;

  std::string to_json() const;
};

// True where the centered finite-difference estimates of du/dt, dv/dt and
// dr/dt are all below the threshold. The stencil skips the center sample, so
// measurement noise at a sample never influences its own mask entry.
std::vector<bool> steady_mask(const ManeuverLog& log, double window, double threshold);

// Regresses Xu, Xuu from steady straight-running samples, where thrust
// balances surge damping up to a small finite-difference inertial correction.
// Inertia and thrust constants of `known` are trusted; its damping entries
// are ignored.
RegressionReport identify_surge(const VesselParams& known,
                                const std::vector<ManeuverLog>& logs,
                                const SysidOptions& options = {});

// Regresses Yv, Yvv, Yr, Nv, Nvv, Nr, Nrr from steady turning samples via a
// stacked sway/yaw force and moment balance, with the same inertial
// correction on the right-hand side.
RegressionReport identify_sway_yaw(const VesselParams& known,
                                   const std::vector<ManeuverLog>& logs,
                                   const SysidOptions& options = {});

// Residual 2-norm of the corresponding regression system at the given
// coefficients, for goodness-of-fit probes.
double surge_residual(const VesselParams& known, const std::vector<ManeuverLog>& logs,
                      double Xu, double Xuu, const SysidOptions& options = {});
double sway_yaw_residual(const VesselParams& known, const std::vector<ManeuverLog>& logs,
                         const std::array<double, 7>& coeffs,
                         const SysidOptions& options = {});

}  // namespace slipway

#endif  // SLIPWAY_SYSID_HPP
