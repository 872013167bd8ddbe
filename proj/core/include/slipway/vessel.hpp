// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_VESSEL_HPP
#define SLIPWAY_VESSEL_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "slipway/config.hpp"

namespace slipway {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix62d = Eigen::Matrix<double, 6, 2>;

// Planar maneuvering state: pose in the world frame, velocities in the
// body frame.
struct VesselState {
  double x = 0.0;    // m
  double y = 0.0;    // m
  double psi = 0.0;  // rad, heading from world +x, wrapped to (-pi, pi]
  double u = 0.0;    // m/s surge
  double v = 0.0;    // m/s sway
  double r = 0.0;    // rad/s yaw rate

  Vector6d to_vector() const;
  static VesselState from_vector(const Vector6d& z);
  Eigen::Vector3d nu() const { return {u, v, r}; }
};

// Shared command for the twin azimuth engines.
struct ControlInput {
  double rpm = 0.0;    // rev/min, signed
  double alpha = 0.0;  // rad, azimuth angle of both engines
};

// Wind state, direction is where the wind blows from (world frame).
struct WindCondition {
  double speed = 0.0;      // m/s
  double direction = 0.0;  // rad from world +x
};

// Aerodynamic coefficient curves over the relative wind angle. Either the
// parametric one-term trig form or a tabulated curve with linear
// interpolation; both expose derivatives for the optimizer.
class WindCoefficients {
 public:
  WindCoefficients() : WindCoefficients(0.7, 0.825, 0.125) {}
  WindCoefficients(double cx, double cy, double cn);

  static WindCoefficients tabulated(std::vector<double> gamma,
                                    std::vector<double> cx,
                                    std::vector<double> cy,
                                    std::vector<double> cn);
  // CSV columns: gamma_rad, cx, cy, cn. Throws ConfigError on bad input.
  static WindCoefficients from_csv(const std::string& path);

  double cx(double gamma) const;
  double cy(double gamma) const;
  double cn(double gamma) const;
  double dcx(double gamma) const;
  double dcy(double gamma) const;
  double dcn(double gamma) const;

  bool parametric() const { return table_gamma_.empty(); }
  double cx_gain() const { return cx_; }
  double cy_gain() const { return cy_; }
  double cn_gain() const { return cn_; }

 private:
  double interp(const std::vector<double>& values, double gamma) const;
  double slope(const std::vector<double>& values, double gamma) const;

  double cx_ = 0.7;
  double cy_ = 0.825;
  double cn_ = 0.125;
  std::vector<double> table_gamma_;  // strictly increasing, covers [-pi, pi]
  std::vector<double> table_cx_, table_cy_, table_cn_;
};

// Rigid-body and hydrodynamic parameters of the 3DOF maneuvering model,
// plus propulsion and windage geometry. Hydrodynamic derivatives follow the
// usual sign convention, so the stabilizing entries are negative.
struct VesselParams {
  // Inertia including added mass, kg and kg m^2.
  double m11 = 5251.26;
  double m22 = 4077.23;
  double m23 = 13.29;
  double m32 = 1251.01;
  double m33 = 16373.0;

  // Damping derivatives, kg/s family.
  double Xu = -40.0;
  double Xuu = -288.8;
  double Yv = -2159.93;
  double Yvv = -1958.61;
  double Yr = -1121.8;
  double Nv = -2300.0;
  double Nvv = 3190.9;
  double Nr = -14208.2;
  double Nrr = -53206.72;

  // Propulsion.
  double rho_water = 998.12;        // kg/m^3
  double kt = 0.44;                 // thrust coefficient
  double prop_diameter = 0.35;      // m
  double lx = 3.0;                  // m, engine offset aft of CG
  double ly = 1.0;                  // m, engine offset abeam of CG
  double deadband_rpm = 630.0;      // |rpm| below this gives zero thrust
  double deadband_blend_rpm = 30.0; // half width of the smoothed band

  // Windage.
  double loa = 8.36;      // m
  double afw = 4.0;       // m^2 frontal projected area
  double alw = 12.0;      // m^2 lateral projected area
  double rho_air = 1.225; // kg/m^3
  WindCoefficients wind_coeffs;

  static VesselParams table1_defaults() { return VesselParams(); }
  static VesselParams from_config(const Config& cfg);
  Config to_config() const;

  // Throws std::invalid_argument when the inertia matrix is not invertible,
  // rest damping is not dissipative, or propulsion constants are nonsense.
  void validate() const;
};

// Thrust model selector: the plant has a hard deadband, the optimizer uses
// a C1 cubic blend across it.
enum class ThrustModel { kHardDeadband, kSmoothDeadband };

Eigen::Matrix3d rotation_matrix(double psi);
Eigen::Matrix3d inertia_matrix(const VesselParams& p);
Eigen::Matrix3d coriolis_matrix(const VesselParams& p, const Eigen::Vector3d& nu);
Eigen::Matrix3d damping_matrix(const VesselParams& p, const Eigen::Vector3d& nu);

// Single-engine thrust in N for a propeller speed in rev/min.
double thrust_force(const VesselParams& p, double rpm,
                    ThrustModel model = ThrustModel::kHardDeadband);
double thrust_force_drpm(const VesselParams& p, double rpm,
                         ThrustModel model = ThrustModel::kHardDeadband);

// Body-frame force/moment of both engines at a common azimuth angle.
Eigen::Vector3d propulsion_wrench(const VesselParams& p, const ControlInput& c,
                                  ThrustModel model = ThrustModel::kHardDeadband);

// Body-frame wind load from the relative wind over the vessel.
Eigen::Vector3d wind_wrench(const VesselParams& p, const VesselState& s,
                            const WindCondition& wind);

// Time derivative of the full state.
Vector6d continuous_dynamics(const VesselParams& p, const VesselState& s,
                             const ControlInput& c, const WindCondition& wind,
                             ThrustModel model = ThrustModel::kHardDeadband);

// One explicit Euler step, heading wrapped to (-pi, pi]. Throws
// std::invalid_argument for dt <= 0.
VesselState euler_step(const VesselParams& p, const VesselState& s,
                       const ControlInput& c, const WindCondition& wind,
                       double dt, ThrustModel model = ThrustModel::kHardDeadband);

// Jacobians of one unwrapped Euler step with respect to state and control.
void euler_step_jacobians(const VesselParams& p, const VesselState& s,
                          const ControlInput& c, const WindCondition& wind,
                          double dt, ThrustModel model, Matrix6d* dstate,
                          Matrix62d* dcontrol);

}  // namespace slipway

#endif  // SLIPWAY_VESSEL_HPP
