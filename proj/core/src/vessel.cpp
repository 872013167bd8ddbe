// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/vessel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "slipway/angles.hpp"

namespace slipway {

Vector6d VesselState::to_vector() const {
  Vector6d z;
  z << x, y, psi, u, v, r;
  return z;
}

VesselState VesselState::from_vector(const Vector6d& z) {
  return {z(0), z(1), z(2), z(3), z(4), z(5)};
}

WindCoefficients::WindCoefficients(double cx, double cy, double cn)
    : cx_(cx), cy_(cy), cn_(cn) {}

WindCoefficients WindCoefficients::tabulated(std::vector<double> gamma,
                                             std::vector<double> cx,
                                             std::vector<double> cy,
                                             std::vector<double> cn) {
  if (gamma.size() < 2 || gamma.size() != cx.size() ||
      gamma.size() != cy.size() || gamma.size() != cn.size()) {
    throw ConfigError("wind coefficient table needs >= 2 rows of equal length");
  }
  if (!std::is_sorted(gamma.begin(), gamma.end()) ||
      std::adjacent_find(gamma.begin(), gamma.end()) != gamma.end()) {
    throw ConfigError("wind coefficient table gamma must be strictly increasing");
  }
  WindCoefficients w;
  w.table_gamma_ = std::move(gamma);
  w.table_cx_ = std::move(cx);
  w.table_cy_ = std::move(cy);
  w.table_cn_ = std::move(cn);
  return w;
}

WindCoefficients WindCoefficients::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open wind coefficient table: " + path);
  std::vector<double> gamma, cx, cy, cn;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double g, x, y, n;
    if (!(row >> g >> x >> y >> n)) {
      if (lineno == 1) continue;  // header row
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected gamma_rad,cx,cy,cn");
    }
    gamma.push_back(g);
    cx.push_back(x);
    cy.push_back(y);
    cn.push_back(n);
  }
  return tabulated(std::move(gamma), std::move(cx), std::move(cy), std::move(cn));
}

double WindCoefficients::interp(const std::vector<double>& values, double gamma) const {
  double g = wrap_to_pi(gamma);
  const auto& xs = table_gamma_;
  if (g <= xs.front()) return values.front();
  if (g >= xs.back()) return values.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), g);
  size_t hi = static_cast<size_t>(it - xs.begin());
  size_t lo = hi - 1;
  double t = (g - xs[lo]) / (xs[hi] - xs[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

double WindCoefficients::slope(const std::vector<double>& values, double gamma) const {
  double g = wrap_to_pi(gamma);
  const auto& xs = table_gamma_;
  if (g <= xs.front() || g >= xs.back()) return 0.0;
  auto it = std::upper_bound(xs.begin(), xs.end(), g);
  size_t hi = static_cast<size_t>(it - xs.begin());
  size_t lo = hi - 1;
  return (values[hi] - values[lo]) / (xs[hi] - xs[lo]);
}

double WindCoefficients::cx(double gamma) const {
  if (parametric()) return -cx_ * std::cos(gamma);
  return interp(table_cx_, gamma);
}

double WindCoefficients::cy(double gamma) const {
  if (parametric()) return cy_ * std::sin(gamma);
  return interp(table_cy_, gamma);
}

double WindCoefficients::cn(double gamma) const {
  if (parametric()) return cn_ * std::sin(2.0 * gamma);
  return interp(table_cn_, gamma);
}

double WindCoefficients::dcx(double gamma) const {
  if (parametric()) return cx_ * std::sin(gamma);
  return slope(table_cx_, gamma);
}

double WindCoefficients::dcy(double gamma) const {
  if (parametric()) return cy_ * std::cos(gamma);
  return slope(table_cy_, gamma);
}

double WindCoefficients::dcn(double gamma) const {
  if (parametric()) return 2.0 * cn_ * std::cos(2.0 * gamma);
  return slope(table_cn_, gamma);
}

namespace {

constexpr const char* kDoubleKeys[] = {
    "m11", "m22", "m23", "m32", "m33", "Xu", "Xuu", "Yv", "Yvv", "Yr",
    "Nv", "Nvv", "Nr", "Nrr", "rho_water", "kt", "prop_diameter", "lx",
    "ly", "deadband_rpm", "deadband_blend_rpm", "loa", "afw", "alw", "rho_air"};

double* field_by_name(VesselParams& p, const std::string& name) {
  struct Entry {
    const char* name;
    double VesselParams::*member;
  };
  static const Entry entries[] = {
      {"m11", &VesselParams::m11}, {"m22", &VesselParams::m22},
      {"m23", &VesselParams::m23}, {"m32", &VesselParams::m32},
      {"m33", &VesselParams::m33}, {"Xu", &VesselParams::Xu},
      {"Xuu", &VesselParams::Xuu}, {"Yv", &VesselParams::Yv},
      {"Yvv", &VesselParams::Yvv}, {"Yr", &VesselParams::Yr},
      {"Nv", &VesselParams::Nv}, {"Nvv", &VesselParams::Nvv},
      {"Nr", &VesselParams::Nr}, {"Nrr", &VesselParams::Nrr},
      {"rho_water", &VesselParams::rho_water}, {"kt", &VesselParams::kt},
      {"prop_diameter", &VesselParams::prop_diameter}, {"lx", &VesselParams::lx},
      {"ly", &VesselParams::ly}, {"deadband_rpm", &VesselParams::deadband_rpm},
      {"deadband_blend_rpm", &VesselParams::deadband_blend_rpm},
      {"loa", &VesselParams::loa}, {"afw", &VesselParams::afw},
      {"alw", &VesselParams::alw}, {"rho_air", &VesselParams::rho_air}};
  for (const auto& e : entries) {
    if (name == e.name) return &(p.*(e.member));
  }
  return nullptr;
}

}  // namespace

VesselParams VesselParams::from_config(const Config& cfg) {
  VesselParams p;
  for (const char* key : kDoubleKeys) {
    std::string full = std::string("vessel.") + key;
    if (cfg.has(full)) *field_by_name(p, key) = cfg.get_double(full);
  }
  if (cfg.has("vessel.wind_table")) {
    p.wind_coeffs = WindCoefficients::from_csv(cfg.get_string("vessel.wind_table"));
  } else {
    p.wind_coeffs = WindCoefficients(cfg.get_double("vessel.wind_cx", 0.7),
                                     cfg.get_double("vessel.wind_cy", 0.825),
                                     cfg.get_double("vessel.wind_cn", 0.125));
  }
  p.validate();
  return p;
}

Config VesselParams::to_config() const {
  Config cfg;
  VesselParams copy = *this;
  for (const char* key : kDoubleKeys) {
    cfg.set_double(std::string("vessel.") + key, *field_by_name(copy, key));
  }
  cfg.set_double("vessel.wind_cx", wind_coeffs.cx_gain());
  cfg.set_double("vessel.wind_cy", wind_coeffs.cy_gain());
  cfg.set_double("vessel.wind_cn", wind_coeffs.cn_gain());
  return cfg;
}

void VesselParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("vessel params: " + msg); };
  if (!(m11 > 0.0 && m22 > 0.0 && m33 > 0.0)) fail("inertia diagonal must be positive");
  if (!(m22 * m33 - m23 * m32 > 0.0)) fail("sway/yaw inertia block is singular");
  if (!(Xu < 0.0 && Yv < 0.0 && Nr < 0.0)) fail("rest damping must be dissipative");
  if (Xuu > 0.0 || Yvv > 0.0 || Nrr > 0.0) fail("quadratic diagonal damping must not be negative feedback");
  if (!(rho_water > 0.0 && rho_air > 0.0)) fail("densities must be positive");
  if (!(kt > 0.0 && prop_diameter > 0.0)) fail("thrust constants must be positive");
  if (deadband_rpm < 0.0 || deadband_blend_rpm < 0.0) fail("deadband must be nonnegative");
  if (deadband_blend_rpm > deadband_rpm && deadband_rpm > 0.0) fail("blend wider than deadband");
  if (!(loa > 0.0 && afw >= 0.0 && alw >= 0.0)) fail("windage geometry invalid");
}

Eigen::Matrix3d rotation_matrix(double psi) {
  double c = std::cos(psi), s = std::sin(psi);
  Eigen::Matrix3d R;
  R << c, -s, 0.0,
       s,  c, 0.0,
       0.0, 0.0, 1.0;
  return R;
}

Eigen::Matrix3d inertia_matrix(const VesselParams& p) {
  Eigen::Matrix3d M;
  M << p.m11, 0.0, 0.0,
       0.0, p.m22, p.m23,
       0.0, p.m32, p.m33;
  return M;
}

Eigen::Matrix3d coriolis_matrix(const VesselParams& p, const Eigen::Vector3d& nu) {
  double c13 = -p.m22 * nu(1) - p.m23 * nu(2);
  double c23 = p.m11 * nu(0);
  Eigen::Matrix3d C;
  C << 0.0, 0.0, c13,
       0.0, 0.0, c23,
       -c13, -c23, 0.0;
  return C;
}

Eigen::Matrix3d damping_matrix(const VesselParams& p, const Eigen::Vector3d& nu) {
  Eigen::Matrix3d D = Eigen::Matrix3d::Zero();
  D(0, 0) = -p.Xu - p.Xuu * std::abs(nu(0));
  D(1, 1) = -p.Yv - p.Yvv * std::abs(nu(1));
  D(1, 2) = -p.Yr;
  D(2, 1) = -p.Nv - p.Nvv * std::abs(nu(1));
  D(2, 2) = -p.Nr - p.Nrr * std::abs(nu(2));
  return D;
}

namespace {

// Cubic blend factor of the smoothed deadband and its d/d|rpm| slope.
void smooth_band(const VesselParams& p, double mag, double* factor, double* dfactor) {
  double lo = p.deadband_rpm - p.deadband_blend_rpm;
  double hi = p.deadband_rpm + p.deadband_blend_rpm;
  if (mag <= lo) {
    *factor = 0.0;
    *dfactor = 0.0;
  } else if (mag >= hi) {
    *factor = 1.0;
    *dfactor = 0.0;
  } else {
    double width = hi - lo;
    double t = (mag - lo) / width;
    *factor = t * t * (3.0 - 2.0 * t);
    *dfactor = 6.0 * t * (1.0 - t) / width;
  }
}

}  // namespace

double thrust_force(const VesselParams& p, double rpm, ThrustModel model) {
  double n = rpm / 60.0;  // rev/s
  double raw = p.rho_water * p.kt * std::pow(p.prop_diameter, 4) * std::abs(n) * n;
  if (model == ThrustModel::kHardDeadband) {
    return std::abs(rpm) < p.deadband_rpm ? 0.0 : raw;
  }
  double factor, dfactor;
  smooth_band(p, std::abs(rpm), &factor, &dfactor);
  return factor * raw;
}

double thrust_force_drpm(const VesselParams& p, double rpm, ThrustModel model) {
  double k = p.rho_water * p.kt * std::pow(p.prop_diameter, 4);
  double draw = k * 2.0 * std::abs(rpm) / 3600.0;
  if (model == ThrustModel::kHardDeadband) {
    return std::abs(rpm) < p.deadband_rpm ? 0.0 : draw;
  }
  double factor, dfactor;
  smooth_band(p, std::abs(rpm), &factor, &dfactor);
  double raw = k * std::abs(rpm) * rpm / 3600.0;
  // d(raw)/drpm is even in rpm, the band factor term restores the sign.
  return factor * draw + dfactor * (rpm >= 0.0 ? raw : -raw);
}

Eigen::Vector3d propulsion_wrench(const VesselParams& p, const ControlInput& c,
                                  ThrustModel model) {
  double f = thrust_force(p, c.rpm, model);
  double ca = std::cos(c.alpha), sa = std::sin(c.alpha);
  // The lateral engine offsets cancel for a common azimuth angle.
  return {2.0 * f * ca, 2.0 * f * sa, -2.0 * f * p.lx * sa};
}

Eigen::Vector3d wind_wrench(const VesselParams& p, const VesselState& s,
                            const WindCondition& wind) {
  // Wind blows from wind.direction, so the air moves toward direction + pi.
  double wx = -wind.speed * std::cos(wind.direction);
  double wy = -wind.speed * std::sin(wind.direction);
  double cpsi = std::cos(s.psi), spsi = std::sin(s.psi);
  double uw = cpsi * wx + spsi * wy;
  double vw = -spsi * wx + cpsi * wy;
  double urw = s.u - uw;
  double vrw = s.v - vw;
  double v2 = urw * urw + vrw * vrw;
  if (v2 < 1e-12) return Eigen::Vector3d::Zero();
  double gamma = -std::atan2(vrw, urw);
  double q = 0.5 * p.rho_air * v2;
  return {q * p.wind_coeffs.cx(gamma) * p.afw,
          q * p.wind_coeffs.cy(gamma) * p.alw,
          q * p.wind_coeffs.cn(gamma) * p.alw * p.loa};
}

Vector6d continuous_dynamics(const VesselParams& p, const VesselState& s,
                             const ControlInput& c, const WindCondition& wind,
                             ThrustModel model) {
  Eigen::Vector3d nu = s.nu();
  Eigen::Vector3d eta_dot = rotation_matrix(s.psi) * nu;
  Eigen::Vector3d tau = propulsion_wrench(p, c, model) + wind_wrench(p, s, wind) -
                        coriolis_matrix(p, nu) * nu - damping_matrix(p, nu) * nu;
  Eigen::Vector3d nu_dot = inertia_matrix(p).partialPivLu().solve(tau);
  Vector6d dz;
  dz << eta_dot, nu_dot;
  return dz;
}

VesselState euler_step(const VesselParams& p, const VesselState& s,
                       const ControlInput& c, const WindCondition& wind,
                       double dt, ThrustModel model) {
  if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be positive");
  Vector6d z = s.to_vector() + dt * continuous_dynamics(p, s, c, wind, model);
  z(2) = wrap_to_pi(z(2));
  return VesselState::from_vector(z);
}

void euler_step_jacobians(const VesselParams& p, const VesselState& s,
                          const ControlInput& c, const WindCondition& wind,
                          double dt, ThrustModel model, Matrix6d* dstate,
                          Matrix62d* dcontrol) {
  double cpsi = std::cos(s.psi), spsi = std::sin(s.psi);
  Eigen::Vector3d nu = s.nu();

  // Kinematics block.
  Eigen::Matrix3d R = rotation_matrix(s.psi);
  Eigen::Vector3d deta_dpsi(-spsi * s.u - cpsi * s.v, cpsi * s.u - spsi * s.v, 0.0);

  // d(C nu)/dnu.
  double c13 = -p.m22 * s.v - p.m23 * s.r;
  double c23 = p.m11 * s.u;
  Eigen::Matrix3d dCnu;
  dCnu << 0.0, -p.m22 * s.r, c13 - p.m23 * s.r,
          p.m11 * s.r, 0.0, c23,
          p.m23 * s.r + (p.m22 - p.m11) * s.v, (p.m22 - p.m11) * s.u, p.m23 * s.u;

  // d(D nu)/dnu.
  Eigen::Matrix3d dDnu = Eigen::Matrix3d::Zero();
  dDnu(0, 0) = -p.Xu - 2.0 * p.Xuu * std::abs(s.u);
  dDnu(1, 1) = -p.Yv - 2.0 * p.Yvv * std::abs(s.v);
  dDnu(1, 2) = -p.Yr;
  dDnu(2, 1) = -p.Nv - 2.0 * p.Nvv * std::abs(s.v);
  dDnu(2, 2) = -p.Nr - 2.0 * p.Nrr * std::abs(s.r);

  // Wind wrench partials via the relative wind components.
  double wx = -wind.speed * std::cos(wind.direction);
  double wy = -wind.speed * std::sin(wind.direction);
  double uw = cpsi * wx + spsi * wy;
  double vw = -spsi * wx + cpsi * wy;
  double urw = s.u - uw;
  double vrw = s.v - vw;
  double v2 = urw * urw + vrw * vrw;
  Eigen::Matrix3d dtauw_dnu = Eigen::Matrix3d::Zero();
  Eigen::Vector3d dtauw_dpsi = Eigen::Vector3d::Zero();
  if (v2 >= 1e-12) {
    double gamma = -std::atan2(vrw, urw);
    double half_rho = 0.5 * p.rho_air;
    Eigen::Vector3d area(p.afw, p.alw, p.alw * p.loa);
    Eigen::Vector3d coeff(p.wind_coeffs.cx(gamma), p.wind_coeffs.cy(gamma),
                          p.wind_coeffs.cn(gamma));
    Eigen::Vector3d dcoeff(p.wind_coeffs.dcx(gamma), p.wind_coeffs.dcy(gamma),
                           p.wind_coeffs.dcn(gamma));
    // d(V^2 C(gamma))/d(urw, vrw) with dgamma = (vrw, -urw)/V^2.
    Eigen::Vector3d dtau_durw = half_rho * area.array() *
                                (2.0 * urw * coeff.array() + dcoeff.array() * vrw);
    Eigen::Vector3d dtau_dvrw = half_rho * area.array() *
                                (2.0 * vrw * coeff.array() - dcoeff.array() * urw);
    dtauw_dnu.col(0) = dtau_durw;
    dtauw_dnu.col(1) = dtau_dvrw;
    // durw/dpsi = -vw, dvrw/dpsi = uw.
    dtauw_dpsi = dtau_durw * (-vw) + dtau_dvrw * uw;
  }

  Eigen::Matrix3d Minv = inertia_matrix(p).inverse();
  Eigen::Matrix3d dnudot_dnu = Minv * (dtauw_dnu - dCnu - dDnu);
  Eigen::Vector3d dnudot_dpsi = Minv * dtauw_dpsi;

  if (dstate) {
    Matrix6d& A = *dstate;
    A.setZero();
    Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Zero();
    J.block<3, 3>(0, 3) = R;
    J.block<3, 1>(0, 2) = deta_dpsi;
    J.block<3, 3>(3, 3) = dnudot_dnu;
    J.block<3, 1>(3, 2) = dnudot_dpsi;
    A = Matrix6d::Identity() + dt * J;
  }

  if (dcontrol) {
    double f = thrust_force(p, c.rpm, model);
    double df = thrust_force_drpm(p, c.rpm, model);
    double ca = std::cos(c.alpha), sa = std::sin(c.alpha);
    Eigen::Vector3d dtau_drpm(2.0 * df * ca, 2.0 * df * sa, -2.0 * df * p.lx * sa);
    Eigen::Vector3d dtau_dalpha(-2.0 * f * sa, 2.0 * f * ca, -2.0 * f * p.lx * ca);
    Matrix62d& B = *dcontrol;
    B.setZero();
    B.block<3, 1>(3, 0) = dt * (Minv * dtau_drpm);
    B.block<3, 1>(3, 1) = dt * (Minv * dtau_dalpha);
  }
}

}  // namespace slipway
