// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/sysid.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "json.hpp"
#include "slipway/rng.hpp"

namespace slipway {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Vector3d total_wrench(const VesselParams& p, const VesselState& s,
                             const ControlInput& c, const WindCondition& wind) {
  return propulsion_wrench(p, c) + wind_wrench(p, s, wind);
}

// Raw (unnormalized) stacked regression system.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

// Windowed context around one sample. Every derived quantity excludes the
// center sample, and the regressor smoother draws on odd sample offsets
// while the right-hand-side smoother draws on even ones, so measurement
// noise never correlates a regressor row with its own right-hand side. The
// stencils are symmetric, which also cancels the covariance between the
// window means and the finite-difference rates. Both properties keep the
// least-squares estimates unbiased under velocity noise.
//
// Surge relaxes over several seconds, so its rate uses the full window for
// noise suppression. Sway and yaw settle in well under a second; a wide
// stencil overestimates their decaying rates, so they use a short one.
struct SampleContext {
  bool usable = false;
  double u_rhs = 0.0, v_rhs = 0.0, r_rhs = 0.0;  // even-offset means
  double v_reg = 0.0, r_reg = 0.0;               // odd-offset means
  double du = 0.0;                               // wide stencil surge rate
  double dv = 0.0, dr = 0.0;                     // short stencil rates
};

std::vector<SampleContext> sample_contexts(const ManeuverLog& log,
                                           const SysidOptions& opt) {
  size_t n = log.states.size();
  std::vector<SampleContext> ctx(n);
  auto mask = steady_mask(log, opt.steady_window, opt.steady_threshold);
  if (n < 3) return ctx;
  double dt = log.timestamps[1] - log.timestamps[0];
  long k = std::max(1L, std::lround(opt.steady_window / dt));
  long ks = std::min(k, std::max(1L, std::lround(0.3 * opt.steady_window / dt)));
  for (size_t i = static_cast<size_t>(k); i + k < n; ++i) {
    if (!mask[i]) continue;
    SampleContext& c = ctx[i];
    c.usable = true;
    double span = log.timestamps[i + k] - log.timestamps[i - k];
    c.du = (log.states[i + k].u - log.states[i - k].u) / span;
    double short_span = log.timestamps[i + ks] - log.timestamps[i - ks];
    c.dv = (log.states[i + ks].v - log.states[i - ks].v) / short_span;
    c.dr = (log.states[i + ks].r - log.states[i - ks].r) / short_span;
    double su = 0.0, sv = 0.0, sr = 0.0, ou = 0.0, ov = 0.0, orr = 0.0;
    int n_even = 0, n_odd = 0;
    for (long d = 1; d <= k; ++d) {
      const VesselState& lo = log.states[i - d];
      const VesselState& hi = log.states[i + d];
      if (d % 2 == 0) {
        su += lo.u + hi.u;
        sv += lo.v + hi.v;
        sr += lo.r + hi.r;
        n_even += 2;
      } else {
        ou += lo.u + hi.u;
        ov += lo.v + hi.v;
        orr += lo.r + hi.r;
        n_odd += 2;
      }
    }
    if (n_even == 0) {  // window too small to split, fall back to all offsets
      su = ou;
      sv = ov;
      sr = orr;
      n_even = n_odd;
    }
    c.u_rhs = su / n_even;
    c.v_rhs = sv / n_even;
    c.r_rhs = sr / n_even;
    c.v_reg = ov / n_odd;
    c.r_reg = orr / n_odd;
  }
  return ctx;
}

LinearSystem build_surge_system(const VesselParams& known,
                                const std::vector<ManeuverLog>& logs,
                                const SysidOptions& opt) {
  std::vector<Eigen::Vector2d> rows;
  std::vector<double> rhs;
  for (const ManeuverLog& log : logs) {
    log.validate();
    auto ctx = sample_contexts(log, opt);
    for (size_t i = 0; i < log.states.size(); ++i) {
      if (!ctx[i].usable || i >= log.controls.size()) continue;
      const VesselState& s = log.states[i];
      // Straight running only, so the Coriolis coupling stays negligible.
      if (std::abs(s.v) > 0.05 || std::abs(s.r) > 0.02 || std::abs(s.u) < 0.05) continue;
      const SampleContext& c = ctx[i];
      double tau_x = total_wrench(known, s, log.controls[i], log.winds[i]).x();
      double coriolis = -(known.m22 * c.v_rhs + known.m23 * c.r_rhs) * c.r_rhs;
      rows.push_back({-s.u, -std::abs(s.u) * s.u});
      rhs.push_back(tau_x - known.m11 * c.du - coriolis);
    }
  }
  LinearSystem sys;
  sys.A.resize(static_cast<Eigen::Index>(rows.size()), 2);
  sys.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    sys.A.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    sys.b(static_cast<Eigen::Index>(i)) = rhs[i];
  }
  return sys;
}

LinearSystem build_sway_yaw_system(const VesselParams& known,
                                   const std::vector<ManeuverLog>& logs,
                                   const SysidOptions& opt) {
  std::vector<std::array<double, 7>> rows;
  std::vector<double> rhs;
  for (const ManeuverLog& log : logs) {
    log.validate();
    auto ctx = sample_contexts(log, opt);
    for (size_t i = 0; i < log.states.size(); ++i) {
      if (!ctx[i].usable || i >= log.controls.size()) continue;
      const ControlInput& ci = log.controls[i];
      // Steered samples only; straight runs carry no sway or yaw information.
      if (std::abs(ci.alpha) < 1e-3) continue;
      const VesselState& s = log.states[i];
      const SampleContext& c = ctx[i];
      Eigen::Vector3d tau = total_wrench(known, s, ci, log.winds[i]);
      double v = c.v_reg, r = c.r_reg;
      rows.push_back({-v, -std::abs(v) * v, -r, 0.0, 0.0, 0.0, 0.0});
      rhs.push_back(tau.y() - known.m22 * c.dv - known.m23 * c.dr -
                    known.m11 * c.u_rhs * c.r_rhs);
      rows.push_back({0.0, 0.0, 0.0, -v, -std::abs(v) * v, -r, -std::abs(r) * r});
      rhs.push_back(tau.z() - known.m32 * c.dv - known.m33 * c.dr -
                    (known.m22 - known.m11) * c.u_rhs * c.v_rhs -
                    known.m23 * c.u_rhs * c.r_rhs);
    }
  }
  LinearSystem sys;
  sys.A.resize(static_cast<Eigen::Index>(rows.size()), 7);
  sys.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < 7; ++j) sys.A(static_cast<Eigen::Index>(i), j) = rows[i][j];
    sys.b(static_cast<Eigen::Index>(i)) = rhs[i];
  }
  return sys;
}

// RMS-normalized pseudo-inverse solve with a conditioning gate.
Eigen::VectorXd solve_scaled(const LinearSystem& sys, const SysidOptions& opt,
                             double* condition_out) {
  const Eigen::Index n = sys.A.cols();
  if (sys.A.rows() < n) {
    throw IllConditionedError("regression underdetermined: fewer steady samples than coefficients",
                              kInf);
  }
  Eigen::VectorXd scale(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double rms = std::sqrt(sys.A.col(j).squaredNorm() / static_cast<double>(sys.A.rows()));
    if (rms < 1e-12) {
      throw IllConditionedError("regressor column has no excitation", kInf);
    }
    scale(j) = rms;
  }
  Eigen::MatrixXd An = sys.A * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(An, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smin = svd.singularValues()(n - 1);
  double smax = svd.singularValues()(0);
  double cond = (smin > 0.0) ? smax / smin : kInf;
  if (condition_out) *condition_out = cond;
  if (cond > opt.max_condition) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "regressor condition number %.3g exceeds limit %.3g", cond,
                  opt.max_condition);
    throw IllConditionedError(buf, cond);
  }
  Eigen::VectorXd y = svd.solve(sys.b);
  return y.cwiseQuotient(scale);
}

double damping_field(const VesselParams& p, const std::string& name) {
  if (name == "Xu") return p.Xu;
  if (name == "Xuu") return p.Xuu;
  if (name == "Yv") return p.Yv;
  if (name == "Yvv") return p.Yvv;
  if (name == "Yr") return p.Yr;
  if (name == "Nv") return p.Nv;
  if (name == "Nvv") return p.Nvv;
  if (name == "Nr") return p.Nr;
  if (name == "Nrr") return p.Nrr;
  throw std::logic_error("unknown damping coefficient " + name);
}

void fill_report(RegressionReport* report, const LinearSystem& sys,
                 const Eigen::VectorXd& coeffs, const std::vector<std::string>& names,
                 const SysidOptions& opt) {
  for (size_t i = 0; i < names.size(); ++i) {
    report->estimated[names[i]] = coeffs(static_cast<Eigen::Index>(i));
  }
  report->residual_norm = (sys.A * coeffs - sys.b).norm();
  if (opt.reference) {
    for (const auto& [name, value] : report->estimated) {
      double truth = damping_field(*opt.reference, name);
      report->relative_error[name] = std::abs(value - truth) / std::abs(truth);
    }
  }
}

}  // namespace

IllConditionedError::IllConditionedError(const std::string& what, double condition_number)
    : std::runtime_error(what), condition_number_(condition_number) {}

std::vector<ManeuverSpec> standard_maneuver_suite() {
  std::vector<ManeuverSpec> suite;
  for (double rpm : {700.0, 1050.0, 1400.0, 2000.0, 2800.0}) {
    suite.push_back({"straight_" + std::to_string(static_cast<int>(rpm)), rpm, 0.0, 100.0, 0.0});
  }
  for (double rpm : {-800.0, -1500.0}) {
    suite.push_back({"reverse_" + std::to_string(static_cast<int>(-rpm)), rpm, 0.0, 100.0, 0.0});
  }
  for (double rpm : {1200.0, 2200.0, 2800.0}) {
    for (double alpha : {0.15, 0.3, 0.45, 0.6}) {
      for (double sign : {1.0, -1.0}) {
        std::string tag = (sign > 0) ? "port" : "starboard";
        suite.push_back({"circle_" + std::to_string(static_cast<int>(rpm)) + "_" +
                             std::to_string(static_cast<int>(alpha * 100)) + "_" + tag,
                         rpm, sign * alpha, 100.0, 0.0});
      }
    }
  }
  suite.push_back({"zigzag_1800", 1800.0, 0.35, 140.0, 30.0});
  return suite;
}

void ManeuverLog::validate() const {
  if (timestamps.size() != states.size() || winds.size() != states.size()) {
    throw std::invalid_argument("maneuver log: sequence lengths disagree");
  }
  if (controls.size() != states.size() && controls.size() + 1 != states.size()) {
    throw std::invalid_argument("maneuver log: controls must match states or be one shorter");
  }
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw std::invalid_argument("maneuver log: timestamps must strictly increase");
    }
  }
}

void ManeuverLog::save_csv(const std::string& path) const {
  validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,x,y,psi,u,v,r,rpm,alpha,wind_speed,wind_dir\n";
  char buf[320];
  for (size_t i = 0; i < states.size(); ++i) {
    const VesselState& s = states[i];
    const ControlInput& c = controls[std::min(i, controls.size() - 1)];
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  timestamps[i], s.x, s.y, s.psi, s.u, s.v, s.r, c.rpm, c.alpha,
                  winds[i].speed, winds[i].direction);
    out << buf;
  }
}

ManeuverLog ManeuverLog::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  ManeuverLog log;
  log.name = std::filesystem::path(path).stem().string();
  std::string line;
  if (!std::getline(in, line) || line != "t,x,y,psi,u,v,r,rpm,alpha,wind_speed,wind_dir") {
    throw std::runtime_error(path + ": unexpected maneuver log header");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double f[11];
    int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf",
                          &f[0], &f[1], &f[2], &f[3], &f[4], &f[5], &f[6], &f[7], &f[8],
                          &f[9], &f[10]);
    if (got != 11) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    }
    log.timestamps.push_back(f[0]);
    log.states.push_back({f[1], f[2], f[3], f[4], f[5], f[6]});
    log.controls.push_back({f[7], f[8]});
    log.winds.push_back({f[9], f[10]});
  }
  log.validate();
  return log;
}

ManeuverLog simulate_maneuver(const VesselParams& params, const ManeuverSpec& spec,
                              double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulate_maneuver: dt must be positive");
  ManeuverLog log;
  log.name = spec.name;
  WindCondition calm{0.0, 0.0};
  VesselState state{};
  int steps = static_cast<int>(std::lround(spec.duration / dt));
  log.timestamps.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    double t = i * dt;
    double alpha = spec.alpha;
    if (spec.zigzag_period > 0.0 &&
        std::fmod(t, spec.zigzag_period) >= 0.5 * spec.zigzag_period) {
      alpha = -spec.alpha;
    }
    ControlInput control{spec.rpm, alpha};
    log.timestamps.push_back(t);
    log.states.push_back(state);
    log.controls.push_back(control);
    log.winds.push_back(calm);
    if (i < steps) state = euler_step(params, state, control, calm, dt);
  }
  return log;
}

std::vector<ManeuverLog> generate_maneuvers(const VesselParams& params,
                                            const std::vector<ManeuverSpec>& suite,
                                            double noise_std, std::uint64_t seed,
                                            double dt) {
  if (noise_std < 0.0) {
    throw std::invalid_argument("generate_maneuvers: noise level must be nonnegative");
  }
  if (suite.empty()) {
    throw std::invalid_argument("generate_maneuvers: suite must be nonempty");
  }
  std::vector<ManeuverLog> logs;
  logs.reserve(suite.size());
  for (size_t k = 0; k < suite.size(); ++k) {
    ManeuverLog log = simulate_maneuver(params, suite[k], dt);
    if (noise_std > 0.0) {
      auto rng = make_rng(seed, "sysid-noise", k);
      std::normal_distribution<double> gauss(0.0, noise_std);
      for (VesselState& s : log.states) {
        s.u += gauss(rng);
        s.v += gauss(rng);
        s.r += gauss(rng);
      }
    }
    logs.push_back(std::move(log));
  }
  return logs;
}

std::vector<bool> steady_mask(const ManeuverLog& log, double window, double threshold) {
  log.validate();
  size_t n = log.states.size();
  std::vector<bool> mask(n, false);
  if (n < 3) return mask;
  double dt = log.timestamps[1] - log.timestamps[0];
  size_t k = static_cast<size_t>(std::max(1L, std::lround(window / dt)));
  if (n <= 2 * k) return mask;
  for (size_t i = k; i + k < n; ++i) {
    double span = log.timestamps[i + k] - log.timestamps[i - k];
    double au = (log.states[i + k].u - log.states[i - k].u) / span;
    double av = (log.states[i + k].v - log.states[i - k].v) / span;
    double ar = (log.states[i + k].r - log.states[i - k].r) / span;
    mask[i] = std::abs(au) < threshold && std::abs(av) < threshold &&
              std::abs(ar) < threshold;
  }
  return mask;
}

RegressionReport identify_surge(const VesselParams& known,
                                const std::vector<ManeuverLog>& logs,
                                const SysidOptions& options) {
  LinearSystem sys = build_surge_system(known, logs, options);
  RegressionReport report;
  report.sample_count = static_cast<int>(sys.A.rows());
  Eigen::VectorXd coeffs = solve_scaled(sys, options, &report.condition_number);
  fill_report(&report, sys, coeffs, {"Xu", "Xuu"}, options);
  return report;
}

RegressionReport identify_sway_yaw(const VesselParams& known,
                                   const std::vector<ManeuverLog>& logs,
                                   const SysidOptions& options) {
  LinearSystem sys = build_sway_yaw_system(known, logs, options);
  RegressionReport report;
  report.sample_count = static_cast<int>(sys.A.rows() / 2);
  double rms_v = 0.0, rms_r = 0.0;
  for (Eigen::Index i = 0; i < sys.A.rows(); i += 2) {
    rms_v += sys.A(i, 0) * sys.A(i, 0);
    rms_r += sys.A(i, 2) * sys.A(i, 2);
  }
  if (report.sample_count == 0 ||
      std::sqrt(rms_v / report.sample_count) < options.min_excitation) {
    throw IllConditionedError("no usable sway/yaw excitation in the provided logs", kInf);
  }
  Eigen::VectorXd coeffs = solve_scaled(sys, options, &report.condition_number);
  fill_report(&report, sys, coeffs, {"Yv", "Yvv", "Yr", "Nv", "Nvv", "Nr", "Nrr"},
              options);
  return report;
}

double surge_residual(const VesselParams& known, const std::vector<ManeuverLog>& logs,
                      double Xu, double Xuu, const SysidOptions& options) {
  LinearSystem sys = build_surge_system(known, logs, options);
  return (sys.A * Eigen::Vector2d(Xu, Xuu) - sys.b).norm();
}

double sway_yaw_residual(const VesselParams& known, const std::vector<ManeuverLog>& logs,
                         const std::array<double, 7>& coeffs,
                         const SysidOptions& options) {
  LinearSystem sys = build_sway_yaw_system(known, logs, options);
  Eigen::VectorXd x(7);
  for (int j = 0; j < 7; ++j) x(j) = coeffs[static_cast<size_t>(j)];
  return (sys.A * x - sys.b).norm();
}

std::string RegressionReport::to_json() const {
  nlohmann::ordered_json j;
  j["estimated"] = estimated;
  if (!relative_error.empty()) j["relative_error"] = relative_error;
  j["residual_norm"] = residual_norm;
  j["condition_number"] = condition_number;
  j["sample_count"] = sample_count;
  return j.dump(2);
}

}  // namespace slipway
