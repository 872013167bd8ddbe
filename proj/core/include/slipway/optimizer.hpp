// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_OPTIMIZER_HPP
#define SLIPWAY_OPTIMIZER_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slipway/config.hpp"
#include "slipway/planner.hpp"
#include "slipway/vessel.hpp"

namespace slipway {

struct ControlBounds {
  double rpm_min = -2500.0;
  double rpm_max = 3000.0;
  double alpha_min = -0.5;
  double alpha_max = 0.5;

  bool consistent() const {
    return rpm_min <= rpm_max && alpha_min <= alpha_max;
  }
};

// Finite-horizon docking program: drive the state toward a reference held
// static over the horizon, under Euler-discretized vessel dynamics with the
// wind frozen, control boxes, and a soft terminal heading condition.
struct DockingProblem {
  VesselParams params;
  VesselState initial_state;
  std::vector<Vector6d> reference;  // per step 0..horizon; step 0 unused
  WindCondition wind;
  int horizon = 40;
  double dt = 0.2;
  Eigen::Matrix2d lambda_tau = Eigen::Vector2d(1e-7, 10.0).asDiagonal();
  Matrix6d lambda_ref =
      (Vector6d() << 1.0, 1.0, 10.0, 1.0, 1.0, 1.0).finished().asDiagonal();
  double lambda_s = 100.0;
  ControlBounds bounds;
  double psi_d = 0.0;           // rad, docking heading
  bool docking_active = false;  // terminal heading condition engaged
  bool docking_hard = false;    // drive the slack itself to zero
  bool pseudo_huber = false;    // blunt the reference penalty on large errors
  double huber_delta = 1.0;
  double tol_kkt = 1e-6;
  double tol_con = 1e-8;
  int max_iter = 200;

  // Throws std::invalid_argument on non-PSD weights, bad horizon or dt, or
  // a reference of the wrong length. Inconsistent bounds are legal here and
  // surface as an infeasible solver status instead.
  void validate() const;
};

enum class SolverStatus { kConverged, kMaxIter, kInfeasible };

struct Trajectory {
  std::vector<VesselState> states;     // horizon + 1 entries
  std::vector<ControlInput> controls;  // horizon entries
  double dt = 0.2;  // s, copied from the problem for export and replay
  double objective_value = 0.0;
  double slack_psi = 0.0;  // rad, terminal heading residual
  SolverStatus status = SolverStatus::kMaxIter;
  int iterations = 0;
  double solve_time = 0.0;     // s
  double kkt_residual = 0.0;   // scaled stationarity at the final iterate
  double defect_norm = 0.0;    // max-norm of the dynamics defects
  std::vector<double> merit_history;  // accepted merit value per iteration
};

// Assembles the program for the current control cycle: the buffer point
// repeated across the horizon as reference, loading-zone RPM bounds in the
// terminal phase, and the terminal heading condition engaged once the dock
// lies within the horizon's reach.
DockingProblem build_problem(const VesselState& initial_state,
                             const VesselParams& params,
                             const BufferPoint& buffer,
                             const WindCondition& wind, const Config& cfg);

// Control effort plus reference deviation plus the slack penalty; heading
// residuals are wrapped. Throws std::invalid_argument on size mismatch.
double evaluate_objective(const DockingProblem& problem,
                          const std::vector<VesselState>& states,
                          const std::vector<ControlInput>& controls,
                          double slack);

// Sequential quadratic programming on the simultaneous transcription with
// states condensed out of each subproblem; deterministic for identical
// inputs. The terminal slack equals the wrapped terminal heading residual
// by construction.
Trajectory solve(const DockingProblem& problem,
                 const Trajectory* warm_start = nullptr);

struct GradientCheckReport {
  double objective_error = 0.0;  // scaled relative error vs central FD
  double dynamics_error = 0.0;
  double max_error() const {
    return objective_error > dynamics_error ? objective_error
                                            : dynamics_error;
  }
};

// Central finite-difference audit of the analytic objective gradient and
// one-step dynamics Jacobians at the given interior point.
GradientCheckReport check_gradients(const DockingProblem& problem,
                                    const std::vector<VesselState>& states,
                                    const std::vector<ControlInput>& controls,
                                    double h_rel = 1e-6);

// Columns: t, x, y, psi, u, v, r, rpm, alpha. The final row repeats the
// last control so every row parses uniformly.
void export_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace slipway

#endif  // SLIPWAY_OPTIMIZER_HPP
