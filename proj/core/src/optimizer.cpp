// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include "slipway/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slipway/angles.hpp"

namespace slipway {
namespace {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

constexpr double kHardSlackTol = 1e-6;
constexpr double kArmijoSlope = 1e-4;
constexpr double kAlphaMin = 9.5367431640625e-07;  // 2^-20
constexpr double kExactPhaseKkt = 1e-2;

// Magnitudes that bring every decision variable to order one. Positions in
// tens of meters, angles and rates near one, RPM near a thousand, azimuth
// near a tenth of a radian.
double state_scale(int i) { return i < 2 ? 10.0 : 1.0; }
double control_scale(int i) { return i == 0 ? 1000.0 : 0.1; }

bool psd(const MatrixXd& m, double tol) {
  if (!m.isApprox(m.transpose(), 1e-9)) return false;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  return es.eigenvalues().minCoeff() >= -tol;
}

Vector2d clip_control(const ControlBounds& b, const Vector2d& c) {
  return {std::clamp(c(0), b.rpm_min, b.rpm_max),
          std::clamp(c(1), b.alpha_min, b.alpha_max)};
}

// One Euler step without the heading wrap of euler_step(); the transcription
// must stay smooth across the seam and wraps only inside residuals.
Vector6d unwrapped_step(const DockingProblem& pb, const Vector6d& s,
                        const Vector2d& c) {
  const VesselState st = VesselState::from_vector(s);
  const ControlInput u{c(0), c(1)};
  return s + pb.dt * continuous_dynamics(pb.params, st, u, pb.wind,
                                         ThrustModel::kSmoothDeadband);
}

double slack_value(const DockingProblem& pb, const std::vector<Vector6d>& xs) {
  if (!pb.docking_active) return 0.0;
  return angle_diff(xs.back()(2), pb.psi_d);
}

double pseudo_huber_value(double x, double delta) {
  const double q = x / delta;
  return delta * delta * (std::sqrt(1.0 + q * q) - 1.0);
}

double objective_core(const DockingProblem& pb, const std::vector<Vector6d>& xs,
                      const std::vector<Vector2d>& cs, double slack,
                      double lambda_s) {
  double j = 0.0;
  for (const Vector2d& c : cs) j += c.dot(pb.lambda_tau * c);
  for (int t = 1; t <= pb.horizon; ++t) {
    Vector6d e = xs[t] - pb.reference[t];
    e(2) = wrap_to_pi(e(2));
    if (pb.pseudo_huber) {
      for (int i = 0; i < 6; ++i)
        j += 2.0 * pb.lambda_ref(i, i) * pseudo_huber_value(e(i), pb.huber_delta);
    } else {
      j += e.dot(pb.lambda_ref * e);
    }
  }
  return j + lambda_s * slack * slack;
}

// Linearization of one iterate: step Jacobians, defects, and the
// Gauss-Newton gradient and weight of every stage cost.
struct Work {
  std::vector<Matrix6d> A;
  std::vector<Matrix62d> B;
  std::vector<Vector6d> d;
  std::vector<Vector2d> gc;
  std::vector<Vector6d> gs;  // index 0 unused
  std::vector<Matrix6d> W;   // index 0 unused

  explicit Work(int horizon)
      : A(horizon), B(horizon), d(horizon), gc(horizon), gs(horizon + 1),
        W(horizon + 1) {}
};

void stage_cost_terms(const DockingProblem& pb, int t, const Vector6d& x,
                      double lambda_s, double slack, Vector6d* g, Matrix6d* w) {
  Vector6d e = x - pb.reference[t];
  e(2) = wrap_to_pi(e(2));
  if (pb.pseudo_huber) {
    g->setZero();
    w->setZero();
    for (int i = 0; i < 6; ++i) {
      const double q = e(i) / pb.huber_delta;
      // Secant weight keeps the Gauss-Newton block positive semidefinite.
      const double wi = 2.0 * pb.lambda_ref(i, i) / std::sqrt(1.0 + q * q);
      (*g)(i) = wi * e(i);
      (*w)(i, i) = wi;
    }
  } else {
    *g = 2.0 * pb.lambda_ref * e;
    *w = 2.0 * pb.lambda_ref;
  }
  if (t == pb.horizon && pb.docking_active) {
    (*g)(2) += 2.0 * lambda_s * slack;
    (*w)(2, 2) += 2.0 * lambda_s;
  }
}

void linearize(const DockingProblem& pb, const std::vector<Vector6d>& xs,
               const std::vector<Vector2d>& cs, double lambda_s, Work* w) {
  const double slack = slack_value(pb, xs);
  for (int t = 0; t < pb.horizon; ++t) {
    const VesselState st = VesselState::from_vector(xs[t]);
    const ControlInput u{cs[t](0), cs[t](1)};
    euler_step_jacobians(pb.params, st, u, pb.wind, pb.dt,
                         ThrustModel::kSmoothDeadband, &w->A[t], &w->B[t]);
    w->d[t] = xs[t + 1] - unwrapped_step(pb, xs[t], cs[t]);
    w->gc[t] = 2.0 * pb.lambda_tau * cs[t];
  }
  for (int t = 1; t <= pb.horizon; ++t)
    stage_cost_terms(pb, t, xs[t], lambda_s, slack, &w->gs[t], &w->W[t]);
}

// First-order multiplier estimate of the dynamics equalities at the current
// iterate; index t holds the costate entering stage t. Index 0 is unused.
std::vector<Vector6d> costates(const DockingProblem& pb, const Work& w) {
  std::vector<Vector6d> lam(pb.horizon + 1);
  lam[pb.horizon] = w.gs[pb.horizon];
  for (int t = pb.horizon - 1; t >= 1; --t)
    lam[t] = w.gs[t] + w.A[t].transpose() * lam[t + 1];
  return lam;
}

// Scaled projected stationarity of the control variables through the costate
// recursion; defects enter separately through their own norm.
double kkt_residual(const DockingProblem& pb, const Work& w,
                    const std::vector<Vector2d>& cs,
                    const std::vector<Vector6d>& lam, int* argmax_t = nullptr,
                    int* argmax_i = nullptr) {
  const int T = pb.horizon;
  const double lo[2] = {pb.bounds.rpm_min, pb.bounds.alpha_min};
  const double hi[2] = {pb.bounds.rpm_max, pb.bounds.alpha_max};
  double kkt = 0.0;
  for (int t = 0; t < T; ++t) {
    const Vector2d gr = w.gc[t] + w.B[t].transpose() * lam[t + 1];
    for (int i = 0; i < 2; ++i) {
      const double act = 1e-9 * control_scale(i);
      const bool at_lo = cs[t](i) <= lo[i] + act;
      const bool at_hi = cs[t](i) >= hi[i] - act;
      double viol;
      if (at_lo && at_hi) {
        viol = 0.0;
      } else if (at_lo) {
        viol = std::max(0.0, -gr(i));
      } else if (at_hi) {
        viol = std::max(0.0, gr(i));
      } else {
        viol = std::abs(gr(i));
      }
      if (control_scale(i) * viol > kkt) {
        kkt = control_scale(i) * viol;
        if (argmax_t) *argmax_t = t;
        if (argmax_i) *argmax_i = i;
      }
    }
  }
  return kkt;
}

using Matrix8d = Eigen::Matrix<double, 8, 8>;
using Vector8d = Eigen::Matrix<double, 8, 1>;

// Costate-contracted second derivative of one Euler step with respect to
// its stage variables (state first, control last), by central differences
// of the analytic step Jacobians. The Gauss-Newton model alone misses this
// curvature (quadratic damping and thrust, trig azimuth coupling, the steep
// deadband blend), which is what stalls plain GN steps near a solution.
Matrix8d stage_curvature(const DockingProblem& pb, const Vector6d& s,
                         const Vector2d& c, const Vector6d& lam_next) {
  auto adjoint = [&](const Vector6d& si, const Vector2d& ci) {
    Matrix6d A;
    Matrix62d B;
    euler_step_jacobians(pb.params, VesselState::from_vector(si),
                         ControlInput{ci(0), ci(1)}, pb.wind, pb.dt,
                         ThrustModel::kSmoothDeadband, &A, &B);
    Vector8d g;
    g.head<6>() = A.transpose() * lam_next;
    g.tail<2>() = B.transpose() * lam_next;
    return g;
  };
  Matrix8d out;
  for (int j = 0; j < 8; ++j) {
    const double h = 1e-5 * (j < 6 ? state_scale(j) : control_scale(j - 6));
    Vector6d sp = s;
    Vector6d sm = s;
    Vector2d cp = c;
    Vector2d cm = c;
    if (j < 6) {
      sp(j) += h;
      sm(j) -= h;
    } else {
      cp(j - 6) += h;
      cm(j - 6) -= h;
    }
    out.col(j) = (adjoint(sp, cp) - adjoint(sm, cm)) / (2.0 * h);
  }
  return 0.5 * (out + out.transpose());
}

// Condenses the state blocks out of the quadratic subproblem. Variables are
// the scaled control corrections, so the Hessian lands near unit diagonal
// even when the slack weight is escalated.
// Two quadratic models share this assembly. The convex one keeps only the
// positive part of each stage's own control curvature on top of the
// Gauss-Newton blocks, which cures the thrust-law overshoot cycles while
// never feeding the QP an indefinite matrix. The exact one carries every
// block of the costate-contracted step curvature and buys a quadratic
// tail where the reduced Hessian is definite; any global convexity repair
// for its indefinite regions would have to be large enough to drown the
// Gauss-Newton information, so the caller decides when it can be trusted
// instead.
void build_reduced_qp(const DockingProblem& pb, const Work& w,
                      const std::vector<Vector6d>& xs,
                      const std::vector<Vector2d>& cs,
                      const std::vector<Vector6d>& lam, double damping,
                      bool exact, MatrixXd* H, VectorXd* g, VectorXd* lb,
                      VectorXd* ub) {
  const int T = pb.horizon;
  const int n = 2 * T;
  H->setZero(n, n);
  g->setZero(n);
  lb->resize(n);
  ub->resize(n);
  const Matrix2d S = Vector2d(control_scale(0), control_scale(1)).asDiagonal();
  MatrixXd G = MatrixXd::Zero(6, n);
  MatrixXd WG(6, n);
  Eigen::Matrix<double, 8, Eigen::Dynamic> Mt(8, n);
  Vector6d wt = Vector6d::Zero();
  for (int t = 1; t <= T; ++t) {
    // Before this update G and wt still map the QP variables onto the
    // state of stage t-1, which is exactly what the Lagrangian curvature
    // of that stage couples to its controls.
    const Matrix8d Hf = stage_curvature(pb, xs[t - 1], cs[t - 1], lam[t]);
    if (exact) {
      Mt.setZero();
      Mt.topRows<6>() = G;
      Mt.block<1, 1>(6, 2 * (t - 1))(0, 0) = control_scale(0);
      Mt.block<1, 1>(7, 2 * (t - 1) + 1)(0, 0) = control_scale(1);
      H->noalias() += Mt.transpose() * (Hf * Mt);
      g->noalias() += Mt.transpose() * (Hf.leftCols<6>() * wt);
    } else {
      (*H)(2 * (t - 1), 2 * (t - 1)) +=
          std::max(0.0, Hf(6, 6)) * control_scale(0) * control_scale(0);
      (*H)(2 * (t - 1) + 1, 2 * (t - 1) + 1) +=
          std::max(0.0, Hf(7, 7)) * control_scale(1) * control_scale(1);
    }
    G = (w.A[t - 1] * G).eval();
    G.block<6, 2>(0, 2 * (t - 1)) += w.B[t - 1] * S;
    wt = w.A[t - 1] * wt - w.d[t - 1];
    WG.noalias() = w.W[t] * G;
    H->noalias() += G.transpose() * WG;
    g->noalias() += G.transpose() * (w.gs[t] + w.W[t] * wt);
  }
  for (int t = 0; t < T; ++t) {
    H->block<2, 2>(2 * t, 2 * t) += 2.0 * S * pb.lambda_tau * S;
    g->segment<2>(2 * t) += S * w.gc[t];
    (*lb)(2 * t) = (pb.bounds.rpm_min - cs[t](0)) / control_scale(0);
    (*ub)(2 * t) = (pb.bounds.rpm_max - cs[t](0)) / control_scale(0);
    (*lb)(2 * t + 1) = (pb.bounds.alpha_min - cs[t](1)) / control_scale(1);
    (*ub)(2 * t + 1) = (pb.bounds.alpha_max - cs[t](1)) / control_scale(1);
  }
  H->diagonal().array() +=
      1e-12 * (1.0 + H->diagonal().maxCoeff()) + damping;
}

// Primal active-set method for min 0.5 x'Hx + g'x over a box. The origin is
// feasible by construction, every step stays inside the box, and a bound is
// released only when its multiplier has the wrong sign.
VectorXd solve_box_qp(const MatrixXd& H, const VectorXd& g, const VectorXd& lb,
                      const VectorXd& ub) {
  const int n = static_cast<int>(g.size());
  VectorXd x(n);
  std::vector<int> st(n, 0);  // -1 at lower, +1 at upper, 0 free
  for (int i = 0; i < n; ++i) x(i) = std::clamp(0.0, lb(i), ub(i));
  const int max_it = 3 * n + 30;
  for (int it = 0; it < max_it; ++it) {
    const VectorXd grad = g + H * x;
    std::vector<int> free;
    for (int i = 0; i < n; ++i)
      if (st[i] == 0) free.push_back(i);
    bool stepped = false;
    if (!free.empty()) {
      const int m = static_cast<int>(free.size());
      MatrixXd hff(m, m);
      VectorXd gf(m);
      for (int a = 0; a < m; ++a) {
        gf(a) = grad(free[a]);
        for (int b = 0; b < m; ++b) hff(a, b) = H(free[a], free[b]);
      }
      const VectorXd df = hff.ldlt().solve(-gf);
      if (df.lpNorm<Eigen::Infinity>() >
          1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
        double alpha = 1.0;
        int block = -1;
        int dir = 0;
        for (int a = 0; a < m; ++a) {
          const int i = free[a];
          if (df(a) > 1e-16) {
            const double room = ub(i) - x(i);
            if (df(a) * alpha > room) {
              alpha = room / df(a);
              block = i;
              dir = 1;
            }
          } else if (df(a) < -1e-16) {
            const double room = lb(i) - x(i);
            if (df(a) * alpha < room) {
              alpha = room / df(a);
              block = i;
              dir = -1;
            }
          }
        }
        alpha = std::clamp(alpha, 0.0, 1.0);
        for (int a = 0; a < m; ++a) {
          const int i = free[a];
          x(i) = std::clamp(x(i) + alpha * df(a), lb(i), ub(i));
        }
        if (block >= 0) {
          st[block] = dir;
          x(block) = dir > 0 ? ub(block) : lb(block);
        }
        stepped = true;
      }
    }
    if (!stepped) {
      int worst = -1;
      double worst_viol = 1e-10;
      for (int i = 0; i < n; ++i) {
        if (st[i] == 0) continue;
        const double viol = st[i] < 0 ? -grad(i) : grad(i);
        if (viol > worst_viol) {
          worst_viol = viol;
          worst = i;
        }
      }
      if (worst < 0) break;
      st[worst] = 0;
    }
  }
  return x;
}

// Costate estimate of the equality multipliers at the proposed step; sets
// the floor for the l1 penalty so the merit direction stays a descent one.
double multiplier_norm(const DockingProblem& pb, const Work& w,
                       const std::vector<Vector6d>& ps) {
  const int T = pb.horizon;
  Vector6d lam = w.gs[T] + w.W[T] * ps[T];
  double m = lam.lpNorm<Eigen::Infinity>();
  for (int t = T - 1; t >= 1; --t) {
    lam = w.gs[t] + w.W[t] * ps[t] + w.A[t].transpose() * lam;
    m = std::max(m, lam.lpNorm<Eigen::Infinity>());
  }
  return m;
}

bool run_sqp(const DockingProblem& pb, double lambda_s, std::vector<Vector6d>* xs,
             std::vector<Vector2d>* cs, int* iters_left, Trajectory* out) {
  const int T = pb.horizon;
  Work w(T);
  MatrixXd H;
  VectorXd g, lb, ub;
  std::vector<Vector6d> ps(T + 1);
  std::vector<Vector6d> xt(T + 1);
  std::vector<Vector2d> ct(T);
  double rho = 1.0;
  // Levenberg damping on the scaled Hessian. The deadband blend carries far
  // more curvature than the Gauss-Newton model sees, so undamped steps
  // through it overshoot and cycle; damping rises on rejected unit steps
  // and decays to zero on accepted ones.
  double mu = 0.0;
  // Thrust and its slope are identically zero below the blend, so any
  // parked throttle magnitude is dynamically equivalent to zero and the
  // control cost strictly prefers zero. Snapping removes the residual
  // gradient such variables would otherwise shed only geometrically.
  const double flat_edge =
      (pb.bounds.rpm_min <= 0.0 && pb.bounds.rpm_max >= 0.0)
          ? pb.params.deadband_rpm - pb.params.deadband_blend_rpm
          : 0.0;
  bool exact_mode = false;
  bool exact_banned = false;
  int exact_regress = 0;
  int exact_stall = 0;
  double exact_ref = std::numeric_limits<double>::infinity();
  int stall_count = 0;
  double stall_ref = std::numeric_limits<double>::infinity();
  double prev_kkt = std::numeric_limits<double>::infinity();
  while (true) {
    linearize(pb, *xs, *cs, lambda_s, &w);
    double defect = 0.0;
    double l1 = 0.0;
    for (const Vector6d& d : w.d) {
      defect = std::max(defect, d.lpNorm<Eigen::Infinity>());
      l1 += d.lpNorm<1>();
    }
    const std::vector<Vector6d> lam = costates(pb, w);
    int ktt = -1;
    int kti = -1;
    const double kkt = kkt_residual(pb, w, *cs, lam, &ktt, &kti);
    out->kkt_residual = kkt;
    out->defect_norm = defect;
    if (kkt <= pb.tol_kkt && defect <= pb.tol_con) return true;
    if (*iters_left <= 0) return false;

    // Model selection. The convex model makes steady progress everywhere
    // but can flatline in a shallow curvature-mismatch cycle near a
    // solution; the exact model finishes such tails quadratically but is
    // poison near saddle regions, where its damped steps inflate the
    // gradient without buying merit. So the exact model is a rescue: it
    // engages only once convex progress has stalled close to a solution,
    // and a run of exact iterations without strict progress demotes the
    // rest of the solve back to the convex model for good.
    if (exact_mode) {
      bool demote = false;
      if (kkt >= prev_kkt && ++exact_regress >= 5) demote = true;
      if (kkt < prev_kkt) exact_regress = 0;
      if (kkt < 0.5 * exact_ref) {
        exact_ref = kkt;
        exact_stall = 0;
      } else if (++exact_stall >= 10) {
        demote = true;
      }
      if (demote) {
        exact_mode = false;
        exact_banned = true;
        mu = 0.0;
      }
    } else if (!exact_banned) {
      if (kkt < 0.125 * stall_ref) {
        stall_ref = kkt;
        stall_count = 0;
      } else if (++stall_count >= 15 && kkt < kExactPhaseKkt) {
        exact_mode = true;
        exact_regress = 0;
        exact_ref = kkt;
        exact_stall = 0;
        mu = 0.0;
      }
    }
    prev_kkt = kkt;
    build_reduced_qp(pb, w, *xs, *cs, lam, mu, exact_mode, &H, &g, &lb, &ub);
    const VectorXd step = solve_box_qp(H, g, lb, ub);
    if (!step.allFinite()) {
      mu = std::max(10.0 * mu, 1e-2);
      out->merit_history.push_back(
          out->merit_history.empty()
              ? objective_core(pb, *xs, *cs, slack_value(pb, *xs), lambda_s) +
                    rho * l1
              : out->merit_history.back());
      ++out->iterations;
      --(*iters_left);
      continue;
    }
    std::vector<Vector2d> pc(T);
    for (int t = 0; t < T; ++t)
      pc[t] = Vector2d(step(2 * t) * control_scale(0),
                       step(2 * t + 1) * control_scale(1));
    ps[0].setZero();
    for (int t = 0; t < T; ++t)
      ps[t + 1] = w.A[t] * ps[t] + w.B[t] * pc[t] - w.d[t];

    rho = std::max(rho, 1.1 * multiplier_norm(pb, w, ps) + 1.0);
    double gdotp = 0.0;
    for (int t = 1; t <= T; ++t) gdotp += w.gs[t].dot(ps[t]);
    for (int t = 0; t < T; ++t) gdotp += w.gc[t].dot(pc[t]);
    double descent = gdotp - rho * l1;
    if (descent > -1e-16) descent = -1e-16 * (1.0 + std::abs(gdotp));
    const double merit0 =
        objective_core(pb, *xs, *cs, slack_value(pb, *xs), lambda_s) + rho * l1;

    std::vector<Vector6d> dtrial(T);
    auto candidate = [&](double a) {
      xt[0] = (*xs)[0];
      for (int t = 0; t < T; ++t) {
        ct[t] = clip_control(pb.bounds, (*cs)[t] + a * pc[t]);
        if (std::abs(ct[t](0)) < flat_edge) ct[t](0) = 0.0;
        xt[t + 1] = (*xs)[t + 1] + a * ps[t + 1];
      }
      double l1a = 0.0;
      for (int t = 0; t < T; ++t) {
        dtrial[t] = xt[t + 1] - unwrapped_step(pb, xt[t], ct[t]);
        l1a += dtrial[t].lpNorm<1>();
      }
      return objective_core(pb, xt, ct, slack_value(pb, xt), lambda_s) +
             rho * l1a;
    };
    double alpha = 1.0;
    double merit = candidate(1.0);
    // Near the solution the predicted decrease drops below the rounding
    // noise of the merit itself; insisting on measurable descent there
    // turns the tail into a random walk. Full steps with sub-noise model
    // effect polish the iterate and are accepted on faith in the model.
    const double noise = 1e-13 * (1.0 + std::abs(merit0));
    bool accepted = merit <= merit0 + kArmijoSlope * descent ||
                    (-descent <= noise && merit <= merit0 + noise);
    if (!accepted) {
      // Second-order correction: the quadratic thrust law bends the
      // constraints enough that the l1 merit rejects good unit steps.
      // Cancel the curvature-induced defects of the full step before
      // backing off to shorter ones.
      Vector6d corr = Vector6d::Zero();
      for (int t = 0; t < T; ++t) {
        corr = w.A[t] * corr - dtrial[t];
        xt[t + 1] += corr;
      }
      double l1c = 0.0;
      for (int t = 0; t < T; ++t)
        l1c += (xt[t + 1] - unwrapped_step(pb, xt[t], ct[t])).lpNorm<1>();
      merit = objective_core(pb, xt, ct, slack_value(pb, xt), lambda_s) +
              rho * l1c;
      accepted = merit <= merit0 + kArmijoSlope * descent;
    }
    while (!accepted && alpha > kAlphaMin) {
      // Safeguarded quadratic interpolation: land near the 1-D minimizer
      // instead of halving past it, which is what lets chronically
      // overshooting directions settle rather than cycle.
      const double denom = 2.0 * (merit - merit0 - alpha * descent);
      double anew =
          denom > 0.0 ? -descent * alpha * alpha / denom : 0.5 * alpha;
      if (!(anew >= 0.01 * alpha)) anew = 0.01 * alpha;
      if (anew > 0.9 * alpha) anew = 0.9 * alpha;
      alpha = anew;
      merit = candidate(alpha);
      accepted = merit <= merit0 + kArmijoSlope * alpha * descent;
    }
    if (!accepted) {
      // Model and merit disagree even at the shortest step. Damp harder
      // and rebuild from the same iterate instead of drifting uphill.
      mu = std::max(10.0 * mu, 1e-2);
    } else if (alpha >= 0.5) {
      mu = mu < 1e-8 ? 0.0 : 0.4 * mu;
    } else if (alpha < 0.25) {
      mu = std::max(4.0 * mu, 1e-4);
    }
    if (std::getenv("SLIPWAY_OPT_TRACE"))
      std::fprintf(stderr,
                   "  it=%3d kkt=%9.3e@(%2d,%d c=%9.3f) def=%9.3e mu=%8.2e "
                   "alpha=%9.3e%s merit=%.9e\n",
                   out->iterations, kkt, ktt, kti,
                   ktt >= 0 ? (*cs)[ktt](kti) : 0.0, defect, mu, alpha,
                   accepted ? "" : " rej", merit);
    if (accepted) {
      xs->swap(xt);
      cs->swap(ct);
      out->merit_history.push_back(merit);
    } else {
      out->merit_history.push_back(merit0);
    }
    ++out->iterations;
    --(*iters_left);
  }
}

}  // namespace

void DockingProblem::validate() const {
  params.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("dt must be positive and finite");
  if (reference.size() != static_cast<size_t>(horizon) + 1)
    throw std::invalid_argument("reference length must be horizon + 1");
  if (!psd(lambda_tau, 1e-12 * (1.0 + lambda_tau.norm())))
    throw std::invalid_argument("lambda_tau must be symmetric PSD");
  if (!psd(lambda_ref, 1e-12 * (1.0 + lambda_ref.norm())))
    throw std::invalid_argument("lambda_ref must be symmetric PSD");
  if (!(lambda_s >= 0.0) || !std::isfinite(lambda_s))
    throw std::invalid_argument("lambda_s must be nonnegative and finite");
  if (pseudo_huber) {
    if (!(huber_delta > 0.0))
      throw std::invalid_argument("huber_delta must be positive");
    const Matrix6d diag = lambda_ref.diagonal().asDiagonal();
    if ((lambda_ref - diag).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + lambda_ref.norm()))
      throw std::invalid_argument(
          "pseudo-Huber mode needs a diagonal lambda_ref");
  }
  if (!(tol_kkt > 0.0) || !(tol_con > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
}

DockingProblem build_problem(const VesselState& initial_state,
                             const VesselParams& params,
                             const BufferPoint& buffer,
                             const WindCondition& wind, const Config& cfg) {
  DockingProblem pb;
  pb.params = params;
  pb.initial_state = initial_state;
  pb.wind = wind;
  pb.horizon = cfg.get_int("opt.horizon", 40);
  pb.dt = cfg.get_double("opt.dt", 0.2);
  const double cruise = cfg.get_double("opt.cruise_speed", 2.0);
  const double approach = cfg.get_double("opt.approach_speed", 1.0);
  const double u_ref = buffer.is_terminal_phase ? approach : cruise;
  Vector6d ref;
  ref << buffer.position.x(), buffer.position.y(), buffer.heading, u_ref, 0.0,
      0.0;
  pb.reference.assign(pb.horizon + 1, ref);
  pb.lambda_tau = Vector2d(cfg.get_double("opt.lambda_rpm", 1e-7),
                           cfg.get_double("opt.lambda_alpha", 10.0))
                      .asDiagonal();
  Vector6d lref;
  lref << cfg.get_double("opt.lambda_ref_x", 1.0),
      cfg.get_double("opt.lambda_ref_y", 1.0),
      cfg.get_double("opt.lambda_ref_psi", 10.0),
      cfg.get_double("opt.lambda_ref_u", 1.0),
      cfg.get_double("opt.lambda_ref_v", 1.0),
      cfg.get_double("opt.lambda_ref_r", 1.0);
  pb.lambda_ref = lref.asDiagonal();
  pb.lambda_s = cfg.get_double("opt.lambda_slack", 100.0);
  if (buffer.is_terminal_phase) {
    const double loading = cfg.get_double("opt.rpm_loading", 650.0);
    pb.bounds.rpm_min = -loading;
    pb.bounds.rpm_max = loading;
  } else {
    pb.bounds.rpm_min = cfg.get_double("opt.rpm_min", -2500.0);
    pb.bounds.rpm_max = cfg.get_double("opt.rpm_max", 3000.0);
  }
  const double alpha_limit = cfg.get_double("opt.alpha_limit", 0.5);
  pb.bounds.alpha_min = -alpha_limit;
  pb.bounds.alpha_max = alpha_limit;
  pb.psi_d = buffer.heading;
  const double reach = cruise * pb.horizon * pb.dt;
  const double docking_range = cfg.get_double("opt.docking_range", reach);
  const double range = std::hypot(buffer.position.x() - initial_state.x,
                                  buffer.position.y() - initial_state.y);
  pb.docking_active = buffer.is_terminal_phase && range <= docking_range;
  pb.docking_hard = cfg.get_bool("opt.docking_hard", false);
  pb.pseudo_huber = cfg.get_bool("opt.pseudo_huber", false);
  pb.huber_delta = cfg.get_double("opt.huber_delta", 1.0);
  pb.tol_kkt = cfg.get_double("opt.tol_kkt", 1e-6);
  pb.tol_con = cfg.get_double("opt.tol_con", 1e-8);
  pb.max_iter = cfg.get_int("opt.max_iter", 200);
  pb.validate();
  return pb;
}

double evaluate_objective(const DockingProblem& problem,
                          const std::vector<VesselState>& states,
                          const std::vector<ControlInput>& controls,
                          double slack) {
  if (states.size() != static_cast<size_t>(problem.horizon) + 1 ||
      controls.size() != static_cast<size_t>(problem.horizon))
    throw std::invalid_argument("trajectory length does not match horizon");
  std::vector<Vector6d> xs(states.size());
  std::vector<Vector2d> cs(controls.size());
  for (size_t t = 0; t < states.size(); ++t) xs[t] = states[t].to_vector();
  for (size_t t = 0; t < controls.size(); ++t)
    cs[t] = Vector2d(controls[t].rpm, controls[t].alpha);
  return objective_core(problem, xs, cs, slack, problem.lambda_s);
}

Trajectory solve(const DockingProblem& problem, const Trajectory* warm_start) {
  problem.validate();
  const auto start = std::chrono::steady_clock::now();
  const int T = problem.horizon;
  Trajectory out;
  out.dt = problem.dt;
  auto finish = [&](std::vector<Vector6d>& xs, std::vector<Vector2d>& cs) {
    const double slack = slack_value(problem, xs);
    out.slack_psi = slack;
    out.objective_value =
        objective_core(problem, xs, cs, slack, problem.lambda_s);
    out.states.resize(T + 1);
    for (int t = 0; t <= T; ++t) {
      out.states[t] = VesselState::from_vector(xs[t]);
      out.states[t].psi = wrap_to_pi(out.states[t].psi);
    }
    out.controls.resize(T);
    for (int t = 0; t < T; ++t) out.controls[t] = {cs[t](0), cs[t](1)};
    out.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
  };

  // The flat core of the thrust deadband is a degenerate stationary point:
  // below it the engine Jacobian is exactly zero, so a seed parked there
  // never feels the reference pull. Start inside the live region instead,
  // and nudge any parked warm-start entry to the blend where the
  // linearization can see the engine again.
  const double flat_edge =
      problem.params.deadband_rpm - problem.params.deadband_blend_rpm;
  std::vector<Vector2d> cs(T, Vector2d(1000.0, 0.0));
  if (warm_start && warm_start->controls.size() == static_cast<size_t>(T)) {
    for (int t = 0; t < T; ++t)
      cs[t] = Vector2d(warm_start->controls[t].rpm,
                       warm_start->controls[t].alpha);
  }
  if (problem.bounds.consistent()) {
    for (Vector2d& c : cs) {
      if (std::abs(c(0)) < flat_edge)
        c(0) = c(0) >= 0.0 ? problem.params.deadband_rpm
                           : -problem.params.deadband_rpm;
      c = clip_control(problem.bounds, c);
    }
  }
  std::vector<Vector6d> xs(T + 1);
  xs[0] = problem.initial_state.to_vector();
  auto restore = [&] {
    for (int t = 0; t < T; ++t) xs[t + 1] = unwrapped_step(problem, xs[t], cs[t]);
  };
  restore();

  if (!problem.bounds.consistent()) {
    out.status = SolverStatus::kInfeasible;
    finish(xs, cs);
    return out;
  }

  int iters_left = problem.max_iter;
  bool converged = false;
  if (problem.docking_active && problem.docking_hard) {
    // Penalty continuation: escalate the slack weight until the terminal
    // heading residual is numerically zero.
    double stage = std::max(problem.lambda_s, 1e6);
    for (int k = 0; k < 3; ++k, stage *= 100.0) {
      converged = run_sqp(problem, stage, &xs, &cs, &iters_left, &out);
      if (!converged) break;
      restore();
      out.defect_norm = 0.0;
      if (std::abs(slack_value(problem, xs)) <= kHardSlackTol) break;
      if (k == 2) converged = false;
    }
  } else {
    converged = run_sqp(problem, problem.lambda_s, &xs, &cs, &iters_left, &out);
    if (converged) {
      restore();
      out.defect_norm = 0.0;
    }
  }
  out.status = converged ? SolverStatus::kConverged : SolverStatus::kMaxIter;
  finish(xs, cs);
  return out;
}

GradientCheckReport check_gradients(const DockingProblem& problem,
                                    const std::vector<VesselState>& states,
                                    const std::vector<ControlInput>& controls,
                                    double h_rel) {
  problem.validate();
  if (states.size() != static_cast<size_t>(problem.horizon) + 1 ||
      controls.size() != static_cast<size_t>(problem.horizon))
    throw std::invalid_argument("trajectory length does not match horizon");
  if (!(h_rel > 0.0)) throw std::invalid_argument("h_rel must be positive");
  const int T = problem.horizon;
  std::vector<Vector6d> xs(T + 1);
  std::vector<Vector2d> cs(T);
  for (int t = 0; t <= T; ++t) xs[t] = states[t].to_vector();
  for (int t = 0; t < T; ++t)
    cs[t] = Vector2d(controls[t].rpm, controls[t].alpha);
  Work w(T);
  linearize(problem, xs, cs, problem.lambda_s, &w);

  GradientCheckReport report;
  auto objective = [&] {
    return objective_core(problem, xs, cs, slack_value(problem, xs),
                          problem.lambda_s);
  };
  auto record = [&](double analytic, double fd, double scale, double* worst) {
    const double a = analytic * scale;
    const double f = fd * scale;
    const double err = std::abs(a - f) / std::max({1.0, std::abs(a), std::abs(f)});
    *worst = std::max(*worst, err);
  };
  for (int t = 1; t <= T; ++t) {
    for (int i = 0; i < 6; ++i) {
      const double h = h_rel * state_scale(i);
      const double saved = xs[t](i);
      xs[t](i) = saved + h;
      const double jp = objective();
      xs[t](i) = saved - h;
      const double jm = objective();
      xs[t](i) = saved;
      record(w.gs[t](i), (jp - jm) / (2.0 * h), state_scale(i),
             &report.objective_error);
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < 2; ++i) {
      const double h = h_rel * control_scale(i);
      const double saved = cs[t](i);
      cs[t](i) = saved + h;
      const double jp = objective();
      cs[t](i) = saved - h;
      const double jm = objective();
      cs[t](i) = saved;
      record(w.gc[t](i), (jp - jm) / (2.0 * h), control_scale(i),
             &report.objective_error);
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < 6; ++j) {
      const double h = h_rel * state_scale(j);
      Vector6d sp = xs[t];
      Vector6d sm = xs[t];
      sp(j) += h;
      sm(j) -= h;
      const Vector6d col = (unwrapped_step(problem, sp, cs[t]) -
                            unwrapped_step(problem, sm, cs[t])) /
                           (2.0 * h);
      for (int i = 0; i < 6; ++i)
        record(w.A[t](i, j), col(i), state_scale(j) / state_scale(i),
               &report.dynamics_error);
    }
    for (int j = 0; j < 2; ++j) {
      const double h = h_rel * control_scale(j);
      Vector2d cp = cs[t];
      Vector2d cm = cs[t];
      cp(j) += h;
      cm(j) -= h;
      const Vector6d col = (unwrapped_step(problem, xs[t], cp) -
                            unwrapped_step(problem, xs[t], cm)) /
                           (2.0 * h);
      for (int i = 0; i < 6; ++i)
        record(w.B[t](i, j), col(i), control_scale(j) / state_scale(i),
               &report.dynamics_error);
    }
  }
  return report;
}

void export_csv(const Trajectory& trajectory, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f, "t,x,y,psi,u,v,r,rpm,alpha\n");
  const size_t n = trajectory.states.size();
  for (size_t k = 0; k < n; ++k) {
    const VesselState& s = trajectory.states[k];
    const size_t ci = k < trajectory.controls.size()
                          ? k
                          : (trajectory.controls.empty()
                                 ? size_t(0)
                                 : trajectory.controls.size() - 1);
    const ControlInput c =
        trajectory.controls.empty() ? ControlInput{} : trajectory.controls[ci];
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 k * trajectory.dt, s.x, s.y, s.psi, s.u, s.v, s.r, c.rpm,
                 c.alpha);
  }
  std::fclose(f);
}

}  // namespace slipway
