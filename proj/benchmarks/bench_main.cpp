// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include <benchmark/benchmark.h>

#include "slipway/vessel.hpp"

namespace {

void BM_EulerStep(benchmark::State& state) {
  slipway::VesselParams p;
  slipway::VesselState s;
  s.u = 1.5;
  slipway::ControlInput c{1500.0, 0.2};
  slipway::WindCondition w{5.0, 0.3};
  for (auto _ : state) {
    s = slipway::euler_step(p, s, c, w, 0.02);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_EulerStep);

void BM_StepJacobians(benchmark::State& state) {
  slipway::VesselParams p;
  slipway::VesselState s;
  s.u = 1.5;
  slipway::ControlInput c{1500.0, 0.2};
  slipway::WindCondition w{5.0, 0.3};
  for (auto _ : state) {
    slipway::Matrix6d A;
    slipway::Matrix62d B;
    slipway::euler_step_jacobians(p, s, c, w, 0.2,
                                  slipway::ThrustModel::kSmoothDeadband, &A, &B);
    benchmark::DoNotOptimize(A);
    benchmark::DoNotOptimize(B);
  }
}
BENCHMARK(BM_StepJacobians);

}  // namespace

BENCHMARK_MAIN();
