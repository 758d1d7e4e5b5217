// Copyright 2026 The ccmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "ccmpc/depth_camera.h"
#include "ccmpc/mav_dynamics.h"
#include "ccmpc/obstacle_detection.h"
#include "ccmpc/obstacle_tracking.h"
#include "ccmpc/planner.h"

namespace ccmpc {
namespace {

const CameraIntrinsics kCam = CameraIntrinsics::FromFocal(160, 120, 96.5, 6.0);

std::vector<BoxObstacle> Scene(int n) {
  std::vector<BoxObstacle> boxes;
  for (int i = 0; i < n; ++i) {
    boxes.push_back({Vec3(2.0 + 0.7 * i, 1.5 * std::sin(1.3 * i), 1.0), Vec3(0.5, 0.5, 1.8),
                     Vec3::Zero()});
  }
  return boxes;
}

Pose CameraPose() {
  Pose pose;
  pose.position = Vec3(0, 0, 1);
  return pose;
}

GaussianState Estimate(const Vec3& p) {
  MavState x;
  x.p = p;
  return {x.ToVector(), Eigen::MatrixXd(NoiseConfig::DefaultProcess())};
}

void BM_RenderDepth(benchmark::State& state) {
  const auto boxes = Scene(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(RenderDepth(CameraPose(), kCam, boxes));
  }
}
BENCHMARK(BM_RenderDepth)->Arg(1)->Arg(4)->Arg(9);

void BM_DetectObstacles(benchmark::State& state) {
  const DepthImage img = ApplyNoise(
      RenderDepth(CameraPose(), kCam, Scene(static_cast<int>(state.range(0)))),
      SensorNoiseModel{0.01, true, 0.01}, 1);
  const GaussianState est = Estimate(Vec3(0, 0, 1));
  const DetectionParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(DetectObstacles(img, est, params));
  }
}
BENCHMARK(BM_DetectObstacles)->Arg(1)->Arg(4)->Arg(9)->Unit(benchmark::kMicrosecond);

void BM_PropagateCovariance(benchmark::State& state) {
  std::vector<std::pair<MavState, ControlInput>> traj;
  MavState x;
  x.p = Vec3(0, 0, 1);
  for (int k = 0; k < 25; ++k) {
    const ControlInput u{0.05 * std::sin(0.3 * k), 0.08, 0.1, 0.2};
    traj.push_back({x, u});
    x = DynamicsStep(x, u, 0.06);
  }
  const StateMat w = NoiseConfig::DefaultProcess();
  for (auto _ : state) {
    benchmark::DoNotOptimize(PropagateCovariance(w, traj, w, 0.06));
  }
}
BENCHMARK(BM_PropagateCovariance)->Unit(benchmark::kMicrosecond);

// One receding-horizon solve with the given number of static obstacles,
// warm-started from the previous call as in closed loop.
void BM_PlannerSolve(benchmark::State& state) {
  std::vector<ObstaclePrediction> obs;
  for (int i = 0; i < state.range(0); ++i) {
    Track t;
    t.pv << Vec3(3.0 + i, (i % 2 ? 0.8 : -0.8), 1.0), Vec3(-0.5, 0.0, 0.0);
    t.pv_cov = 0.01 * Mat6::Identity();
    t.size = Vec3(0.5, 0.5, 1.8);
    obs.push_back(PredictTrack(t, 0.06, 25, 0.5 * Mat3::Identity()));
  }
  const GaussianState x0 = Estimate(Vec3(0, 0, 1));
  const FovRegion fov = FovHalfspaces(CameraPose(), kCam);
  Planner planner;
  for (auto _ : state) {
    benchmark::DoNotOptimize(planner.Plan(x0, Vec3(8, 0, 1), obs, fov));
  }
}
BENCHMARK(BM_PlannerSolve)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ccmpc

BENCHMARK_MAIN();
