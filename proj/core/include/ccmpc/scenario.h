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

#ifndef CCMPC_SCENARIO_H_
#define CCMPC_SCENARIO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ccmpc/core_types.h"
#include "ccmpc/depth_camera.h"
#include "ccmpc/mav_dynamics.h"
#include "ccmpc/obstacle_detection.h"
#include "ccmpc/obstacle_tracking.h"
#include "ccmpc/planner.h"

namespace ccmpc {

struct Waypoint {
  double time = 0.0;
  Vec3 position = Vec3::Zero();
};

// Box obstacle moving along a piecewise-linear schedule. Before the first
// and after the last waypoint the obstacle holds still.
struct ObstacleScript {
  std::string name;
  Vec3 size = Vec3::Ones();
  std::vector<Waypoint> schedule;
  Vec3 eval_semi_axes = Vec3::Zero();  // ground-truth ellipsoid for separation

  Vec3 PositionAt(double t) const;
  Vec3 VelocityAt(double t) const;
  BoxObstacle BoxAt(double t) const;
  Ellipsoid EvalEllipsoidAt(double t) const;
};

struct Scenario {
  std::string name = "scenario";
  uint64_t seed = 0;
  double duration = 10.0;  // s

  CameraIntrinsics camera = CameraIntrinsics::FromFocal(160, 120, 96.5, 6.0);
  SensorNoiseModel sensor_noise;
  NoiseConfig noise;  // process noise W per planning step, estimator covariance
  DetectionParams detection;
  TrackerParams tracker;
  PlannerParams planner;
  bool planner_enabled = true;

  double detection_rate = 60.0;  // Hz
  double tick_rate = 600.0;      // Hz, simulation clock resolution
  double goal_tolerance = 0.3;   // m
  bool stop_at_goal = false;

  Vec3 goal = Vec3::Zero();
  MavState start;
  std::vector<ObstacleScript> obstacles;
  std::vector<Wall> walls;

  int TicksPerFrame() const;
  int TicksPerControl() const;
  // Throws Error describing the first problem found.
  void Validate() const;
};

Scenario ParseScenario(const std::string& yaml_text);
Scenario LoadScenario(const std::string& path);

}  // namespace ccmpc

#endif  // CCMPC_SCENARIO_H_
