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

#ifndef CCMPC_SIMULATION_H_
#define CCMPC_SIMULATION_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ccmpc/obstacle_tracking.h"
#include "ccmpc/planner.h"
#include "ccmpc/scenario.h"

namespace ccmpc {

// Signed Euclidean distance from p to the ellipsoid surface, negative
// inside. The closest point comes from a bisection on the scalar KKT
// equation, with the degenerate axis-plane cases handled separately.
double Separation(const Vec3& p, const Ellipsoid& e);

struct StepRecord {
  double time = 0.0;
  MavState truth;
  MavState estimate;
  ControlInput control;
  std::vector<Track> tracks;
  std::vector<Vec3> obstacle_positions;  // ground truth, one per script
  std::vector<double> separation;        // one per script
  SolveStatus status = SolveStatus::kOptimal;
  double cost = 0.0;
  double max_violation = 0.0;
  int num_detections = 0;  // in the latest frame
};

struct DetectionErrorRow {
  std::string name;
  int frames = 0;  // frames with a matched track
  double position_error = 0.0;  // mean Euclidean error, m
  double velocity_error = 0.0;  // mean Euclidean error, m/s
};

struct RunMetrics {
  std::string scenario;
  uint64_t seed = 0;
  std::vector<StepRecord> steps;
  std::vector<double> min_separation;  // per obstacle script
  double overall_min_separation = 0.0;  // +inf without obstacles
  double max_speed = 0.0;
  bool collision = false;
  bool reached_goal = false;
  double final_goal_distance = 0.0;
  std::map<std::string, int> status_counts;
  std::vector<DetectionErrorRow> detection_errors;

  // Wall-clock measurements; never part of the deterministic logs.
  std::vector<double> detect_times;
  std::vector<double> solve_times;
};

// Closed loop on a simulated clock: detection frames at detection_rate,
// planning every planner.dt, dynamics integrated at tick_rate with the
// per-planning-step process noise scaled to the tick length.
RunMetrics RunScenario(const Scenario& scenario);

// Frames are rendered and tracked without closing the control loop when the
// planner is disabled, so this is the same as RunScenario's error table.
std::vector<DetectionErrorRow> DetectionBenchmark(const Scenario& scenario);

struct Percentiles {
  double p50 = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};
Percentiles ComputePercentiles(std::vector<double> values);

struct CampaignReport {
  std::string scenario;
  uint64_t seed0 = 0;
  std::vector<uint64_t> seeds;
  std::vector<double> min_separation;  // per run
  std::vector<double> max_speed;       // per run
  std::vector<bool> reached_goal;      // per run
  int collisions = 0;
  std::map<std::string, int> status_counts;
  Percentiles solve_time;
  Percentiles detect_time;
};

// Runs seeds seed0 .. seed0 + n_runs - 1. Runs are independent; with
// jobs > 1 they execute on that many threads and the report is identical.
CampaignReport McCampaign(const Scenario& scenario, int n_runs, uint64_t seed0,
                          int jobs = 1, std::vector<RunMetrics>* runs = nullptr);

// Monte Carlo check of the deterministic chance constraint: the vehicle mean
// is placed along `direction` from the obstacle center where the residual is
// zero (found by bisection), then vehicle and obstacle positions are sampled
// and the fraction inside the inflated ellipsoid is counted.
struct ChanceCheck {
  double delta = 0.0;
  double distance = 0.0;  // center distance where the residual vanishes
  double residual = 0.0;  // at that distance
  double empirical = 0.0;
  int samples = 0;
};
ChanceCheck CheckChanceConstraint(const Ellipsoid& obstacle, const Mat3& cov,
                                  const Mat3& obstacle_cov, const Vec3& direction,
                                  double delta, double mav_radius, int samples,
                                  uint64_t seed);

}  // namespace ccmpc

#endif  // CCMPC_SIMULATION_H_
