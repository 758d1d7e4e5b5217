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

#ifndef CCMPC_PLANNER_H_
#define CCMPC_PLANNER_H_

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccmpc/core_types.h"
#include "ccmpc/mav_dynamics.h"
#include "ccmpc/obstacle_tracking.h"

namespace ccmpc {

struct PlannerParams {
  int horizon = 25;     // N
  double dt = 0.06;     // s
  Mat3 goal_weight = Mat3::Identity();                      // Q_g
  Eigen::Vector4d control_weight{4.0, 4.0, 1.0, 0.1};       // diag(Q_u)
  double collision_weight = 5.0;                            // Q_o
  double collision_steepness = 4.0;                         // lambda_o, 1/m
  double collision_margin = 0.3;  // r_o = max semi-axis + mav_radius + margin
  // Take r_o from the largest horizontal semi-axis only, so tall obstacles
  // do not widen the potential field sideways.
  bool horizontal_collision_radius = false;
  double yaw_weight = 1.0;                                  // Q_psi
  double delta = 0.03;          // collision probability threshold
  double mav_radius = 0.4;      // m
  ControlVec u_min{-20.0 * 3.14159265358979323846 / 180.0,
                   -20.0 * 3.14159265358979323846 / 180.0, -1.0,
                   -90.0 * 3.14159265358979323846 / 180.0};
  ControlVec u_max{20.0 * 3.14159265358979323846 / 180.0,
                   20.0 * 3.14159265358979323846 / 180.0, 1.0,
                   90.0 * 3.14159265358979323846 / 180.0};
  double max_speed = 3.0;       // per axis, m/s
  double min_altitude = -std::numeric_limits<double>::infinity();  // m, world z
  double max_altitude = std::numeric_limits<double>::infinity();
  int max_obstacles = 2;
  bool use_fov = true;
  double penalty_weight = 1e4;  // L1 weight on softened inequalities
  int sqp_iterations = 5;
  double yaw_speed_gate = 0.1;  // m/s
  double yaw_goal_distance = 0.2;  // below the gate, face the goal beyond this range
  // Moves the apex of the field-of-view pyramid this far behind the camera
  // along the optical axis; 0 keeps the planes through the camera center.
  double fov_backoff = 0.0;  // m
  DynamicsParams dynamics;
  StateMat process_noise = NoiseConfig::DefaultProcess();

  void Validate() const;
};

// Visible region {p : n_j' p <= m_j, j = 1..5}: four side planes through the
// camera center plus the far plane at max range.
struct FovRegion {
  std::array<Vec3, 5> normals;
  std::array<double, 5> offsets;

  // m_j - n_j' p for every plane; all >= 0 iff p is inside.
  std::array<double, 5> Residuals(const Vec3& p) const;
  bool Contains(const Vec3& p) const;
};

FovRegion FovHalfspaces(const Pose& pose, const CameraIntrinsics& intrinsics);

enum class SolveStatus { kOptimal, kMaxIter, kInfeasibleSoftened };
std::string ToString(SolveStatus status);

struct PlanResult {
  std::vector<MavState> states;        // x^1 .. x^N
  std::vector<ControlInput> controls;  // u^0 .. u^{N-1}
  std::vector<Mat3> covariances;       // Sigma^1 .. Sigma^N
  std::vector<double> min_chance_residual;  // per stage, +inf without obstacles
  double cost = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
  double solve_time = 0.0;  // wall-clock seconds
  double max_constraint_violation = 0.0;
  int iterations = 0;
};

// Terminal cost (p - goal)' Q_g (p - goal).
double GoalCost(const Vec3& p_terminal, const Vec3& goal, const Mat3& q_g);

// Logistic potential Q_o / (1 + exp(lambda (d - r_o))).
double CollisionCost(double distance, double q_o, double lambda, double r_o);

// Direction of motion atan2(v_y, v_x), or `previous` when the horizontal
// speed is below `speed_gate`.
double YawReference(const Vec3& v_prev, double previous, double speed_gate = 0.1);

// Omega^(1/2) = R diag(1/(a+r), 1/(b+r), 1/(c+r)) R' with R the yaw rotation.
Mat3 OmegaSqrt(const Ellipsoid& obstacle, double mav_radius);

struct ChanceResidual {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();  // w.r.t. the vehicle mean position
};

// Deterministic form of Pr(collision) <= delta:
//   n' Omega^(1/2) (p - p_o) - 1 - erfinv(1 - 2 delta) sqrt(2 n' Omega^(1/2)
//   (Sigma + Sigma_o) Omega^(1/2) n),   n = (p - p_o) / |p - p_o|.
// Non-negative when the constraint holds. Throws Error when the centers
// coincide.
ChanceResidual ChanceConstraintResidual(const Vec3& p_mean, const Mat3& p_cov,
                                        const Ellipsoid& obstacle,
                                        const Mat3& obstacle_cov, double delta,
                                        double mav_radius);

struct PlanningProblem {
  MavState x0;
  StateMat gamma0 = StateMat::Zero();
  Vec3 goal = Vec3::Zero();
  std::vector<ObstaclePrediction> obstacles;
  std::vector<double> collision_radius;  // r_o per obstacle
  std::optional<FovRegion> fov;
  std::vector<Mat3> position_covariances;  // Sigma^1 .. Sigma^N, frozen
  std::vector<double> yaw_reference;       // stage 1 .. N
  std::vector<ControlInput> initial_controls;  // shifted previous plan
  PlannerParams params;

  int NumChanceRows() const;
  int NumFovRows() const;
};

// Keeps the max_obstacles tracks closest to `position`, nearest first.
std::vector<ObstaclePrediction> SelectClosest(std::vector<ObstaclePrediction> all,
                                              std::span<const Vec3> current_centers,
                                              const Vec3& position, int max_obstacles);

// Assembles the receding-horizon problem. Covariances and yaw references
// come from rolling the (shifted) previous plan forward from the current
// estimate; without a previous plan a hover trajectory is used.
PlanningProblem BuildProblem(const GaussianState& x0, const Vec3& goal,
                             std::vector<ObstaclePrediction> obstacles,
                             std::optional<FovRegion> fov,
                             const PlanResult* prev_plan,
                             const PlannerParams& params);

// Previous controls shifted by one stage with the last one repeated.
std::vector<ControlInput> ShiftControls(const PlanResult& prev, int horizon);

// Rolls out the controls from x0 with the planning model.
std::vector<MavState> Rollout(const MavState& x0, std::span<const ControlInput> controls,
                              double dt, const DynamicsParams& params);

// Objective value of a control sequence (no penalty terms).
double EvaluateCost(const PlanningProblem& problem, std::span<const MavState> states,
                    std::span<const ControlInput> controls);

// Largest violation over all chance, field-of-view, speed, altitude and
// attitude inequalities of a state trajectory, evaluated from scratch.
double MaxConstraintViolation(const PlanningProblem& problem,
                              std::span<const MavState> states);

// Sequential convex programming over the control sequence with single-
// shooting rollouts: each iteration linearizes the dynamics and constraints,
// builds a Gauss-Newton QP with L1-softened inequalities and a trust region,
// and accepts the step by backtracking on the exact-penalty merit function.
PlanResult Solve(const PlanningProblem& problem);

// Receding-horizon wrapper that keeps the previous plan for warm starts.
class Planner {
 public:
  explicit Planner(PlannerParams params = {}) : params_(std::move(params)) {}

  PlanResult Plan(const GaussianState& x0, const Vec3& goal,
                  std::vector<ObstaclePrediction> obstacles,
                  std::optional<FovRegion> fov);

  const PlannerParams& params() const { return params_; }
  const std::optional<PlanResult>& last_plan() const { return last_; }
  void Reset() { last_.reset(); }

 private:
  PlannerParams params_;
  std::optional<PlanResult> last_;
};

}  // namespace ccmpc

#endif  // CCMPC_PLANNER_H_
