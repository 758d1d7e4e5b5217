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

#ifndef CCMPC_MAV_DYNAMICS_H_
#define CCMPC_MAV_DYNAMICS_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ccmpc/core_types.h"

namespace ccmpc {

inline constexpr int kStateDim = 9;
inline constexpr int kControlDim = 4;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;
using ControlVec = Eigen::Matrix<double, kControlDim, 1>;
using ControlMat = Eigen::Matrix<double, kStateDim, kControlDim>;

// Vehicle state [p, v, roll, pitch, yaw] in the world frame (z up).
struct MavState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  StateVec ToVector() const;
  static MavState FromVector(const StateVec& x);
  Pose ToPose() const { return {p, roll, pitch, yaw}; }
};

// u = 0 is hover: attitude commands are absolute angles, the vertical
// command is a velocity setpoint and yaw is commanded as a rate.
struct ControlInput {
  double roll_cmd = 0.0;
  double pitch_cmd = 0.0;
  double vz_cmd = 0.0;
  double yaw_rate_cmd = 0.0;

  ControlVec ToVector() const { return {roll_cmd, pitch_cmd, vz_cmd, yaw_rate_cmd}; }
  static ControlInput FromVector(const ControlVec& u) { return {u[0], u[1], u[2], u[3]}; }
};

struct DynamicsParams {
  double gravity = 9.81;
  double drag = 0.35;       // k_D, 1/s
  double tau_roll = 0.2;    // s
  double tau_pitch = 0.2;   // s
  double tau_vz = 0.3;      // s
  double attitude_limit = 30.0 * 3.14159265358979323846 / 180.0;
};

struct NoiseConfig {
  StateMat process = StateMat::Zero();    // W, per step
  StateMat estimator = StateMat::Zero();  // simulated state-estimator covariance

  static StateMat DefaultProcess();
};

// One forward-Euler step of the continuous dynamics; attitudes are clamped to
// the attitude limit.
MavState DynamicsStep(const MavState& x, const ControlInput& u, double dt,
                      const DynamicsParams& params = {});

// DynamicsStep plus an additive draw from N(0, W). Deterministic per seed.
MavState SimulateStep(const MavState& x, const ControlInput& u, double dt,
                      const NoiseConfig& noise, uint64_t seed,
                      const DynamicsParams& params = {});

// Noisy state estimate: mean = truth + N(0, estimator), covariance =
// estimator.
GaussianState EstimateState(const MavState& truth, const NoiseConfig& noise,
                            uint64_t seed);

// Analytic d(DynamicsStep)/dx, valid strictly inside the attitude limits.
StateMat Jacobian(const MavState& x, const ControlInput& u, double dt,
                  const DynamicsParams& params = {});

// d(DynamicsStep)/du.
ControlMat ControlJacobian(const MavState& x, const ControlInput& u, double dt,
                           const DynamicsParams& params = {});

// Gamma_{k+1} = F_k Gamma_k F_k^T + W along the given (state, control)
// sequence. Returns Gamma_1 .. Gamma_N. Throws Error on a non-PSD Gamma_0.
std::vector<StateMat> PropagateCovariance(
    const StateMat& gamma0,
    std::span<const std::pair<MavState, ControlInput>> trajectory,
    const StateMat& process_noise, double dt, const DynamicsParams& params = {});

// Draws from N(0, cov) using a symmetric square root, tolerant of singular
// (PSD) covariances.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Eigen::MatrixXd& cov);
  template <typename Rng>
  Eigen::VectorXd Sample(Rng& rng) const;
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  Eigen::MatrixXd factor_;
};

}  // namespace ccmpc

#include <random>

namespace ccmpc {

template <typename Rng>
Eigen::VectorXd GaussianSampler::Sample(Rng& rng) const {
  std::normal_distribution<double> n01;
  Eigen::VectorXd z(factor_.cols());
  for (int i = 0; i < z.size(); ++i) z[i] = n01(rng);
  return factor_ * z;
}

}  // namespace ccmpc

#endif  // CCMPC_MAV_DYNAMICS_H_
