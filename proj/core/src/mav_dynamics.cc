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

#include "ccmpc/mav_dynamics.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace ccmpc {

StateVec MavState::ToVector() const {
  StateVec x;
  x << p, v, roll, pitch, yaw;
  return x;
}

MavState MavState::FromVector(const StateVec& x) {
  MavState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.roll = x[6];
  s.pitch = x[7];
  s.yaw = x[8];
  return s;
}

StateMat NoiseConfig::DefaultProcess() {
  StateVec d;
  d << 1e-4, 1e-4, 1e-4, 1e-3, 1e-3, 1e-3, 1e-4, 1e-4, 1e-4;
  return d.asDiagonal();
}

MavState DynamicsStep(const MavState& x, const ControlInput& u, double dt,
                      const DynamicsParams& prm) {
  const double g = prm.gravity;
  const double c = std::cos(x.yaw), s = std::sin(x.yaw);
  const double ax_b = g * std::tan(x.pitch);
  const double ay_b = -g * std::tan(x.roll);

  MavState n = x;
  n.p = x.p + dt * x.v;
  n.v.x() = x.v.x() + dt * (c * ax_b - s * ay_b - prm.drag * x.v.x());
  n.v.y() = x.v.y() + dt * (s * ax_b + c * ay_b - prm.drag * x.v.y());
  n.v.z() = x.v.z() + dt * (u.vz_cmd - x.v.z()) / prm.tau_vz;
  n.roll = x.roll + dt * (u.roll_cmd - x.roll) / prm.tau_roll;
  n.pitch = x.pitch + dt * (u.pitch_cmd - x.pitch) / prm.tau_pitch;
  n.yaw = x.yaw + dt * u.yaw_rate_cmd;
  n.roll = std::clamp(n.roll, -prm.attitude_limit, prm.attitude_limit);
  n.pitch = std::clamp(n.pitch, -prm.attitude_limit, prm.attitude_limit);
  return n;
}

GaussianSampler::GaussianSampler(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Symmetrized(cov));
  const Eigen::VectorXd sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  factor_ = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
}

MavState SimulateStep(const MavState& x, const ControlInput& u, double dt,
                      const NoiseConfig& noise, uint64_t seed,
                      const DynamicsParams& params) {
  MavState next = DynamicsStep(x, u, dt, params);
  if (noise.process.isZero(0.0)) return next;
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd w = GaussianSampler(noise.process).Sample(rng);
  return MavState::FromVector(next.ToVector() + w);
}

GaussianState EstimateState(const MavState& truth, const NoiseConfig& noise,
                            uint64_t seed) {
  Eigen::VectorXd mean = truth.ToVector();
  if (!noise.estimator.isZero(0.0)) {
    std::mt19937_64 rng(seed);
    mean += GaussianSampler(noise.estimator).Sample(rng);
  }
  return {mean, noise.estimator};
}

StateMat Jacobian(const MavState& x, const ControlInput& /*u*/, double dt,
                  const DynamicsParams& prm) {
  const double g = prm.gravity;
  const double c = std::cos(x.yaw), s = std::sin(x.yaw);
  const double ax_b = g * std::tan(x.pitch);
  const double ay_b = -g * std::tan(x.roll);
  const double sec2_pitch = 1.0 / std::pow(std::cos(x.pitch), 2);
  const double sec2_roll = 1.0 / std::pow(std::cos(x.roll), 2);

  StateMat f = StateMat::Identity();
  f.block<3, 3>(0, 3) = dt * Mat3::Identity();
  f(3, 3) = f(4, 4) = 1.0 - dt * prm.drag;
  f(5, 5) = 1.0 - dt / prm.tau_vz;
  // d v_xy / d roll, pitch, yaw
  f(3, 6) = dt * (-s * -g * sec2_roll);
  f(4, 6) = dt * (c * -g * sec2_roll);
  f(3, 7) = dt * (c * g * sec2_pitch);
  f(4, 7) = dt * (s * g * sec2_pitch);
  f(3, 8) = dt * (-s * ax_b - c * ay_b);
  f(4, 8) = dt * (c * ax_b - s * ay_b);
  f(6, 6) = 1.0 - dt / prm.tau_roll;
  f(7, 7) = 1.0 - dt / prm.tau_pitch;
  return f;
}

ControlMat ControlJacobian(const MavState& /*x*/, const ControlInput& /*u*/,
                           double dt, const DynamicsParams& prm) {
  ControlMat b = ControlMat::Zero();
  b(6, 0) = dt / prm.tau_roll;
  b(7, 1) = dt / prm.tau_pitch;
  b(5, 2) = dt / prm.tau_vz;
  b(8, 3) = dt;
  return b;
}

std::vector<StateMat> PropagateCovariance(
    const StateMat& gamma0,
    std::span<const std::pair<MavState, ControlInput>> trajectory,
    const StateMat& process_noise, double dt, const DynamicsParams& params) {
  if (!IsPsd(gamma0)) throw Error("propagate covariance: initial covariance is not PSD");
  std::vector<StateMat> out;
  out.reserve(trajectory.size());
  StateMat gamma = gamma0;
  for (const auto& [x, u] : trajectory) {
    const StateMat f = Jacobian(x, u, dt, params);
    gamma = Symmetrized(f * gamma * f.transpose() + process_noise);
    out.push_back(gamma);
  }
  return out;
}

}  // namespace ccmpc
