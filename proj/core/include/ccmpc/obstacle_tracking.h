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

#ifndef CCMPC_OBSTACLE_TRACKING_H_
#define CCMPC_OBSTACLE_TRACKING_H_

#include <span>
#include <utility>
#include <vector>

#include "ccmpc/core_types.h"
#include "ccmpc/obstacle_detection.h"

namespace ccmpc {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Constant-velocity track. Position and velocity share one joint covariance;
// size is filtered separately as a static state.
struct Track {
  int id = 0;
  Vec6 pv = Vec6::Zero();          // [position; velocity]
  Mat6 pv_cov = Mat6::Identity();
  Vec3 size = Vec3::Ones();
  Mat3 size_cov = Mat3::Identity();
  double last_update = 0.0;
  int misses = 0;

  Vec3 position() const { return pv.head<3>(); }
  Vec3 velocity() const { return pv.tail<3>(); }
  Mat3 position_cov() const { return pv_cov.topLeftCorner<3, 3>(); }
  Mat3 velocity_cov() const { return pv_cov.bottomRightCorner<3, 3>(); }
  GaussianState PositionState() const { return {position(), position_cov()}; }
  GaussianState VelocityState() const { return {velocity(), velocity_cov()}; }
  GaussianState SizeState() const { return {size, size_cov}; }
};

struct TrackerParams {
  double accel_std = 2.0;          // white-acceleration process noise (m/s^2)
  double size_process_var = 1e-4;  // per second (m^2/s)
  double spawn_vel_var = 1.0;      // (m/s)^2
  double pd_threshold = 1e-4;
  int max_misses = 30;
  Mat3 vel_cov_cap = 0.5 * Mat3::Identity();
};

struct Assignment {
  std::vector<std::pair<int, int>> matches;  // (track index, measurement index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_measurements;
};

struct PredictionStep {
  Vec3 position = Vec3::Zero();
  Mat3 position_cov = Mat3::Zero();
  Ellipsoid ellipsoid;
};

struct ObstaclePrediction {
  int track_id = 0;
  std::vector<PredictionStep> steps;  // k = 1..N
};

// Predicted 6-D (position, size) state of a track after dt, and its
// covariance diag(Sigma_p + Sigma_v dt^2, Sigma_s).
GaussianState PredictedObservation(const Track& track, double dt);

// Greedy best-first association on the Gaussian density of each measurement
// under each track's prediction, with the measurement covariance added to the
// predicted one. Pairs with pd <= pd_threshold are never
// matched. Ties break by lower track id, then lower measurement index.
Assignment Associate(std::span<const Track> tracks,
                     std::span<const ObstacleMeasurement> meas, double dt,
                     double pd_threshold);

// Generic linear Kalman measurement update (Joseph form).
void KalmanUpdate(Eigen::VectorXd& mean, Eigen::MatrixXd& cov,
                  const Eigen::MatrixXd& h, const Eigen::VectorXd& z,
                  const Eigen::MatrixXd& r);

// Constant-velocity time update by dt.
Track KfPredict(const Track& track, double dt, const TrackerParams& params);

// Time update followed by a position and size measurement update. Throws
// Error when a measurement covariance is not PSD.
Track KfUpdate(const Track& track, const ObstacleMeasurement& meas, double dt,
               const TrackerParams& params);

// Propagates the track n_steps forward with a constant-velocity model. The
// velocity covariance is scaled so that its diagonal does not exceed
// vel_cov_cap. Ellipsoids face `viewer`.
ObstaclePrediction PredictTrack(const Track& track, double dt, int n_steps,
                                const Mat3& vel_cov_cap,
                                const Vec3& viewer = Vec3::Zero());

// Bounding ellipsoid through the corners of the track's box: semi-axes are
// sqrt(3)/2 times (l, w, h), with the l-axis along `bearing_to_mav`.
Ellipsoid TrackToEllipsoid(const Track& track, double bearing_to_mav);

// Spawns tracks for unmatched measurements, bumps miss counters of unmatched
// tracks and drops tracks with more than max_misses misses. Matched tracks
// get misses = 0.
std::vector<Track> Lifecycle(std::vector<Track> tracks, const Assignment& a,
                             std::span<const ObstacleMeasurement> meas,
                             int& next_id, const TrackerParams& params);

// Stateful multi-obstacle tracker; one instance per sensor stream.
class Tracker {
 public:
  explicit Tracker(TrackerParams params = {}) : params_(std::move(params)) {}

  // Processes one frame of detections taken at time t. Frame times must
  // strictly increase.
  void Process(std::span<const ObstacleMeasurement> meas, double t);

  // Tracks extrapolated to time t (no state change).
  std::vector<Track> TracksAt(double t) const;

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerParams& params() const { return params_; }
  double time() const { return time_; }

 private:
  TrackerParams params_;
  std::vector<Track> tracks_;
  int next_id_ = 0;
  double time_ = 0.0;
  bool initialized_ = false;
};

}  // namespace ccmpc

#endif  // CCMPC_OBSTACLE_TRACKING_H_
