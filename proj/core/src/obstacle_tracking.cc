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

#include "ccmpc/obstacle_tracking.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ccmpc/depth_camera.h"

namespace ccmpc {
namespace {

Mat6 TransitionMatrix(double dt) {
  Mat6 f = Mat6::Identity();
  f.topRightCorner<3, 3>() = dt * Mat3::Identity();
  return f;
}

Mat6 WhiteAccelerationNoise(double dt, double accel_std) {
  const double q = accel_std * accel_std;
  Mat6 n = Mat6::Zero();
  const Mat3 i = Mat3::Identity();
  n.topLeftCorner<3, 3>() = q * std::pow(dt, 4) / 4.0 * i;
  n.topRightCorner<3, 3>() = q * std::pow(dt, 3) / 2.0 * i;
  n.bottomLeftCorner<3, 3>() = q * std::pow(dt, 3) / 2.0 * i;
  n.bottomRightCorner<3, 3>() = q * dt * dt * i;
  return n;
}

Mat3 CapCovariance(const Mat3& cov, const Mat3& cap) {
  Vec3 scale;
  for (int i = 0; i < 3; ++i) {
    scale[i] = (cov(i, i) > cap(i, i) && cov(i, i) > 0.0)
                   ? std::sqrt(cap(i, i) / cov(i, i))
                   : 1.0;
  }
  return scale.asDiagonal() * cov * scale.asDiagonal();
}

}  // namespace

GaussianState PredictedObservation(const Track& track, double dt) {
  Eigen::VectorXd mean(6);
  mean << track.position() + track.velocity() * dt, track.size;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(6, 6);
  cov.topLeftCorner<3, 3>() = track.position_cov() + track.velocity_cov() * dt * dt;
  cov.bottomRightCorner<3, 3>() = track.size_cov;
  return {mean, Symmetrized(cov)};
}

Assignment Associate(std::span<const Track> tracks,
                     std::span<const ObstacleMeasurement> meas, double dt,
                     double pd_threshold) {
  struct Candidate {
    double pd;
    int track_id;
    int ti;
    int mi;
  };
  std::vector<Candidate> candidates;
  for (int ti = 0; ti < static_cast<int>(tracks.size()); ++ti) {
    const GaussianState pred = PredictedObservation(tracks[ti], dt);
    for (int mi = 0; mi < static_cast<int>(meas.size()); ++mi) {
      Eigen::VectorXd x(6);
      x << meas[mi].position_world, meas[mi].size_world;
      Eigen::MatrixXd s = pred.covariance;
      s.topLeftCorner<3, 3>() += meas[mi].pos_cov;
      s.bottomRightCorner<3, 3>() += meas[mi].size_cov;
      double pd = 0.0;
      try {
        pd = GaussianPdf(x, pred.mean, s);
      } catch (const Error&) {
        continue;
      }
      if (pd > pd_threshold) candidates.push_back({pd, tracks[ti].id, ti, mi});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return std::tie(b.pd, a.track_id, a.mi) < std::tie(a.pd, b.track_id, b.mi);
            });

  Assignment out;
  std::vector<char> track_used(tracks.size(), 0), meas_used(meas.size(), 0);
  for (const auto& c : candidates) {
    if (track_used[c.ti] || meas_used[c.mi]) continue;
    track_used[c.ti] = meas_used[c.mi] = 1;
    out.matches.emplace_back(c.ti, c.mi);
  }
  std::sort(out.matches.begin(), out.matches.end());
  for (int i = 0; i < static_cast<int>(tracks.size()); ++i) {
    if (!track_used[i]) out.unmatched_tracks.push_back(i);
  }
  for (int i = 0; i < static_cast<int>(meas.size()); ++i) {
    if (!meas_used[i]) out.unmatched_measurements.push_back(i);
  }
  return out;
}

void KalmanUpdate(Eigen::VectorXd& mean, Eigen::MatrixXd& cov,
                  const Eigen::MatrixXd& h, const Eigen::VectorXd& z,
                  const Eigen::MatrixXd& r) {
  if (!IsPsd(r)) throw Error("kalman update: measurement covariance is not PSD");
  const Eigen::MatrixXd s = h * cov * h.transpose() + r;
  const Eigen::MatrixXd k = s.ldlt().solve(h * cov).transpose();
  mean += k * (z - h * mean);
  const Eigen::MatrixXd ikh =
      Eigen::MatrixXd::Identity(cov.rows(), cov.cols()) - k * h;
  cov = Symmetrized(ikh * cov * ikh.transpose() + k * r * k.transpose());
}

Track KfPredict(const Track& track, double dt, const TrackerParams& params) {
  Track out = track;
  const Mat6 f = TransitionMatrix(dt);
  out.pv = f * track.pv;
  out.pv_cov = Symmetrized(f * track.pv_cov * f.transpose() +
                           WhiteAccelerationNoise(dt, params.accel_std));
  out.size_cov = track.size_cov + params.size_process_var * dt * Mat3::Identity();
  return out;
}

Track KfUpdate(const Track& track, const ObstacleMeasurement& meas, double dt,
               const TrackerParams& params) {
  if (!(dt > 0.0)) throw Error("kf update: dt must be > 0");
  if (!IsPsd(meas.pos_cov) || !IsPsd(meas.size_cov)) {
    throw Error("kf update: measurement covariance is not PSD");
  }
  Track out = KfPredict(track, dt, params);

  Eigen::VectorXd pv = out.pv;
  Eigen::MatrixXd pv_cov = out.pv_cov;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 6);
  h.leftCols<3>().setIdentity();
  KalmanUpdate(pv, pv_cov, h, meas.position_world, meas.pos_cov);
  out.pv = pv;
  out.pv_cov = pv_cov;

  Eigen::VectorXd s = out.size;
  Eigen::MatrixXd s_cov = out.size_cov;
  KalmanUpdate(s, s_cov, Eigen::MatrixXd::Identity(3, 3), meas.size_world, meas.size_cov);
  out.size = s.cwiseMax(1e-3);
  out.size_cov = s_cov;

  out.last_update = meas.timestamp;
  out.misses = 0;
  return out;
}

ObstaclePrediction PredictTrack(const Track& track, double dt, int n_steps,
                                const Mat3& vel_cov_cap, const Vec3& viewer) {
  if (n_steps < 1) throw Error("predict track: n_steps must be >= 1");
  ObstaclePrediction pred;
  pred.track_id = track.id;
  pred.steps.reserve(n_steps);
  const Vec3 v = track.velocity();
  const Mat3 growth = CapCovariance(track.velocity_cov(), vel_cov_cap) * dt * dt;
  Vec3 p = track.position();
  Mat3 cov = track.position_cov();
  for (int k = 0; k < n_steps; ++k) {
    p += v * dt;
    cov += growth;
    PredictionStep step;
    step.position = p;
    step.position_cov = Symmetrized(cov);
    Track at_step = track;
    at_step.pv.head<3>() = p;
    step.ellipsoid = TrackToEllipsoid(at_step, FacingYaw(p, viewer));
    pred.steps.push_back(step);
  }
  return pred;
}

Ellipsoid TrackToEllipsoid(const Track& track, double bearing_to_mav) {
  if ((track.size.array() <= 0.0).any()) throw Error("ellipsoid: size must be positive");
  Ellipsoid e;
  e.center = track.position();
  e.semi_axes = std::sqrt(3.0) / 2.0 * track.size;
  e.yaw = bearing_to_mav;
  return e;
}

std::vector<Track> Lifecycle(std::vector<Track> tracks, const Assignment& a,
                             std::span<const ObstacleMeasurement> meas,
                             int& next_id, const TrackerParams& params) {
  for (const auto& [ti, mi] : a.matches) tracks[ti].misses = 0;
  for (int ti : a.unmatched_tracks) ++tracks[ti].misses;
  std::erase_if(tracks, [&](const Track& t) { return t.misses > params.max_misses; });
  for (int mi : a.unmatched_measurements) {
    const auto& m = meas[mi];
    Track t;
    t.id = next_id++;
    t.pv.head<3>() = m.position_world;
    t.pv.tail<3>().setZero();
    t.pv_cov.setZero();
    t.pv_cov.topLeftCorner<3, 3>() = m.pos_cov;
    t.pv_cov.bottomRightCorner<3, 3>() = params.spawn_vel_var * Mat3::Identity();
    t.size = m.size_world;
    t.size_cov = m.size_cov;
    t.last_update = m.timestamp;
    t.misses = 0;
    tracks.push_back(t);
  }
  return tracks;
}

void Tracker::Process(std::span<const ObstacleMeasurement> meas, double t) {
  if (initialized_ && !(t > time_)) throw Error("tracker: frame times must increase");
  const double dt = initialized_ ? t - time_ : 0.0;
  Assignment a;
  if (dt > 0.0) {
    a = Associate(tracks_, meas, dt, params_.pd_threshold);
    std::vector<char> matched(tracks_.size(), 0);
    for (const auto& [ti, mi] : a.matches) {
      tracks_[ti] = KfUpdate(tracks_[ti], meas[mi], dt, params_);
      matched[ti] = 1;
    }
    for (size_t i = 0; i < tracks_.size(); ++i) {
      if (!matched[i]) tracks_[i] = KfPredict(tracks_[i], dt, params_);
    }
  } else {
    for (int i = 0; i < static_cast<int>(tracks_.size()); ++i) a.unmatched_tracks.push_back(i);
    for (int i = 0; i < static_cast<int>(meas.size()); ++i) a.unmatched_measurements.push_back(i);
  }
  tracks_ = Lifecycle(std::move(tracks_), a, meas, next_id_, params_);
  time_ = t;
  initialized_ = true;
}

std::vector<Track> Tracker::TracksAt(double t) const {
  std::vector<Track> out = tracks_;
  const double dt = t - time_;
  if (dt > 0.0) {
    for (auto& tr : out) tr = KfPredict(tr, dt, params_);
  }
  return out;
}

}  // namespace ccmpc
