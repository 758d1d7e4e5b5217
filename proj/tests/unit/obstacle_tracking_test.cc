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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ccmpc/obstacle_tracking.h"

namespace ccmpc {
namespace {

ObstacleMeasurement Meas(const Vec3& p, const Vec3& s, double var = 0.01, double t = 0.0) {
  ObstacleMeasurement m;
  m.position_world = p;
  m.size_world = s;
  m.pos_cov = var * Mat3::Identity();
  m.size_cov = var * Mat3::Identity();
  m.timestamp = t;
  return m;
}

Track MakeTrack(int id, const Vec3& p, const Vec3& v, double var = 1.0) {
  Track t;
  t.id = id;
  t.pv << p, v;
  t.pv_cov = var * Mat6::Identity();
  t.size = Vec3(0.5, 0.5, 1.8);
  t.size_cov = var * Mat3::Identity();
  return t;
}

TEST(PredictedObservation, ConstantVelocityMeanAndCovariance) {
  Track t = MakeTrack(0, Vec3(1, 2, 3), Vec3(1, 0, -1), 0.5);
  const GaussianState g = PredictedObservation(t, 0.1);
  EXPECT_TRUE(g.mean.head<3>().isApprox(Vec3(1.1, 2, 2.9)));
  EXPECT_NEAR(g.covariance(0, 0), 0.5 + 0.5 * 0.01, 1e-12);
  EXPECT_NEAR(g.covariance(4, 4), 0.5, 1e-12);
  EXPECT_EQ(g.covariance(0, 4), 0.0);
}

TEST(Associate, ExactMatchDensity) {
  Track t = MakeTrack(0, Vec3(1, 0, 0), Vec3::Zero(), 1.0);
  t.pv_cov.bottomRightCorner<3, 3>().setZero();
  const std::vector<Track> tracks{t};
  const std::vector<ObstacleMeasurement> meas{Meas(Vec3(1, 0, 0), t.size, 0.0)};
  const double pd = std::pow(2 * std::numbers::pi, -3.0);
  EXPECT_NEAR(pd, 0.00403, 1e-5);
  EXPECT_EQ(Associate(tracks, meas, 0.1, 0.99 * pd).matches.size(), 1u);
  EXPECT_TRUE(Associate(tracks, meas, 0.1, 1.01 * pd).matches.empty());
}

TEST(Associate, NoTracks) {
  const std::vector<ObstacleMeasurement> meas{Meas(Vec3(1, 0, 0), Vec3::Ones()),
                                              Meas(Vec3(3, 0, 0), Vec3::Ones())};
  const Assignment a = Associate({}, meas, 0.1, 1e-4);
  EXPECT_TRUE(a.matches.empty());
  EXPECT_EQ(a.unmatched_measurements, (std::vector<int>{0, 1}));
}

TEST(Associate, MatchesFollowDensityNotIndex) {
  const std::vector<Track> tracks{MakeTrack(0, Vec3(0, 0, 0), Vec3::Zero(), 0.005),
                                  MakeTrack(1, Vec3(1, 0, 0), Vec3::Zero(), 0.005)};
  // sigma = 0.1 combined, each measurement sits at the other track 10 sigma away.
  const std::vector<ObstacleMeasurement> meas{Meas(Vec3(1, 0, 0), tracks[0].size, 0.005),
                                              Meas(Vec3(0, 0, 0), tracks[0].size, 0.005)};
  auto tracks_static = tracks;
  for (auto& t : tracks_static) t.pv_cov.bottomRightCorner<3, 3>().setZero();
  const Assignment a = Associate(tracks_static, meas, 0.1, 1e-4);
  // Each measurement lies on the other track, which is a perfect match.
  EXPECT_EQ(a.matches, (std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}));

  const std::vector<ObstacleMeasurement> far{Meas(Vec3(0, 1, 0), tracks[0].size, 0.005)};
  const std::vector<Track> one{tracks_static[0]};
  EXPECT_TRUE(Associate(one, far, 0.1, 1e-4).matches.empty());
}

TEST(Associate, RelabelingMeasurementsPermutesMatches) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<Track> tracks;
  for (int i = 0; i < 3; ++i) tracks.push_back(MakeTrack(i, Vec3(2.0 * i, 0, 0), Vec3::Zero(), 0.05));
  std::vector<ObstacleMeasurement> meas;
  for (int i = 0; i < 3; ++i) {
    meas.push_back(Meas(Vec3(2.0 * i + n(rng), n(rng), 0), tracks[0].size, 0.01));
  }
  const Assignment a = Associate(tracks, meas, 0.05, 1e-4);
  std::vector<int> perm{2, 0, 1};
  std::vector<ObstacleMeasurement> shuffled;
  for (int i : perm) shuffled.push_back(meas[i]);
  const Assignment b = Associate(tracks, shuffled, 0.05, 1e-4);
  ASSERT_EQ(a.matches.size(), 3u);
  ASSERT_EQ(b.matches.size(), 3u);
  for (size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(a.matches[k].first, b.matches[k].first);
    EXPECT_EQ(a.matches[k].second, perm[b.matches[k].second]);
  }
}

TEST(Associate, TieBreaksOnLowerTrackId) {
  // Two identical tracks compete for one measurement.
  const std::vector<Track> tracks{MakeTrack(7, Vec3::Zero(), Vec3::Zero()),
                                  MakeTrack(3, Vec3::Zero(), Vec3::Zero())};
  const std::vector<ObstacleMeasurement> meas{Meas(Vec3::Zero(), tracks[0].size)};
  const Assignment a = Associate(tracks, meas, 0.1, 1e-6);
  ASSERT_EQ(a.matches.size(), 1u);
  EXPECT_EQ(tracks[a.matches[0].first].id, 3);
}

TEST(KalmanUpdate, ScalarAlgebra) {
  Eigen::VectorXd x(1), z(1);
  Eigen::MatrixXd p(1, 1), h(1, 1), r(1, 1);
  x << 0.0;
  p << 1.0;
  h << 1.0;
  z << 1.0;
  r << 1.0;
  KalmanUpdate(x, p, h, z, r);
  EXPECT_NEAR(x[0], 0.5, 1e-12);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-12);
}

TEST(KfUpdate, UninformativeMeasurementKeepsPrior) {
  TrackerParams params;
  const Track t = MakeTrack(0, Vec3(1, 2, 0), Vec3(0.5, 0, 0), 0.1);
  const Track prior = KfPredict(t, 0.05, params);
  const Track post = KfUpdate(t, Meas(Vec3(9, 9, 9), Vec3(3, 3, 3), 1e9), 0.05, params);
  EXPECT_LT((post.pv - prior.pv).norm(), 1e-6);
  EXPECT_LT((post.size - prior.size).norm(), 1e-6);
}

TEST(KfUpdate, UninformativePriorTakesMeasurement) {
  TrackerParams params;
  const Track t = MakeTrack(0, Vec3::Zero(), Vec3::Zero(), 1e9);
  const Track post = KfUpdate(t, Meas(Vec3(1, 2, 3), Vec3(0.4, 0.6, 1.7), 1.0), 0.05, params);
  EXPECT_LT((post.position() - Vec3(1, 2, 3)).norm(), 1e-6);
  EXPECT_LT((post.size - Vec3(0.4, 0.6, 1.7)).norm(), 1e-6);
  EXPECT_EQ(post.misses, 0);
}

TEST(KfUpdate, RejectsNonPsdMeasurement) {
  ObstacleMeasurement m = Meas(Vec3::Zero(), Vec3::Ones());
  m.pos_cov(1, 1) = -1.0;
  EXPECT_THROW(KfUpdate(MakeTrack(0, Vec3::Zero(), Vec3::Zero()), m, 0.05, {}), Error);
}

TEST(KfUpdate, PosteriorCovariancePsd) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.1);
  TrackerParams params;
  Track t = MakeTrack(0, Vec3::Zero(), Vec3::Zero());
  for (int k = 1; k <= 200; ++k) {
    t = KfUpdate(t, Meas(Vec3(0.02 * k + n(rng), n(rng), n(rng)), Vec3::Ones(), 0.01), 1.0 / 60, params);
    ASSERT_TRUE(IsPsd(t.pv_cov));
    ASSERT_TRUE(IsPsd(t.size_cov));
  }
}

TEST(KfUpdate, VelocityConvergesWithinOneSecond) {
  TrackerParams params;
  const Vec3 v(1.2, -0.5, 0.0);
  const Vec3 p0(3, 1, 0.9);
  Track t = MakeTrack(0, p0, Vec3::Zero());
  t.pv_cov.setZero();
  t.pv_cov.topLeftCorner<3, 3>() = 0.01 * Mat3::Identity();
  t.pv_cov.bottomRightCorner<3, 3>() = params.spawn_vel_var * Mat3::Identity();
  const double dt = 1.0 / 60;
  for (int k = 1; k <= 60; ++k) {
    t = KfUpdate(t, Meas(p0 + v * k * dt, t.size, 0.01), dt, params);
  }
  EXPECT_LT((t.velocity() - v).norm(), 0.05 * v.norm());
}

TEST(PredictTrack, OneEulerStep) {
  const Track t = MakeTrack(0, Vec3::Zero(), Vec3(1, 0, 0));
  const ObstaclePrediction p = PredictTrack(t, 0.06, 1, Mat3::Identity());
  ASSERT_EQ(p.steps.size(), 1u);
  EXPECT_TRUE(p.steps[0].position.isApprox(Vec3(0.06, 0, 0)));
}

TEST(PredictTrack, CovarianceGrowth) {
  const Track t = MakeTrack(0, Vec3::Zero(), Vec3::Zero(), 1.0);
  const ObstaclePrediction p = PredictTrack(t, 0.1, 10, Mat3::Identity());
  EXPECT_LT((p.steps[9].position_cov - 1.1 * Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PredictTrack, VelocityCovarianceCapped) {
  const Track t = MakeTrack(0, Vec3::Zero(), Vec3::Zero(), 1.0);
  const ObstaclePrediction p = PredictTrack(t, 0.1, 10, 0.5 * Mat3::Identity());
  EXPECT_LT((p.steps[9].position_cov - 1.05 * Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PredictTrack, StaticObstacleStaysPut) {
  const Track t = MakeTrack(0, Vec3(2, 1, 0), Vec3::Zero());
  for (const auto& s : PredictTrack(t, 0.06, 25, Mat3::Identity()).steps) {
    EXPECT_EQ(s.position, Vec3(2, 1, 0));
  }
}

TEST(PredictTrack, TraceNonDecreasing) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Track t = MakeTrack(trial, Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), 0));
    Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::NullaryExpr([&] { return u(rng); });
    t.pv_cov = a * a.transpose();
    const auto p = PredictTrack(t, 0.06, 25, 0.5 * Mat3::Identity());
    double prev = t.position_cov().trace();
    for (const auto& s : p.steps) {
      EXPECT_GE(s.position_cov.trace(), prev - 1e-12);
      prev = s.position_cov.trace();
    }
  }
}

TEST(TrackToEllipsoid, ScaleFactor) {
  Track t = MakeTrack(0, Vec3::Zero(), Vec3::Zero());
  t.size = Vec3(2, 2, 2);
  EXPECT_TRUE(TrackToEllipsoid(t, 0.0).semi_axes.isApprox(Vec3::Constant(std::sqrt(3.0))));
  t.size = Vec3(1, 0.8, 1.8);
  const Vec3 a = TrackToEllipsoid(t, 0.0).semi_axes;
  EXPECT_NEAR(a.x(), 0.8660, 5e-5);
  EXPECT_NEAR(a.y(), 0.6928, 5e-5);
  EXPECT_NEAR(a.z(), 1.5588, 5e-5);
}

TEST(TrackToEllipsoid, BoxCornersOnSurface) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> s(0.1, 3.0), yaw(-3.1, 3.1), p(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    Track t = MakeTrack(0, Vec3(p(rng), p(rng), p(rng)), Vec3::Zero());
    t.size = Vec3(s(rng), s(rng), s(rng));
    const double bearing = yaw(rng);
    const Ellipsoid e = TrackToEllipsoid(t, bearing);
    EXPECT_EQ(e.yaw, bearing);
    const Mat3 r = RotationZ(bearing);
    for (int c = 0; c < 8; ++c) {
      const Vec3 sign((c & 1) ? 1 : -1, (c & 2) ? 1 : -1, (c & 4) ? 1 : -1);
      const Vec3 corner = t.position() + r * (0.5 * sign.cwiseProduct(t.size));
      const Vec3 local = r.transpose() * (corner - e.center);
      EXPECT_NEAR(local.cwiseQuotient(e.semi_axes).squaredNorm(), 1.0, 1e-9);
    }
  }
}

TEST(Lifecycle, SpawnsZeroVelocityTrack) {
  TrackerParams params;
  int next_id = 5;
  const std::vector<ObstacleMeasurement> meas{Meas(Vec3(1, 2, 3), Vec3::Ones())};
  Assignment a;
  a.unmatched_measurements = {0};
  const auto tracks = Lifecycle({}, a, meas, next_id, params);
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_EQ(tracks[0].id, 5);
  EXPECT_EQ(next_id, 6);
  EXPECT_EQ(tracks[0].velocity(), Vec3::Zero());
  EXPECT_TRUE(tracks[0].velocity_cov().isApprox(params.spawn_vel_var * Mat3::Identity()));
}

TEST(Lifecycle, DropsAfterMaxMisses) {
  TrackerParams params;
  params.max_misses = 3;
  int next_id = 1;
  std::vector<Track> tracks{MakeTrack(0, Vec3::Zero(), Vec3::Zero())};
  Assignment miss;
  miss.unmatched_tracks = {0};
  for (int i = 0; i < 3; ++i) {
    tracks = Lifecycle(tracks, miss, {}, next_id, params);
    ASSERT_EQ(tracks.size(), 1u);
  }
  EXPECT_EQ(tracks[0].misses, 3);
  EXPECT_TRUE(Lifecycle(tracks, miss, {}, next_id, params).empty());
}

TEST(Lifecycle, MatchResetsMisses) {
  int next_id = 1;
  Track t = MakeTrack(0, Vec3::Zero(), Vec3::Zero());
  t.misses = 7;
  Assignment a;
  a.matches = {{0, 0}};
  const std::vector<ObstacleMeasurement> meas{Meas(Vec3::Zero(), Vec3::Ones())};
  EXPECT_EQ(Lifecycle({t}, a, meas, next_id, {})[0].misses, 0);
}

TEST(Tracker, FollowsMovingObstacleWithOneTrack) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 0.05);
  Tracker tracker;
  const Vec3 v(0.0, 1.2, 0.0);
  for (int k = 0; k < 120; ++k) {
    const double t = k / 60.0;
    const Vec3 p = Vec3(4, -2, 0.9) + v * t + Vec3(n(rng), n(rng), n(rng));
    const std::vector<ObstacleMeasurement> meas{Meas(p, Vec3(0.5, 0.5, 1.8), 0.0025, t)};
    tracker.Process(meas, t);
  }
  ASSERT_EQ(tracker.tracks().size(), 1u);
  EXPECT_LT((tracker.tracks()[0].velocity() - v).norm(), 0.25);
  EXPECT_THROW(tracker.Process({}, 1.0), Error);
}

}  // namespace
}  // namespace ccmpc
