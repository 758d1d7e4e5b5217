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

#include "ccmpc/simulation.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "ccmpc/mav_dynamics.h"
#include "ccmpc/obstacle_detection.h"

namespace ccmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// A track counts as the estimate of a scripted obstacle when it is the
// closest one within this distance and was updated in the current frame.
constexpr double kMatchGate = 1.0;

uint64_t Mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent seed per (run seed, stream, counter).
uint64_t StreamSeed(uint64_t seed, uint64_t stream, uint64_t counter) {
  return Mix(Mix(Mix(seed) ^ stream) ^ counter);
}

double RobustLength(double a, double b) { return std::hypot(a, b); }
double RobustLength(double a, double b, double c) { return std::hypot(a, b, c); }

double Root2(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : RobustLength(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double a = n0 / (s + r0), b = z1 / (s + 1.0);
    const double gs = a * a + b * b - 1.0;
    if (gs > 0.0) s0 = s;
    else if (gs < 0.0) s1 = s;
    else break;
  }
  return s;
}

double Root3(double r0, double r1, double z0, double z1, double z2, double g) {
  const double n0 = r0 * z0, n1 = r1 * z1;
  double s0 = z2 - 1.0;
  double s1 = g < 0.0 ? 0.0 : RobustLength(n0, n1, z2) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 1100; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double a = n0 / (s + r0), b = n1 / (s + r1), c = z2 / (s + 1.0);
    const double gs = a * a + b * b + c * c - 1.0;
    if (gs > 0.0) s0 = s;
    else if (gs < 0.0) s1 = s;
    else break;
  }
  return s;
}

// Unsigned distance from (y0, y1) >= 0 to the ellipse with e0 >= e1 > 0.
double EllipseDistance(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double s = Root2(r0, z0, z1, g);
      const double x0 = r0 * y0 / (s + r0), x1 = y1 / (s + 1.0);
      return RobustLength(x0 - y0, x1 - y1);
    }
    return std::fabs(y1 - e1);
  }
  const double numer0 = e0 * y0, denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0, x1 = e1 * std::sqrt(1.0 - xde0 * xde0);
    return RobustLength(x0 - y0, x1);
  }
  return std::fabs(y0 - e0);
}

// Unsigned distance from y >= 0 to the ellipsoid with e0 >= e1 >= e2 > 0.
double EllipsoidDistance(const std::array<double, 3>& e, const std::array<double, 3>& y) {
  const auto [e0, e1, e2] = e;
  const auto [y0, y1, y2] = y;
  if (y2 > 0.0) {
    if (y1 > 0.0) {
      if (y0 > 0.0) {
        const double z0 = y0 / e0, z1 = y1 / e1, z2 = y2 / e2;
        const double g = z0 * z0 + z1 * z1 + z2 * z2 - 1.0;
        if (g == 0.0) return 0.0;
        const double r0 = (e0 / e2) * (e0 / e2), r1 = (e1 / e2) * (e1 / e2);
        const double s = Root3(r0, r1, z0, z1, z2, g);
        const double x0 = r0 * y0 / (s + r0), x1 = r1 * y1 / (s + r1), x2 = y2 / (s + 1.0);
        return RobustLength(x0 - y0, x1 - y1, x2 - y2);
      }
      return EllipseDistance(e1, e2, y1, y2);
    }
    if (y0 > 0.0) return EllipseDistance(e0, e2, y0, y2);
    return std::fabs(y2 - e2);
  }
  const double denom0 = e0 * e0 - e2 * e2, denom1 = e1 * e1 - e2 * e2;
  const double numer0 = e0 * y0, numer1 = e1 * y1;
  if (numer0 < denom0 && numer1 < denom1) {
    const double xde0 = numer0 / denom0, xde1 = numer1 / denom1;
    const double discr = 1.0 - xde0 * xde0 - xde1 * xde1;
    if (discr > 0.0) {
      const double x0 = e0 * xde0, x1 = e1 * xde1, x2 = e2 * std::sqrt(discr);
      return RobustLength(x0 - y0, x1 - y1, x2);
    }
  }
  return EllipseDistance(e0, e1, y0, y1);
}

struct ErrorAccumulator {
  int frames = 0;
  double position = 0.0;
  double velocity = 0.0;
};

}  // namespace

double Separation(const Vec3& p, const Ellipsoid& e) {
  if ((e.semi_axes.array() <= 0.0).any()) throw Error("separation: semi-axes must be positive");
  const Vec3 q = RotationZ(e.yaw).transpose() * (p - e.center);
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return e.semi_axes[a] > e.semi_axes[b]; });
  std::array<double, 3> axes, y;
  for (int i = 0; i < 3; ++i) {
    axes[i] = e.semi_axes[order[i]];
    y[i] = std::fabs(q[order[i]]);
  }
  const double d = EllipsoidDistance(axes, y);
  const double level = q.cwiseQuotient(e.semi_axes).squaredNorm();
  return level < 1.0 ? -d : d;
}

RunMetrics RunScenario(const Scenario& s) {
  s.Validate();
  using Clock = std::chrono::steady_clock;
  const int tpf = s.TicksPerFrame();
  const int tpc = s.TicksPerControl();
  const double h = 1.0 / s.tick_rate;
  const int64_t total_ticks =
      static_cast<int64_t>(std::ceil(s.duration * s.tick_rate - 1e-9));
  NoiseConfig tick_noise = s.noise;
  tick_noise.process = s.noise.process * (h / s.planner.dt);

  const size_t n_obs = s.obstacles.size();
  RunMetrics m;
  m.scenario = s.name;
  m.seed = s.seed;
  m.min_separation.assign(n_obs, kInf);
  m.overall_min_separation = kInf;

  Tracker tracker(s.tracker);
  Planner planner(s.planner);
  MavState x = s.start;
  ControlInput u;
  std::vector<ErrorAccumulator> errors(n_obs);
  int last_detections = 0;
  int64_t frame = 0, control = 0;

  std::vector<BoxObstacle> boxes(n_obs);
  for (int64_t i = 0; i < total_ticks; ++i) {
    const double t = static_cast<double>(i) * h;

    if (i % tpf == 0) {
      for (size_t j = 0; j < n_obs; ++j) boxes[j] = s.obstacles[j].BoxAt(t);
      const auto start = Clock::now();
      DepthImage img = RenderDepth(x.ToPose(), s.camera, boxes, s.walls, t);
      if (s.sensor_noise.sigma_at_1m > 0.0 || s.sensor_noise.dropout_prob > 0.0) {
        img = ApplyNoise(img, s.sensor_noise, StreamSeed(s.seed, 3, frame));
      }
      const GaussianState est = EstimateState(x, s.noise, StreamSeed(s.seed, 2, frame));
      const auto meas = DetectObstacles(img, est, s.detection);
      tracker.Process(meas, t);
      m.detect_times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
      last_detections = static_cast<int>(meas.size());

      for (size_t j = 0; j < n_obs; ++j) {
        const Vec3 p_true = s.obstacles[j].PositionAt(t);
        const Track* best = nullptr;
        double best_d = kMatchGate;
        for (const auto& tr : tracker.tracks()) {
          const double d = (tr.position() - p_true).norm();
          if (tr.misses == 0 && d < best_d) {
            best_d = d;
            best = &tr;
          }
        }
        if (best) {
          errors[j].frames += 1;
          errors[j].position += best_d;
          errors[j].velocity += (best->velocity() - s.obstacles[j].VelocityAt(t)).norm();
        }
      }
      ++frame;
    }

    if (i % tpc == 0) {
      const GaussianState est = EstimateState(x, s.noise, StreamSeed(s.seed, 4, control));
      const MavState x_hat = MavState::FromVector(est.mean);
      StepRecord rec;
      rec.time = t;
      rec.truth = x;
      rec.estimate = x_hat;
      rec.tracks = tracker.TracksAt(t);
      rec.num_detections = last_detections;
      if (s.planner_enabled) {
        std::vector<ObstaclePrediction> preds;
        std::vector<Vec3> centers;
        for (const auto& tr : rec.tracks) {
          preds.push_back(PredictTrack(tr, s.planner.dt, s.planner.horizon,
                                       s.tracker.vel_cov_cap, x_hat.p));
          centers.push_back(tr.position());
        }
        preds = SelectClosest(std::move(preds), centers, x_hat.p, s.planner.max_obstacles);
        const auto start = Clock::now();
        const PlanResult plan =
            planner.Plan(est, s.goal, std::move(preds), FovHalfspaces(x_hat.ToPose(), s.camera));
        m.solve_times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
        u = plan.controls.front();
        rec.status = plan.status;
        rec.cost = plan.cost;
        rec.max_violation = plan.max_constraint_violation;
        m.status_counts[ToString(plan.status)] += 1;
      }
      rec.control = u;
      for (size_t j = 0; j < n_obs; ++j) {
        const Ellipsoid truth = s.obstacles[j].EvalEllipsoidAt(t);
        const double sep = Separation(x.p, truth);
        rec.obstacle_positions.push_back(truth.center);
        rec.separation.push_back(sep);
        m.min_separation[j] = std::min(m.min_separation[j], sep);
        m.overall_min_separation = std::min(m.overall_min_separation, sep);
      }
      m.max_speed = std::max(m.max_speed, x.v.norm());
      const double goal_dist = (x.p - s.goal).norm();
      if (goal_dist <= s.goal_tolerance) m.reached_goal = true;
      m.steps.push_back(std::move(rec));
      ++control;
      if (s.stop_at_goal && m.reached_goal) break;
    }

    x = SimulateStep(x, u, h, tick_noise, StreamSeed(s.seed, 1, i), s.planner.dynamics);
  }

  m.collision = m.overall_min_separation < 0.0;
  m.final_goal_distance = m.steps.empty() ? (s.start.p - s.goal).norm()
                                          : (m.steps.back().truth.p - s.goal).norm();
  for (size_t j = 0; j < n_obs; ++j) {
    DetectionErrorRow row;
    row.name = s.obstacles[j].name;
    row.frames = errors[j].frames;
    if (row.frames > 0) {
      row.position_error = errors[j].position / row.frames;
      row.velocity_error = errors[j].velocity / row.frames;
    }
    m.detection_errors.push_back(row);
  }
  return m;
}

std::vector<DetectionErrorRow> DetectionBenchmark(const Scenario& scenario) {
  return RunScenario(scenario).detection_errors;
}

Percentiles ComputePercentiles(std::vector<double> v) {
  Percentiles p;
  if (v.empty()) return p;
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  p.p50 = at(0.5);
  p.p75 = at(0.75);
  p.p95 = at(0.95);
  p.max = v.back();
  return p;
}

CampaignReport McCampaign(const Scenario& scenario, int n_runs, uint64_t seed0, int jobs,
                          std::vector<RunMetrics>* runs) {
  if (n_runs < 1) throw Error("campaign: n_runs must be >= 1");
  scenario.Validate();
  std::vector<RunMetrics> results(n_runs);
  auto run_one = [&](int r) {
    Scenario sc = scenario;
    sc.seed = seed0 + static_cast<uint64_t>(r);
    results[r] = RunScenario(sc);
  };
  jobs = std::clamp(jobs, 1, n_runs);
  if (jobs == 1) {
    for (int r = 0; r < n_runs; ++r) run_one(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (int r = w; r < n_runs; r += jobs) run_one(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  CampaignReport rep;
  rep.scenario = scenario.name;
  rep.seed0 = seed0;
  std::vector<double> solve, detect;
  for (const auto& m : results) {
    rep.seeds.push_back(m.seed);
    rep.min_separation.push_back(m.overall_min_separation);
    rep.max_speed.push_back(m.max_speed);
    rep.reached_goal.push_back(m.reached_goal);
    if (m.collision) ++rep.collisions;
    for (const auto& [k, v] : m.status_counts) rep.status_counts[k] += v;
    solve.insert(solve.end(), m.solve_times.begin(), m.solve_times.end());
    detect.insert(detect.end(), m.detect_times.begin(), m.detect_times.end());
  }
  rep.solve_time = ComputePercentiles(std::move(solve));
  rep.detect_time = ComputePercentiles(std::move(detect));
  if (runs) *runs = std::move(results);
  return rep;
}

ChanceCheck CheckChanceConstraint(const Ellipsoid& obstacle, const Mat3& cov,
                                  const Mat3& obstacle_cov, const Vec3& direction,
                                  double delta, double mav_radius, int samples,
                                  uint64_t seed) {
  if (samples < 1) throw Error("chance check: samples must be >= 1");
  if (direction.norm() < 1e-12) throw Error("chance check: direction must be nonzero");
  const Vec3 n = direction.normalized();
  auto residual = [&](double s) {
    return ChanceConstraintResidual(obstacle.center + s * n, cov, obstacle, obstacle_cov,
                                    delta, mav_radius)
        .value;
  };
  // The residual is affine and increasing in s along a fixed direction.
  double lo = 1e-9, hi = 1.0;
  while (residual(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  ChanceCheck out;
  out.delta = delta;
  out.distance = hi;
  out.residual = residual(hi);
  out.samples = samples;

  const Vec3 p_mean = obstacle.center + hi * n;
  const Mat3 a = OmegaSqrt(obstacle, mav_radius);
  const GaussianSampler relative(cov + obstacle_cov);
  std::mt19937_64 rng(seed);
  int hits = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec3 d = p_mean - obstacle.center + Vec3(relative.Sample(rng));
    if ((a * d).squaredNorm() <= 1.0) ++hits;
  }
  out.empirical = static_cast<double>(hits) / samples;
  return out;
}

}  // namespace ccmpc
