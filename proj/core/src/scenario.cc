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

#include "ccmpc/scenario.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace ccmpc {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void CheckKeys(const YAML::Node& node, const std::string& section,
               std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw Error("scenario: section '" + section + "' must be a map");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw Error("scenario: unknown key '" + key + "' in " + section);
  }
}

template <typename T>
void Read(const YAML::Node& node, const char* key, T& out) {
  if (node[key]) out = node[key].as<T>();
}

Vec3 AsVec3(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence() || n.size() != 3) throw Error("scenario: " + what + " must be [x, y, z]");
  return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
}

void ReadVec3(const YAML::Node& node, const char* key, Vec3& out) {
  if (node[key]) out = AsVec3(node[key], key);
}

// Diagonal covariance from per-group standard deviations.
StateMat DiagonalFromStd(const YAML::Node& n, const std::string& section) {
  CheckKeys(n, section, {"position_std", "velocity_std", "attitude_std"});
  double sp = 0.0, sv = 0.0, sa = 0.0;
  Read(n, "position_std", sp);
  Read(n, "velocity_std", sv);
  Read(n, "attitude_std", sa);
  StateVec d;
  d << sp * sp, sp * sp, sp * sp, sv * sv, sv * sv, sv * sv, sa * sa, sa * sa, sa * sa;
  return d.asDiagonal();
}

void ParseCamera(const YAML::Node& n, Scenario& s) {
  CheckKeys(n, "camera", {"width", "height", "focal_length", "max_range"});
  int w = s.camera.width, h = s.camera.height;
  double f = s.camera.focal_length_px, range = s.camera.max_range;
  Read(n, "width", w);
  Read(n, "height", h);
  Read(n, "focal_length", f);
  Read(n, "max_range", range);
  s.camera = CameraIntrinsics::FromFocal(w, h, f, range);
}

void ParsePlanner(const YAML::Node& n, Scenario& s) {
  CheckKeys(n, "planner",
            {"enabled", "horizon", "dt", "delta", "mav_radius", "goal_weight",
             "control_weight", "collision_weight", "collision_steepness",
             "collision_margin", "horizontal_collision_radius", "yaw_weight", "max_speed",
             "min_altitude", "max_altitude", "max_obstacles", "use_fov",
             "penalty_weight", "sqp_iterations", "max_tilt_deg", "max_vz",
             "max_yaw_rate_deg", "yaw_speed_gate", "yaw_goal_distance",
             "fov_backoff"});
  PlannerParams& p = s.planner;
  Read(n, "enabled", s.planner_enabled);
  Read(n, "horizon", p.horizon);
  Read(n, "dt", p.dt);
  Read(n, "delta", p.delta);
  Read(n, "mav_radius", p.mav_radius);
  if (n["goal_weight"]) p.goal_weight = AsVec3(n["goal_weight"], "goal_weight").asDiagonal();
  if (n["control_weight"]) {
    const auto c = n["control_weight"];
    if (!c.IsSequence() || c.size() != 4) throw Error("scenario: control_weight needs 4 values");
    for (int i = 0; i < 4; ++i) p.control_weight[i] = c[i].as<double>();
  }
  Read(n, "collision_weight", p.collision_weight);
  Read(n, "collision_steepness", p.collision_steepness);
  Read(n, "collision_margin", p.collision_margin);
  Read(n, "horizontal_collision_radius", p.horizontal_collision_radius);
  Read(n, "yaw_weight", p.yaw_weight);
  Read(n, "max_speed", p.max_speed);
  Read(n, "min_altitude", p.min_altitude);
  Read(n, "max_altitude", p.max_altitude);
  Read(n, "max_obstacles", p.max_obstacles);
  Read(n, "use_fov", p.use_fov);
  Read(n, "penalty_weight", p.penalty_weight);
  Read(n, "sqp_iterations", p.sqp_iterations);
  Read(n, "yaw_goal_distance", p.yaw_goal_distance);
  Read(n, "yaw_speed_gate", p.yaw_speed_gate);
  Read(n, "fov_backoff", p.fov_backoff);
  if (n["max_tilt_deg"]) {
    const double t = n["max_tilt_deg"].as<double>() * kDeg;
    p.u_min[0] = p.u_min[1] = -t;
    p.u_max[0] = p.u_max[1] = t;
  }
  if (n["max_vz"]) {
    p.u_max[2] = n["max_vz"].as<double>();
    p.u_min[2] = -p.u_max[2];
  }
  if (n["max_yaw_rate_deg"]) {
    p.u_max[3] = n["max_yaw_rate_deg"].as<double>() * kDeg;
    p.u_min[3] = -p.u_max[3];
  }
}

ObstacleScript ParseObstacle(const YAML::Node& n, size_t index) {
  CheckKeys(n, "obstacles", {"name", "size", "eval_semi_axes", "waypoints", "position"});
  ObstacleScript o;
  o.name = "obstacle" + std::to_string(index);
  Read(n, "name", o.name);
  ReadVec3(n, "size", o.size);
  o.eval_semi_axes = std::sqrt(3.0) / 2.0 * o.size;
  ReadVec3(n, "eval_semi_axes", o.eval_semi_axes);
  if (n["position"]) {
    if (n["waypoints"]) throw Error("scenario: give either position or waypoints");
    o.schedule.push_back({0.0, AsVec3(n["position"], "position")});
  }
  if (n["waypoints"]) {
    for (const auto& w : n["waypoints"]) {
      if (!w.IsSequence() || w.size() != 4) {
        throw Error("scenario: waypoint must be [t, x, y, z]");
      }
      o.schedule.push_back(
          {w[0].as<double>(), Vec3(w[1].as<double>(), w[2].as<double>(), w[3].as<double>())});
    }
  }
  return o;
}

Wall ParseWall(const YAML::Node& n) {
  CheckKeys(n, "walls", {"axis", "offset", "lo", "hi"});
  Wall w;
  const auto axis = n["axis"].as<std::string>("x");
  if (axis == "x") w.axis = 0;
  else if (axis == "y") w.axis = 1;
  else if (axis == "z") w.axis = 2;
  else throw Error("scenario: wall axis must be x, y or z");
  Read(n, "offset", w.offset);
  if (n["lo"]) w.lo = Eigen::Vector2d(n["lo"][0].as<double>(), n["lo"][1].as<double>());
  if (n["hi"]) w.hi = Eigen::Vector2d(n["hi"][0].as<double>(), n["hi"][1].as<double>());
  return w;
}

bool IsMultiple(double ratio) {
  return ratio >= 1.0 - 1e-9 && std::fabs(ratio - std::round(ratio)) < 1e-6;
}

}  // namespace

Vec3 ObstacleScript::PositionAt(double t) const {
  if (schedule.empty()) return Vec3::Zero();
  if (t <= schedule.front().time) return schedule.front().position;
  if (t >= schedule.back().time) return schedule.back().position;
  const auto it = std::upper_bound(schedule.begin(), schedule.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.time; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double s = (t - a.time) / (b.time - a.time);
  return a.position + s * (b.position - a.position);
}

Vec3 ObstacleScript::VelocityAt(double t) const {
  if (schedule.size() < 2 || t < schedule.front().time || t >= schedule.back().time) {
    return Vec3::Zero();
  }
  const auto it = std::upper_bound(schedule.begin(), schedule.end(), t,
                                   [](double v, const Waypoint& w) { return v < w.time; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  return (b.position - a.position) / (b.time - a.time);
}

BoxObstacle ObstacleScript::BoxAt(double t) const {
  return {PositionAt(t), size, VelocityAt(t)};
}

Ellipsoid ObstacleScript::EvalEllipsoidAt(double t) const {
  return {PositionAt(t), eval_semi_axes, 0.0};
}

int Scenario::TicksPerFrame() const {
  return static_cast<int>(std::lround(tick_rate / detection_rate));
}

int Scenario::TicksPerControl() const {
  return static_cast<int>(std::lround(tick_rate * planner.dt));
}

void Scenario::Validate() const {
  if (!(duration > 0.0)) throw Error("scenario: duration must be > 0");
  camera.Validate();
  planner.Validate();
  if (!(detection_rate > 0.0) || !(tick_rate > 0.0)) {
    throw Error("scenario: rates must be > 0");
  }
  if (!IsMultiple(tick_rate / detection_rate)) {
    throw Error("scenario: tick_rate must be a multiple of detection_rate");
  }
  if (!IsMultiple(tick_rate * planner.dt)) {
    throw Error("scenario: planner dt must be a whole number of ticks");
  }
  if (!IsPsd(noise.process) || !IsPsd(noise.estimator)) {
    throw Error("scenario: noise covariances must be positive semidefinite");
  }
  if (sensor_noise.sigma_at_1m < 0.0 || sensor_noise.dropout_prob < 0.0 ||
      sensor_noise.dropout_prob > 1.0) {
    throw Error("scenario: invalid sensor noise");
  }
  for (const auto& o : obstacles) {
    if (o.schedule.empty()) throw Error("scenario: obstacle '" + o.name + "' has no waypoints");
    if ((o.size.array() <= 0.0).any() || (o.eval_semi_axes.array() <= 0.0).any()) {
      throw Error("scenario: obstacle '" + o.name + "' needs positive dimensions");
    }
    for (size_t i = 1; i < o.schedule.size(); ++i) {
      if (!(o.schedule[i].time > o.schedule[i - 1].time)) {
        throw Error("scenario: schedule of '" + o.name + "' is not time-monotone");
      }
    }
  }
}

Scenario ParseScenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(std::string("scenario: ") + e.what());
  }
  Scenario s;
  s.noise.process = NoiseConfig::DefaultProcess();
  try {
    CheckKeys(root, "scenario",
              {"name", "seed", "duration", "goal", "goal_tolerance", "stop_at_goal",
               "mav_start", "camera", "sensor_noise", "estimator_noise", "process_noise",
               "dynamics", "detection", "tracker", "planner", "simulation", "obstacles",
               "walls"});
    Read(root, "name", s.name);
    Read(root, "seed", s.seed);
    Read(root, "duration", s.duration);
    ReadVec3(root, "goal", s.goal);
    Read(root, "goal_tolerance", s.goal_tolerance);
    Read(root, "stop_at_goal", s.stop_at_goal);
    if (const auto n = root["mav_start"]) {
      CheckKeys(n, "mav_start", {"position", "velocity", "yaw_deg"});
      ReadVec3(n, "position", s.start.p);
      ReadVec3(n, "velocity", s.start.v);
      if (n["yaw_deg"]) s.start.yaw = n["yaw_deg"].as<double>() * kDeg;
    }
    if (const auto n = root["camera"]) ParseCamera(n, s);
    if (const auto n = root["sensor_noise"]) {
      CheckKeys(n, "sensor_noise", {"sigma_at_1m", "quadratic", "dropout_prob"});
      Read(n, "sigma_at_1m", s.sensor_noise.sigma_at_1m);
      Read(n, "quadratic", s.sensor_noise.quadratic);
      Read(n, "dropout_prob", s.sensor_noise.dropout_prob);
    }
    if (const auto n = root["estimator_noise"]) {
      s.noise.estimator = DiagonalFromStd(n, "estimator_noise");
    }
    if (const auto n = root["process_noise"]) {
      s.noise.process = DiagonalFromStd(n, "process_noise");
    }
    if (const auto n = root["dynamics"]) {
      CheckKeys(n, "dynamics",
                {"drag", "tau_roll", "tau_pitch", "tau_vz", "attitude_limit_deg", "gravity"});
      DynamicsParams& d = s.planner.dynamics;
      Read(n, "drag", d.drag);
      Read(n, "tau_roll", d.tau_roll);
      Read(n, "tau_pitch", d.tau_pitch);
      Read(n, "tau_vz", d.tau_vz);
      Read(n, "gravity", d.gravity);
      if (n["attitude_limit_deg"]) d.attitude_limit = n["attitude_limit_deg"].as<double>() * kDeg;
    }
    if (const auto n = root["detection"]) {
      CheckKeys(n, "detection",
                {"n_bins", "t_height", "min_group_cells", "merge_gap", "min_thickness",
                 "alpha", "beta", "drop_edge_boxes", "clipped_std"});
      Read(n, "n_bins", s.detection.n_bins);
      Read(n, "t_height", s.detection.t_height);
      Read(n, "min_group_cells", s.detection.min_group_cells);
      Read(n, "merge_gap", s.detection.merge_gap);
      Read(n, "min_thickness", s.detection.min_thickness);
      Read(n, "alpha", s.detection.alpha);
      Read(n, "beta", s.detection.beta);
      Read(n, "drop_edge_boxes", s.detection.drop_edge_boxes);
      Read(n, "clipped_std", s.detection.clipped_std);
    }
    if (const auto n = root["tracker"]) {
      CheckKeys(n, "tracker",
                {"accel_std", "size_process_var", "spawn_vel_var", "pd_threshold",
                 "max_misses", "vel_cov_cap"});
      Read(n, "accel_std", s.tracker.accel_std);
      Read(n, "size_process_var", s.tracker.size_process_var);
      Read(n, "spawn_vel_var", s.tracker.spawn_vel_var);
      Read(n, "pd_threshold", s.tracker.pd_threshold);
      Read(n, "max_misses", s.tracker.max_misses);
      if (n["vel_cov_cap"]) {
        s.tracker.vel_cov_cap = n["vel_cov_cap"].as<double>() * Mat3::Identity();
      }
    }
    if (const auto n = root["planner"]) ParsePlanner(n, s);
    if (const auto n = root["simulation"]) {
      CheckKeys(n, "simulation", {"detection_rate", "tick_rate"});
      Read(n, "detection_rate", s.detection_rate);
      Read(n, "tick_rate", s.tick_rate);
    }
    if (const auto n = root["obstacles"]) {
      for (size_t i = 0; i < n.size(); ++i) s.obstacles.push_back(ParseObstacle(n[i], i));
    }
    if (const auto n = root["walls"]) {
      for (const auto& w : n) s.walls.push_back(ParseWall(w));
    }
  } catch (const YAML::Exception& e) {
    throw Error(std::string("scenario: ") + e.what());
  }
  s.planner.process_noise = s.noise.process;
  s.Validate();
  return s;
}

Scenario LoadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseScenario(ss.str());
}

}  // namespace ccmpc
