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

#include "ccmpc/records.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>

#include "json.hpp"

namespace ccmpc {
namespace {

using nlohmann::json;

json V(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 ToVec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("records: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// JSON has no infinity; unbounded separations are written as null.
json Num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double FromNum(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json StateJson(const MavState& x) {
  return {{"p", V(x.p)}, {"v", V(x.v)}, {"rpy", json::array({x.roll, x.pitch, x.yaw})}};
}

MavState StateFromJson(const json& j) {
  MavState x;
  x.p = ToVec3(j.at("p"));
  x.v = ToVec3(j.at("v"));
  const Vec3 rpy = ToVec3(j.at("rpy"));
  x.roll = rpy[0];
  x.pitch = rpy[1];
  x.yaw = rpy[2];
  return x;
}

json TrackJson(const Track& tr) {
  return {{"id", tr.id},
          {"position", V(tr.position())},
          {"velocity", V(tr.velocity())},
          {"size", V(tr.size)},
          {"pos_cov_diag", V(tr.position_cov().diagonal())},
          {"vel_cov_diag", V(tr.velocity_cov().diagonal())},
          {"size_cov_diag", V(tr.size_cov.diagonal())},
          {"misses", tr.misses}};
}

json StatusCounts(const std::map<std::string, int>& counts) {
  json j = json::object();
  for (const auto& [k, v] : counts) j[k] = v;
  return j;
}

json PercentilesJson(const Percentiles& p) {
  return {{"p50", p.p50}, {"p75", p.p75}, {"p95", p.p95}, {"max", p.max}};
}

json DetectionRows(const std::vector<DetectionErrorRow>& rows) {
  json a = json::array();
  for (const auto& r : rows) {
    a.push_back({{"obstacle", r.name},
                 {"frames", r.frames},
                 {"position_error", r.position_error},
                 {"velocity_error", r.velocity_error}});
  }
  return a;
}

}  // namespace

std::string DetectionToJson(const ObstacleMeasurement& m) {
  return json{{"t", m.timestamp},
              {"position", V(m.position_world)},
              {"size", V(m.size_world)},
              {"pos_cov_diag", V(m.pos_cov.diagonal())},
              {"size_cov_diag", V(m.size_cov.diagonal())}}
      .dump();
}

ObstacleMeasurement DetectionFromJson(const std::string& line) {
  try {
    const json j = json::parse(line);
    ObstacleMeasurement m;
    m.timestamp = j.at("t").get<double>();
    m.position_world = ToVec3(j.at("position"));
    m.size_world = ToVec3(j.at("size"));
    m.pos_cov = ToVec3(j.at("pos_cov_diag")).asDiagonal();
    m.size_cov = ToVec3(j.at("size_cov_diag")).asDiagonal();
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("records: bad detection record: ") + e.what());
  }
}

std::string TrackToJson(const Track& track, double time) {
  json j = TrackJson(track);
  j["t"] = time;
  return j.dump();
}

std::string StepToJson(const StepRecord& s) {
  json tracks = json::array();
  for (const auto& tr : s.tracks) tracks.push_back(TrackJson(tr));
  json obstacles = json::array();
  for (const auto& p : s.obstacle_positions) obstacles.push_back(V(p));
  json sep = json::array();
  for (double d : s.separation) sep.push_back(Num(d));
  return json{{"t", s.time},
              {"truth", StateJson(s.truth)},
              {"estimate", StateJson(s.estimate)},
              {"control", json::array({s.control.roll_cmd, s.control.pitch_cmd,
                                       s.control.vz_cmd, s.control.yaw_rate_cmd})},
              {"status", ToString(s.status)},
              {"cost", s.cost},
              {"max_violation", s.max_violation},
              {"num_detections", s.num_detections},
              {"tracks", tracks},
              {"obstacles", obstacles},
              {"separation", sep}}
      .dump();
}

StepRecord StepFromJson(const std::string& line) {
  try {
    const json j = json::parse(line);
    StepRecord s;
    s.time = j.at("t").get<double>();
    s.truth = StateFromJson(j.at("truth"));
    s.estimate = StateFromJson(j.at("estimate"));
    for (const auto& p : j.at("obstacles")) s.obstacle_positions.push_back(ToVec3(p));
    for (const auto& d : j.at("separation")) s.separation.push_back(FromNum(d));
    s.cost = j.value("cost", 0.0);
    s.max_violation = j.value("max_violation", 0.0);
    s.num_detections = j.value("num_detections", 0);
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("records: bad step record: ") + e.what());
  }
}

std::string SummaryToJson(const RunMetrics& m) {
  json min_sep = json::array();
  for (double d : m.min_separation) min_sep.push_back(Num(d));
  return json{{"scenario", m.scenario},
              {"seed", m.seed},
              {"steps", m.steps.size()},
              {"min_separation", min_sep},
              {"overall_min_separation", Num(m.overall_min_separation)},
              {"max_speed", m.max_speed},
              {"collision", m.collision},
              {"reached_goal", m.reached_goal},
              {"final_goal_distance", m.final_goal_distance},
              {"status_counts", StatusCounts(m.status_counts)},
              {"detection_errors", DetectionRows(m.detection_errors)}}
      .dump(2);
}

std::string TimingToJson(const RunMetrics& m) {
  return json{{"detect", PercentilesJson(ComputePercentiles(m.detect_times))},
              {"solve", PercentilesJson(ComputePercentiles(m.solve_times))},
              {"detect_frames", m.detect_times.size()},
              {"solves", m.solve_times.size()}}
      .dump();
}

std::string CampaignToJson(const CampaignReport& r) {
  json runs = json::array();
  for (size_t i = 0; i < r.seeds.size(); ++i) {
    runs.push_back({{"seed", r.seeds[i]},
                    {"min_separation", Num(r.min_separation[i])},
                    {"max_speed", r.max_speed[i]},
                    {"reached_goal", static_cast<bool>(r.reached_goal[i])}});
  }
  std::vector<double> finite;
  for (double d : r.min_separation) {
    if (std::isfinite(d)) finite.push_back(d);
  }
  const Percentiles sep = ComputePercentiles(finite);
  double mean = 0.0;
  for (double d : finite) mean += d;
  if (!finite.empty()) mean /= static_cast<double>(finite.size());
  return json{{"scenario", r.scenario},
              {"seed0", r.seed0},
              {"runs", runs},
              {"collisions", r.collisions},
              {"min_separation",
               {{"min", finite.empty() ? json(nullptr) : json(*std::min_element(
                                                             finite.begin(), finite.end()))},
                {"mean", finite.empty() ? json(nullptr) : json(mean)},
                {"p50", sep.p50}}},
              {"status_counts", StatusCounts(r.status_counts)},
              {"solve_time", PercentilesJson(r.solve_time)},
              {"detect_time", PercentilesJson(r.detect_time)}}
      .dump(2);
}

std::string DetectionTableToJson(const std::vector<DetectionErrorRow>& rows) {
  return DetectionRows(rows).dump(2);
}

void WriteRunOutputs(const std::string& dir, const RunMetrics& m) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream out(base / "steps.jsonl");
    for (const auto& s : m.steps) out << StepToJson(s) << '\n';
    if (!out) throw Error("records: cannot write " + (base / "steps.jsonl").string());
  }
  {
    std::ofstream out(base / "summary.json");
    out << SummaryToJson(m) << '\n';
    if (!out) throw Error("records: cannot write summary.json");
  }
  {
    std::ofstream out(base / "timing.jsonl");
    for (double d : m.detect_times) out << json{{"kind", "detect"}, {"seconds", d}}.dump() << '\n';
    for (double d : m.solve_times) out << json{{"kind", "solve"}, {"seconds", d}}.dump() << '\n';
  }
}

std::vector<std::string> ReadLines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

std::vector<StepRecord> ReadSteps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("records: cannot open " + path);
  std::vector<StepRecord> steps;
  for (const auto& line : ReadLines(in)) steps.push_back(StepFromJson(line));
  return steps;
}

}  // namespace ccmpc
