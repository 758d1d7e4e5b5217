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

// ccmpc: command-line front end for the simulation library.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccmpc/depth_camera.h"
#include "ccmpc/obstacle_detection.h"
#include "ccmpc/obstacle_tracking.h"
#include "ccmpc/records.h"
#include "ccmpc/scenario.h"
#include "ccmpc/simulation.h"
#include "ccmpc/svg_plot.h"

namespace {

using namespace ccmpc;

void PrintSummary(const RunMetrics& m) {
  std::printf("scenario %s seed %llu: %zu control steps\n", m.scenario.c_str(),
              static_cast<unsigned long long>(m.seed), m.steps.size());
  std::printf("  min separation %.3f m, max speed %.2f m/s, collision %s\n",
              m.overall_min_separation, m.max_speed, m.collision ? "yes" : "no");
  std::printf("  goal reached %s, final distance %.3f m\n", m.reached_goal ? "yes" : "no",
              m.final_goal_distance);
  for (const auto& [k, v] : m.status_counts) std::printf("  status %s: %d\n", k.c_str(), v);
}

void PrintDetectionTable(const std::vector<DetectionErrorRow>& rows) {
  std::printf("%-16s %8s %14s %14s\n", "obstacle", "frames", "pos err (m)", "vel err (m/s)");
  for (const auto& r : rows) {
    std::printf("%-16s %8d %14.3f %14.3f\n", r.name.c_str(), r.frames, r.position_error,
                r.velocity_error);
  }
}

std::ostream& OutputStream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw Error("cannot write " + path);
  return file;
}

std::istream& InputStream(const std::string& path, std::ifstream& file) {
  if (path == "-") return std::cin;
  file.open(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path);
  return file;
}

// Vehicle estimate used to place detections in the world: exact pose, no
// uncertainty.
GaussianState PoseEstimate(const std::vector<double>& pose) {
  MavState x;
  x.p = Vec3(pose[0], pose[1], pose[2]);
  x.roll = pose[3];
  x.pitch = pose[4];
  x.yaw = pose[5];
  return {x.ToVector(), StateMat::Zero()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chance-constrained MPC collision-avoidance simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one closed-loop scenario");
  std::string run_scenario, run_out = "run_out";
  uint64_t run_seed = 0;
  bool run_has_seed = false;
  run->add_option("scenario", run_scenario, "Scenario file (YAML)")->required();
  run->add_option("--seed", run_seed, "Override the scenario seed")
      ->each([&](const std::string&) { run_has_seed = true; });
  run->add_option("--out", run_out, "Output directory");

  // campaign
  auto* campaign = app.add_subcommand("campaign", "Monte Carlo campaign over seeds");
  std::string camp_scenario, camp_out;
  int camp_runs = 1, camp_jobs = 1;
  uint64_t camp_seed0 = 0;
  bool camp_has_seed = false;
  campaign->add_option("scenario", camp_scenario, "Scenario file (YAML)")->required();
  campaign->add_option("--runs", camp_runs, "Number of runs")->required()->check(CLI::PositiveNumber);
  campaign->add_option("--seed0", camp_seed0, "First seed (default: scenario seed)")
      ->each([&](const std::string&) { camp_has_seed = true; });
  campaign->add_option("--jobs", camp_jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  campaign->add_option("--out", camp_out, "Write the report here instead of stdout");

  // detect-bench
  auto* bench = app.add_subcommand("detect-bench", "Detection and tracking error table");
  std::string bench_scenario;
  bool bench_json = false;
  bench->add_option("scenario", bench_scenario, "Scenario file (YAML)")->required();
  bench->add_flag("--json", bench_json, "Print JSON instead of a text table");

  // validate-cc
  auto* vcc = app.add_subcommand("validate-cc", "Monte Carlo check of the chance constraint");
  std::vector<double> vcc_delta = {0.03, 0.1, 0.25};
  int vcc_samples = 100000;
  uint64_t vcc_seed = 1;
  vcc->add_option("--delta", vcc_delta, "Collision probability threshold(s)");
  vcc->add_option("--samples", vcc_samples, "Samples per case")->check(CLI::PositiveNumber);
  vcc->add_option("--seed", vcc_seed, "RNG seed");

  // plot
  auto* plot = app.add_subcommand("plot", "SVG of trajectory and separation for a run");
  std::string plot_dir, plot_out;
  plot->add_option("run_dir", plot_dir, "Directory written by `run`")->required();
  plot->add_option("--out", plot_out, "SVG path (default: <run_dir>/plot.svg)");

  // render
  auto* render = app.add_subcommand("render", "Render a scenario depth frame");
  std::string render_scenario, render_out, render_pgm;
  double render_time = 0.0;
  render->add_option("scenario", render_scenario, "Scenario file (YAML)")->required();
  render->add_option("--time", render_time, "Scenario time of the frame");
  render->add_option("--out", render_out, "Binary depth image path")->required();
  render->add_option("--pgm", render_pgm, "Also write an ASCII PGM");

  // detect
  auto* detect = app.add_subcommand("detect", "Detect obstacles in a binary depth image");
  std::string detect_in, detect_out;
  double detect_range = 6.0;
  std::vector<double> detect_pose = {0, 0, 0, 0, 0, 0};
  detect->add_option("image", detect_in, "Binary depth image ('-' for stdin)")->required();
  detect->add_option("--max-range", detect_range, "Camera max range (m)");
  detect->add_option("--pose", detect_pose, "Camera pose x y z roll pitch yaw")
      ->expected(6);
  detect->add_option("--out", detect_out, "Detection records (default stdout)");

  // track
  auto* track = app.add_subcommand("track", "Track obstacles from detection records");
  std::string track_in, track_out;
  track->add_option("detections", track_in, "Detection records ('-' for stdin)")->required();
  track->add_option("--out", track_out, "Track records (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Scenario s = LoadScenario(run_scenario);
      if (run_has_seed) s.seed = run_seed;
      const RunMetrics m = RunScenario(s);
      WriteRunOutputs(run_out, m);
      PrintSummary(m);
      std::printf("  outputs in %s\n", run_out.c_str());
      return 0;
    }
    if (*campaign) {
      const Scenario s = LoadScenario(camp_scenario);
      const CampaignReport r =
          McCampaign(s, camp_runs, camp_has_seed ? camp_seed0 : s.seed, camp_jobs);
      std::ofstream file;
      OutputStream(camp_out, file) << CampaignToJson(r) << '\n';
      if (r.collisions > 0) {
        std::fprintf(stderr, "%d of %d runs collided\n", r.collisions, camp_runs);
        return 1;
      }
      return 0;
    }
    if (*bench) {
      const auto rows = DetectionBenchmark(LoadScenario(bench_scenario));
      if (bench_json) {
        std::cout << DetectionTableToJson(rows) << '\n';
      } else {
        PrintDetectionTable(rows);
      }
      return 0;
    }
    if (*vcc) {
      struct Case {
        const char* name;
        Ellipsoid obstacle;
        Mat3 cov, obstacle_cov;
        Vec3 direction;
      };
      const std::vector<Case> cases = {
          {"sphere", {Vec3::Zero(), Vec3::Constant(0.5), 0.0},
           Vec3(0.04, 0.04, 0.02).asDiagonal(), Vec3(0.02, 0.02, 0.01).asDiagonal(),
           Vec3(1, 0.3, 0.1)},
          {"ellipsoid", {Vec3::Zero(), Vec3(0.4, 0.4, 0.9), 0.4},
           Vec3(0.05, 0.02, 0.03).asDiagonal(), Vec3(0.03, 0.06, 0.02).asDiagonal(),
           Vec3(0.6, -1, 0.2)},
      };
      bool ok = true;
      std::printf("%-10s %7s %10s %12s %8s\n", "shape", "delta", "distance", "empirical",
                  "bound");
      for (double delta : vcc_delta) {
        for (const auto& c : cases) {
          const ChanceCheck r = CheckChanceConstraint(c.obstacle, c.cov, c.obstacle_cov,
                                                      c.direction, delta, 0.4, vcc_samples,
                                                      vcc_seed);
          const bool pass = r.empirical <= delta + 0.01;
          ok = ok && pass;
          std::printf("%-10s %7.3f %10.4f %12.5f %8.3f %s\n", c.name, delta, r.distance,
                      r.empirical, delta + 0.01, pass ? "ok" : "VIOLATED");
        }
      }
      return ok ? 0 : 1;
    }
    if (*plot) {
      const auto steps = ReadSteps((std::filesystem::path(plot_dir) / "steps.jsonl").string());
      const std::string out =
          plot_out.empty() ? (std::filesystem::path(plot_dir) / "plot.svg").string() : plot_out;
      std::ofstream f(out);
      f << PlotRunSvg(steps, plot_dir);
      if (!f) throw Error("cannot write " + out);
      std::printf("wrote %s\n", out.c_str());
      return 0;
    }
    if (*render) {
      const Scenario s = LoadScenario(render_scenario);
      std::vector<BoxObstacle> boxes;
      for (const auto& o : s.obstacles) boxes.push_back(o.BoxAt(render_time));
      const DepthImage img =
          RenderDepth(s.start.ToPose(), s.camera, boxes, s.walls, render_time);
      SaveDepthImage(render_out, img);
      if (!render_pgm.empty()) {
        std::ofstream f(render_pgm);
        WritePgm(f, img);
      }
      return 0;
    }
    if (*detect) {
      std::ifstream in_file;
      const DepthImage img = ReadDepthImage(InputStream(detect_in, in_file), detect_range);
      const auto meas = DetectObstacles(img, PoseEstimate(detect_pose), DetectionParams{});
      std::ofstream out_file;
      std::ostream& out = OutputStream(detect_out, out_file);
      for (const auto& m : meas) out << DetectionToJson(m) << '\n';
      return 0;
    }
    if (*track) {
      std::ifstream in_file;
      std::map<double, std::vector<ObstacleMeasurement>> frames;
      for (const auto& line : ReadLines(InputStream(track_in, in_file))) {
        const ObstacleMeasurement m = DetectionFromJson(line);
        frames[m.timestamp].push_back(m);
      }
      Tracker tracker;
      std::ofstream out_file;
      std::ostream& out = OutputStream(track_out, out_file);
      for (const auto& [t, meas] : frames) {
        tracker.Process(meas, t);
        for (const auto& tr : tracker.tracks()) out << TrackToJson(tr, t) << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
