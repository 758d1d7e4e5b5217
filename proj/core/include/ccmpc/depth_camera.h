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

#ifndef CCMPC_DEPTH_CAMERA_H_
#define CCMPC_DEPTH_CAMERA_H_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ccmpc/core_types.h"

namespace ccmpc {

// Row-major z-depth image in meters. A value of 0 marks "no return".
class DepthImage {
 public:
  static constexpr float kNoReturn = 0.0f;

  DepthImage() = default;
  explicit DepthImage(const CameraIntrinsics& intrinsics, double timestamp = 0.0)
      : intrinsics_(intrinsics),
        timestamp_(timestamp),
        data_(static_cast<size_t>(intrinsics.width) * intrinsics.height,
              kNoReturn) {}

  int width() const { return intrinsics_.width; }
  int height() const { return intrinsics_.height; }
  const CameraIntrinsics& intrinsics() const { return intrinsics_; }
  double timestamp() const { return timestamp_; }
  void set_timestamp(double t) { timestamp_ = t; }

  float at(int row, int col) const { return data_[Index(row, col)]; }
  float& at(int row, int col) { return data_[Index(row, col)]; }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool operator==(const DepthImage& other) const = default;

 private:
  size_t Index(int row, int col) const {
    return static_cast<size_t>(row) * intrinsics_.width + col;
  }

  CameraIntrinsics intrinsics_;
  double timestamp_ = 0.0;
  std::vector<float> data_;
};

struct SensorNoiseModel {
  double sigma_at_1m = 0.0;  // meters
  bool quadratic = true;     // std grows as sigma_at_1m * d^2
  double dropout_prob = 0.0;
};

// Finite axis-aligned planar patch: the plane coordinate[axis] == offset,
// limited to [lo, hi] on the two remaining axes (in increasing axis order).
struct Wall {
  int axis = 0;
  double offset = 0.0;
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(-std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
};

// Yaw of a box whose front face is normal to the horizontal bearing from
// `viewer` to the box center.
double FacingYaw(const Vec3& viewer, const Vec3& box_center);

// Ray-casts every pixel against the boxes (yawed to face the camera) and the
// walls, keeping the nearest z-depth; misses and hits beyond max_range are
// no-return.
DepthImage RenderDepth(const Pose& camera_pose,
                       const CameraIntrinsics& intrinsics,
                       std::span<const BoxObstacle> obstacles,
                       std::span<const Wall> walls = {},
                       double timestamp = 0.0);

// Adds zero-mean Gaussian depth noise and random dropouts. Each pixel draws
// from its own counter-based stream, so the result depends only on
// (image, model, seed).
DepthImage ApplyNoise(const DepthImage& img, const SensorNoiseModel& model,
                      uint64_t rng_seed);

// Little-endian binary format: u32 width, u32 height, f64 focal, f64 cx,
// f64 cy, f64 timestamp, then width*height f32 depths in row-major order.
void WriteDepthImage(std::ostream& os, const DepthImage& img);
// max_range is not part of the format and must be supplied by the reader.
DepthImage ReadDepthImage(std::istream& is, double max_range);
void SaveDepthImage(const std::string& path, const DepthImage& img);
DepthImage LoadDepthImage(const std::string& path, double max_range);

// ASCII PGM (P2) with depths in millimeters.
void WritePgm(std::ostream& os, const DepthImage& img);

}  // namespace ccmpc

#endif  // CCMPC_DEPTH_CAMERA_H_
