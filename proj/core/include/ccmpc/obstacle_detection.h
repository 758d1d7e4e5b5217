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

#ifndef CCMPC_OBSTACLE_DETECTION_H_
#define CCMPC_OBSTACLE_DETECTION_H_

#include <vector>

#include "ccmpc/core_types.h"
#include "ccmpc/depth_camera.h"

namespace ccmpc {

// Column-wise depth histogram: rows are depth bins, columns image columns.
struct UDepthMap {
  int n_bins = 0;
  int width = 0;
  double bin_depth = 0.0;  // meters per bin
  double cx = 0.0;         // principal point column of the source image
  std::vector<int> counts;  // n_bins x width, row-major

  int count(int bin, int col) const { return counts[static_cast<size_t>(bin) * width + col]; }
  int& count(int bin, int col) { return counts[static_cast<size_t>(bin) * width + col]; }
  // Depth at the center of a bin.
  double BinCenter(int bin) const { return (bin + 0.5) * bin_depth; }
};

// Bounding rectangle of a point-of-interest group in the U-depth map.
// u_l/u_r are the outer edges of the extreme columns measured from the
// principal point (column -/+ 0.5 - cx); col_l/col_r are the raw image
// columns.
struct UDepthBox {
  double u_l = 0.0;
  double u_r = 0.0;
  double d_t = 0.0;  // near depth
  double d_b = 0.0;  // far depth
  int col_l = 0;
  int col_r = 0;
  int cells = 0;
};

// Box geometry in the camera body frame.
struct BodyBox {
  Vec3 position = Vec3::Zero();  // x forward, y left, z up
  Vec3 size = Vec3::Zero();      // thickness, width, height
};

struct ObstacleMeasurement {
  Vec3 position_world = Vec3::Zero();
  Vec3 size_world = Vec3::Ones();
  Mat3 pos_cov = Mat3::Zero();
  Mat3 size_cov = Mat3::Zero();
  double timestamp = 0.0;
};

struct DetectionParams {
  int n_bins = 60;
  double t_height = 0.5;        // obstacle-height threshold for points of interest (m)
  int min_group_cells = 4;
  int merge_gap = 2;            // cells; -1 disables merging of nearby groups
  double min_thickness = 0.1;   // m
  double alpha = 0.02;          // forward std = alpha * d^2 (1/m)
  double beta = 0.01;           // lateral/vertical std = beta * d
  // Boxes reaching the left or right image border are dropped; vertically
  // clipped boxes keep their measurement with this std (m) on the vertical
  // position and height.
  bool drop_edge_boxes = true;
  double clipped_std = 0.5;
};

UDepthMap BuildUDepth(const DepthImage& img, int n_bins);

// f * t_height / d_bin. Throws Error when d_bin <= 0.
double PoiThreshold(double focal, double t_height, double d_bin);

// Marks bins whose count exceeds the point-of-interest threshold at the bin's
// center depth, groups them by 8-connected flood fill and returns the
// bounding rectangle of every group with at least `min_group_cells` cells.
// With merge_gap >= 0, groups at most that many empty cells apart in both
// columns and depth bins are joined first.
// Groups are ordered by their first cell in (bin, column) scan order.
std::vector<UDepthBox> ExtractBoxes(const UDepthMap& map, double focal,
                                    double t_height, int min_group_cells = 4,
                                    int merge_gap = -1);

struct UDepthGeometry {
  double x = 0.0;          // forward position
  double lateral = 0.0;    // offset towards increasing image columns
  double thickness = 0.0;
  double width = 0.0;
};

// Horizontal position and size from a U-depth rectangle (forward = d_b,
// thickness = 2 (d_b - d_t)). Lateral offset is in image-column direction.
UDepthGeometry BoxFromUDepth(const UDepthBox& b, double focal);

struct VerticalExtent {
  double z = 0.0;
  double height = 0.0;
  bool clipped = false;  // the span reaches the top or bottom image row
};

// Scans the depth image inside the box's columns for depths within
// [d_t, d_t + thickness] and converts the row span into vertical position and
// height. Throws Error when no pixel qualifies.
VerticalExtent VerticalExtentOf(const DepthImage& img, const UDepthBox& b,
                                double focal);

// Body-frame measurement noise, diag((alpha d^2)^2, (beta d)^2, (beta d)^2).
Mat3 BodyMeasurementCovariance(double depth, double alpha, double beta);

// Transforms a body-frame box into the world using the vehicle estimate
// (a 9-state GaussianState [p, v, roll, pitch, yaw]). The world position
// covariance is R Sigma_B R^T plus the vehicle's position covariance; sizes
// are compensated for roll and pitch.
ObstacleMeasurement ToWorldMeasurement(const BodyBox& body,
                                       const GaussianState& mav,
                                       const Mat3& body_pos_cov,
                                       const Mat3& body_size_cov,
                                       double timestamp = 0.0);

// Full per-image pipeline.
std::vector<ObstacleMeasurement> DetectObstacles(const DepthImage& img,
                                                 const GaussianState& mav,
                                                 const DetectionParams& params);

}  // namespace ccmpc

#endif  // CCMPC_OBSTACLE_DETECTION_H_
