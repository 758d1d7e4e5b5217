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

#include "ccmpc/obstacle_detection.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ccmpc {

UDepthMap BuildUDepth(const DepthImage& img, int n_bins) {
  if (n_bins < 1) throw Error("u-depth: n_bins must be >= 1");
  UDepthMap map;
  map.n_bins = n_bins;
  map.width = img.width();
  map.bin_depth = img.intrinsics().max_range / n_bins;
  map.cx = img.intrinsics().cx;
  map.counts.assign(static_cast<size_t>(n_bins) * map.width, 0);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      const double d = img.at(r, c);
      if (d == DepthImage::kNoReturn) continue;
      int b = static_cast<int>(std::floor(d / map.bin_depth));
      b = std::clamp(b, 0, n_bins - 1);  // d == max_range lands in the last bin
      ++map.count(b, c);
    }
  }
  return map;
}

double PoiThreshold(double focal, double t_height, double d_bin) {
  if (!(d_bin > 0.0)) throw Error("poi threshold: bin depth must be > 0");
  return focal * t_height / d_bin;
}

namespace {

// Gap between two closed integer intervals; negative when they overlap.
int IntervalGap(int lo_a, int hi_a, int lo_b, int hi_b) {
  return std::max(lo_a, lo_b) - std::min(hi_a, hi_b) - 1;
}

struct Group {
  int b_min, b_max, c_min, c_max, cells;
};

// Joins groups separated by at most `gap` empty cells in both columns and
// depth bins, until no pair qualifies. The earlier group absorbs
// the later one so scan order is preserved.
void MergeGroups(std::vector<Group>& groups, int gap) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (size_t i = 0; i < groups.size() && !merged; ++i) {
      for (size_t j = i + 1; j < groups.size(); ++j) {
        Group& a = groups[i];
        const Group& b = groups[j];
        if (IntervalGap(a.c_min, a.c_max, b.c_min, b.c_max) > gap ||
            IntervalGap(a.b_min, a.b_max, b.b_min, b.b_max) > gap) {
          continue;
        }
        a.b_min = std::min(a.b_min, b.b_min);
        a.b_max = std::max(a.b_max, b.b_max);
        a.c_min = std::min(a.c_min, b.c_min);
        a.c_max = std::max(a.c_max, b.c_max);
        a.cells += b.cells;
        groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
        break;
      }
    }
  }
}

}  // namespace

std::vector<UDepthBox> ExtractBoxes(const UDepthMap& map, double focal,
                                    double t_height, int min_group_cells,
                                    int merge_gap) {
  const int nb = map.n_bins, w = map.width;
  std::vector<char> poi(static_cast<size_t>(nb) * w, 0);
  for (int b = 0; b < nb; ++b) {
    const double threshold = PoiThreshold(focal, t_height, map.BinCenter(b));
    for (int c = 0; c < w; ++c) {
      poi[static_cast<size_t>(b) * w + c] = map.count(b, c) > threshold;
    }
  }

  std::vector<Group> groups;
  std::vector<char> seen(poi.size(), 0);
  std::vector<std::pair<int, int>> stack;
  for (int b0 = 0; b0 < nb; ++b0) {
    for (int c0 = 0; c0 < w; ++c0) {
      const size_t i0 = static_cast<size_t>(b0) * w + c0;
      if (!poi[i0] || seen[i0]) continue;
      int b_min = b0, b_max = b0, c_min = c0, c_max = c0, cells = 0;
      stack.assign(1, {b0, c0});
      seen[i0] = 1;
      while (!stack.empty()) {
        const auto [b, c] = stack.back();
        stack.pop_back();
        ++cells;
        b_min = std::min(b_min, b);
        b_max = std::max(b_max, b);
        c_min = std::min(c_min, c);
        c_max = std::max(c_max, c);
        for (int db = -1; db <= 1; ++db) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int nb2 = b + db, nc = c + dc;
            if (nb2 < 0 || nb2 >= nb || nc < 0 || nc >= w) continue;
            const size_t j = static_cast<size_t>(nb2) * w + nc;
            if (poi[j] && !seen[j]) {
              seen[j] = 1;
              stack.emplace_back(nb2, nc);
            }
          }
        }
      }
      groups.push_back({b_min, b_max, c_min, c_max, cells});
    }
  }
  if (merge_gap >= 0) MergeGroups(groups, merge_gap);

  std::vector<UDepthBox> boxes;
  for (const Group& g : groups) {
    if (g.cells < min_group_cells || g.c_min == g.c_max) continue;
    UDepthBox box;
    box.col_l = g.c_min;
    box.col_r = g.c_max;
    // Outer pixel edges, so a group of n columns spans n pixels.
    box.u_l = g.c_min - 0.5 - map.cx;
    box.u_r = g.c_max + 0.5 - map.cx;
    box.d_t = g.b_min * map.bin_depth;
    box.d_b = (g.b_max + 1) * map.bin_depth;
    box.cells = g.cells;
    boxes.push_back(box);
  }
  return boxes;
}

UDepthGeometry BoxFromUDepth(const UDepthBox& b, double focal) {
  UDepthGeometry g;
  g.x = b.d_b;
  g.lateral = (b.u_l + b.u_r) * b.d_b / (2.0 * focal);
  g.thickness = 2.0 * (b.d_b - b.d_t);
  g.width = (b.u_r - b.u_l) * b.d_b / focal;
  return g;
}

VerticalExtent VerticalExtentOf(const DepthImage& img, const UDepthBox& b,
                                double focal) {
  const double thickness = 2.0 * (b.d_b - b.d_t);
  const double lo = b.d_t, hi = b.d_t + thickness;
  int row_min = std::numeric_limits<int>::max(), row_max = -1;
  const int c0 = std::max(0, b.col_l), c1 = std::min(img.width() - 1, b.col_r);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double d = img.at(r, c);
      if (d == DepthImage::kNoReturn || d < lo || d > hi) continue;
      row_min = std::min(row_min, r);
      row_max = std::max(row_max, r);
      break;  // only the row span matters
    }
  }
  if (row_max < 0) throw Error("vertical extent: no pixels inside the box region");
  // Rows grow downwards; measure upwards from the principal point.
  const double cy = img.intrinsics().cy;
  const double h_t = cy - row_min;
  const double h_b = cy - row_max;
  return {(h_t + h_b) * b.d_b / (2.0 * focal), (h_t - h_b) * b.d_b / focal,
          row_min == 0 || row_max == img.height() - 1};
}

Mat3 BodyMeasurementCovariance(double depth, double alpha, double beta) {
  const double sx = alpha * depth * depth;
  const double syz = beta * depth;
  return Vec3(sx * sx, syz * syz, syz * syz).asDiagonal();
}

ObstacleMeasurement ToWorldMeasurement(const BodyBox& body,
                                       const GaussianState& mav,
                                       const Mat3& body_pos_cov,
                                       const Mat3& body_size_cov,
                                       double timestamp) {
  if (mav.dim() != 9 || mav.covariance.rows() != 9) {
    throw Error("to world: expected a 9-state vehicle estimate");
  }
  Pose pose;
  pose.position = mav.mean.head<3>();
  pose.roll = mav.mean[6];
  pose.pitch = mav.mean[7];
  pose.yaw = mav.mean[8];
  const Mat3 r = RotationOf(pose);
  const Mat3 r_s = SizeCompensationMatrix(pose);

  ObstacleMeasurement m;
  m.timestamp = timestamp;
  m.position_world = r * body.position + pose.position;
  m.pos_cov = Symmetrized(r * body_pos_cov * r.transpose() +
                          mav.covariance.topLeftCorner<3, 3>());
  m.size_world = r_s * body.size;
  m.size_cov = Symmetrized(r_s.transpose() * body_size_cov * r_s);
  return m;
}

std::vector<ObstacleMeasurement> DetectObstacles(const DepthImage& img,
                                                 const GaussianState& mav,
                                                 const DetectionParams& params) {
  const double f = img.intrinsics().focal_length_px;
  const UDepthMap map = BuildUDepth(img, params.n_bins);
  std::vector<ObstacleMeasurement> out;
  for (const UDepthBox& b : ExtractBoxes(map, f, params.t_height, params.min_group_cells,
                                       params.merge_gap)) {
    if (params.drop_edge_boxes && (b.col_l <= 0 || b.col_r >= img.width() - 1)) continue;
    VerticalExtent v;
    try {
      v = VerticalExtentOf(img, b, f);
    } catch (const Error&) {
      continue;
    }
    const UDepthGeometry g = BoxFromUDepth(b, f);
    const double pixel = g.x / f;
    BodyBox body;
    // Image columns grow towards body -y.
    body.position = Vec3(g.x, -g.lateral, v.z);
    body.size = Vec3(std::max(g.thickness, params.min_thickness),
                     std::max(g.width, pixel), std::max(v.height, pixel));
    Mat3 pos_cov = BodyMeasurementCovariance(g.x, params.alpha, params.beta);
    Mat3 size_cov = pos_cov;
    if (v.clipped) {
      const double var = params.clipped_std * params.clipped_std;
      pos_cov(2, 2) = std::max(pos_cov(2, 2), var);
      size_cov(2, 2) = std::max(size_cov(2, 2), var);
    }
    out.push_back(ToWorldMeasurement(body, mav, pos_cov, size_cov, img.timestamp()));
  }
  return out;
}

}  // namespace ccmpc
