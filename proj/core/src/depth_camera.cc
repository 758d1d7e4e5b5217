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

#include "ccmpc/depth_camera.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

namespace ccmpc {
namespace {

constexpr double kHitEpsilon = 1e-9;

// Returns the smallest t > 0 at which origin + t * dir enters the axis-aligned
// box [-half, half], or +inf.
double RayAabb(const Vec3& origin, const Vec3& dir, const Vec3& half) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::fabs(dir[i]) < 1e-15) {
      if (origin[i] < -half[i] || origin[i] > half[i]) {
        return std::numeric_limits<double>::infinity();
      }
      continue;
    }
    double t0 = (-half[i] - origin[i]) / dir[i];
    double t1 = (half[i] - origin[i]) / dir[i];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::numeric_limits<double>::infinity();
  }
  if (t_near > kHitEpsilon) return t_near;
  if (t_far > kHitEpsilon) return t_far;  // camera inside the box
  return std::numeric_limits<double>::infinity();
}

double RayWall(const Vec3& origin, const Vec3& dir, const Wall& wall) {
  const int a = wall.axis;
  if (std::fabs(dir[a]) < 1e-15) return std::numeric_limits<double>::infinity();
  const double t = (wall.offset - origin[a]) / dir[a];
  if (t <= kHitEpsilon) return std::numeric_limits<double>::infinity();
  const Vec3 hit = origin + t * dir;
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    if (i == a) continue;
    if (hit[i] < wall.lo[k] || hit[i] > wall.hi[k]) {
      return std::numeric_limits<double>::infinity();
    }
    ++k;
  }
  return t;
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform in (0, 1).
double ToUnit(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

template <typename T>
void PutLe(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T GetLe(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error("depth image: truncated input");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

double FacingYaw(const Vec3& viewer, const Vec3& box_center) {
  const Vec3 d = box_center - viewer;
  if (std::hypot(d.x(), d.y()) < 1e-12) return 0.0;
  return std::atan2(d.y(), d.x());
}

DepthImage RenderDepth(const Pose& camera_pose,
                       const CameraIntrinsics& intrinsics,
                       std::span<const BoxObstacle> obstacles,
                       std::span<const Wall> walls, double timestamp) {
  DepthImage img(intrinsics, timestamp);
  const Mat3 r_wb = RotationOf(camera_pose);
  const Vec3& origin = camera_pose.position;

  struct LocalBox {
    Mat3 r_wo;  // obstacle frame to world
    Vec3 origin_local;
    Vec3 half;
  };
  std::vector<LocalBox> boxes;
  boxes.reserve(obstacles.size());
  for (const auto& ob : obstacles) {
    const Mat3 r = RotationZ(FacingYaw(origin, ob.center));
    boxes.push_back({r, r.transpose() * (origin - ob.center), 0.5 * ob.size});
  }

  const double f = intrinsics.focal_length_px;
  for (int row = 0; row < intrinsics.height; ++row) {
    for (int col = 0; col < intrinsics.width; ++col) {
      // Body-frame direction with unit forward component, so the ray
      // parameter equals the z-depth.
      const Vec3 dir_body(1.0, -(col - intrinsics.cx) / f,
                          -(row - intrinsics.cy) / f);
      const Vec3 dir = r_wb * dir_body;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& b : boxes) {
        best = std::min(best, RayAabb(b.origin_local, b.r_wo.transpose() * dir, b.half));
      }
      for (const auto& w : walls) best = std::min(best, RayWall(origin, dir, w));
      if (best <= intrinsics.max_range) {
        img.at(row, col) = static_cast<float>(best);
      }
    }
  }
  return img;
}

DepthImage ApplyNoise(const DepthImage& img, const SensorNoiseModel& model,
                      uint64_t rng_seed) {
  DepthImage out = img;
  const double max_range = img.intrinsics().max_range;
  const uint64_t stream = SplitMix64(rng_seed);
  auto data = out.data();
  for (size_t i = 0; i < data.size(); ++i) {
    const double d = data[i];
    if (d == DepthImage::kNoReturn) continue;
    const uint64_t k = SplitMix64(stream ^ SplitMix64(i));
    const double u_drop = ToUnit(SplitMix64(k + 1));
    if (model.dropout_prob > 0.0 && u_drop < model.dropout_prob) {
      data[i] = DepthImage::kNoReturn;
      continue;
    }
    const double sigma =
        model.quadratic ? model.sigma_at_1m * d * d : model.sigma_at_1m;
    if (sigma <= 0.0) continue;
    // Box-Muller.
    const double u1 = ToUnit(SplitMix64(k + 2));
    const double u2 = ToUnit(SplitMix64(k + 3));
    const double z = std::sqrt(-2.0 * std::log(u1)) *
                     std::cos(2.0 * std::numbers::pi * u2);
    const double noisy = d + sigma * z;
    data[i] = (noisy > 0.0 && noisy <= max_range)
                  ? static_cast<float>(noisy)
                  : DepthImage::kNoReturn;
  }
  return out;
}

void WriteDepthImage(std::ostream& os, const DepthImage& img) {
  const auto& in = img.intrinsics();
  PutLe<uint32_t>(os, static_cast<uint32_t>(in.width));
  PutLe<uint32_t>(os, static_cast<uint32_t>(in.height));
  PutLe<double>(os, in.focal_length_px);
  PutLe<double>(os, in.cx);
  PutLe<double>(os, in.cy);
  PutLe<double>(os, img.timestamp());
  for (float v : img.data()) PutLe<float>(os, v);
  if (!os) throw Error("depth image: write failed");
}

DepthImage ReadDepthImage(std::istream& is, double max_range) {
  const auto width = GetLe<uint32_t>(is);
  const auto height = GetLe<uint32_t>(is);
  if (width == 0 || height == 0 || width > 1u << 15 || height > 1u << 15) {
    throw Error("depth image: implausible dimensions");
  }
  const double focal = GetLe<double>(is);
  CameraIntrinsics in = CameraIntrinsics::FromFocal(
      static_cast<int>(width), static_cast<int>(height), focal, max_range);
  in.cx = GetLe<double>(is);
  in.cy = GetLe<double>(is);
  in.Validate();
  const double timestamp = GetLe<double>(is);
  DepthImage img(in, timestamp);
  for (float& v : img.data()) v = GetLe<float>(is);
  return img;
}

void SaveDepthImage(const std::string& path, const DepthImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  WriteDepthImage(os, img);
}

DepthImage LoadDepthImage(const std::string& path, double max_range) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return ReadDepthImage(is, max_range);
}

void WritePgm(std::ostream& os, const DepthImage& img) {
  const int max_mm = static_cast<int>(std::ceil(img.intrinsics().max_range * 1000.0));
  os << "P2\n# depth in millimeters, 0 = no return\n"
     << img.width() << ' ' << img.height() << '\n'
     << std::min(max_mm, 65535) << '\n';
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (c) os << ' ';
      os << std::min(65535, static_cast<int>(std::lround(img.at(r, c) * 1000.0)));
    }
    os << '\n';
  }
}

}  // namespace ccmpc
