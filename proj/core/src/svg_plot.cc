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

#include "ccmpc/svg_plot.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ccmpc {
namespace {

constexpr double kPanel = 420.0;
constexpr double kPad = 40.0;
constexpr std::array<const char*, 6> kColors = {"#d62728", "#2ca02c", "#9467bd",
                                                "#ff7f0e", "#8c564b", "#17becf"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void Add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void Finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-6) lo -= 0.5, hi += 0.5;
  }
};

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

class Panel {
 public:
  Panel(double x0, Range xr, Range yr, bool equal_aspect) : x0_(x0), xr_(xr), yr_(yr) {
    sx_ = (kPanel - 2 * kPad) / (xr_.hi - xr_.lo);
    sy_ = (kPanel - 2 * kPad) / (yr_.hi - yr_.lo);
    if (equal_aspect) sx_ = sy_ = std::min(sx_, sy_);
  }
  double X(double v) const { return x0_ + kPad + (v - xr_.lo) * sx_; }
  double Y(double v) const { return kPanel - kPad - (v - yr_.lo) * sy_; }

  void Frame(std::ostringstream& os, const std::string& label, const std::string& xl,
             const std::string& yl) const {
    os << "<rect x='" << x0_ + kPad << "' y='" << kPad << "' width='" << kPanel - 2 * kPad
       << "' height='" << kPanel - 2 * kPad << "' fill='none' stroke='#999'/>\n";
    os << "<text x='" << x0_ + kPanel / 2 << "' y='20' text-anchor='middle'>" << label
       << "</text>\n";
    os << "<text x='" << x0_ + kPanel / 2 << "' y='" << kPanel - 8
       << "' text-anchor='middle' font-size='11'>" << xl << " [" << Fmt(xr_.lo) << ", "
       << Fmt(xr_.hi) << "]</text>\n";
    os << "<text x='" << x0_ + 12 << "' y='" << kPanel / 2 << "' font-size='11' transform='rotate(-90 "
       << x0_ + 12 << ' ' << kPanel / 2 << ")' text-anchor='middle'>" << yl << " ["
       << Fmt(yr_.lo) << ", " << Fmt(yr_.hi) << "]</text>\n";
  }

  template <typename F>
  void Polyline(std::ostringstream& os, size_t n, F point, const char* color,
                const char* dash = nullptr) const {
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5'";
    if (dash) os << " stroke-dasharray='" << dash << "'";
    os << " points='";
    for (size_t i = 0; i < n; ++i) {
      const auto [x, y] = point(i);
      if (!std::isfinite(y)) continue;
      os << Fmt(X(x)) << ',' << Fmt(Y(y)) << ' ';
    }
    os << "'/>\n";
  }

 private:
  double x0_;
  Range xr_, yr_;
  double sx_ = 1.0, sy_ = 1.0;
};

}  // namespace

std::string PlotRunSvg(const std::vector<StepRecord>& steps, const std::string& title) {
  const size_t n_obs = steps.empty() ? 0 : steps.front().obstacle_positions.size();
  Range px, py, t, sep;
  for (const auto& s : steps) {
    px.Add(s.truth.p.x());
    py.Add(s.truth.p.y());
    for (const auto& o : s.obstacle_positions) {
      px.Add(o.x());
      py.Add(o.y());
    }
    t.Add(s.time);
    for (double d : s.separation) sep.Add(d);
  }
  sep.Add(0.0);
  sep.Add(0.4);
  px.Finish();
  py.Finish();
  t.Finish();
  sep.Finish();

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << 2 * kPanel << "' height='"
     << kPanel + 20 << "' font-family='sans-serif' font-size='13'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << kPanel << "' y='" << kPanel + 14 << "' text-anchor='middle'>" << title
     << "</text>\n";

  const Panel top(0.0, px, py, true);
  top.Frame(os, "top-down trajectory", "x (m)", "y (m)");
  top.Polyline(os, steps.size(),
               [&](size_t i) { return std::pair(steps[i].truth.p.x(), steps[i].truth.p.y()); },
               "#1f77b4");
  for (size_t j = 0; j < n_obs; ++j) {
    top.Polyline(os, steps.size(),
                 [&](size_t i) {
                   return std::pair(steps[i].obstacle_positions[j].x(),
                                    steps[i].obstacle_positions[j].y());
                 },
                 kColors[j % kColors.size()], "4 3");
  }

  const Panel right(kPanel, t, sep, false);
  right.Frame(os, "separation vs time", "t (s)", "separation (m)");
  right.Polyline(os, 2, [&](size_t i) { return std::pair(i == 0 ? t.lo : t.hi, 0.4); },
                 "#777", "2 2");
  for (size_t j = 0; j < n_obs; ++j) {
    right.Polyline(os, steps.size(),
                   [&](size_t i) { return std::pair(steps[i].time, steps[i].separation[j]); },
                   kColors[j % kColors.size()]);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace ccmpc
