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

#include "ccmpc/special_functions.h"

#include <cmath>
#include <limits>
#include <numbers>

namespace ccmpc {
namespace {

// Single-precision-grade initial guess (M. Giles, "Approximating the erfinv
// function", 2010).
double ErfInvInitialGuess(double x) {
  double w = -std::log((1.0 - x) * (1.0 + x));
  double p;
  if (w < 5.0) {
    w -= 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
  } else {
    w = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
  }
  return p * x;
}

}  // namespace

double ErfInv(double x) {
  if (std::isnan(x) || x < -1.0 || x > 1.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (x == 1.0) return std::numeric_limits<double>::infinity();
  if (x == -1.0) return -std::numeric_limits<double>::infinity();
  if (x == 0.0) return 0.0;

  // Odd symmetry; work on |x| so the tail can be solved through erfc, where
  // 1 - |x| is exact for |x| >= 0.5.
  const double ax = std::fabs(x);
  double y = ErfInvInitialGuess(ax);
  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
  for (int i = 0; i < 4; ++i) {
    const double residual =
        ax < 0.5 ? std::erf(y) - ax : (1.0 - ax) - std::erfc(y);
    const double slope = two_over_sqrt_pi * std::exp(-y * y);
    const double step = residual / slope;
    // Halley correction; erf'' = -2 y erf'.
    y -= step / (1.0 + y * step);
    if (std::fabs(step) <= 1e-17 * std::fabs(y)) break;
  }
  return x < 0.0 ? -y : y;
}

}  // namespace ccmpc
