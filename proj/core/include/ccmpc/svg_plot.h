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

#ifndef CCMPC_SVG_PLOT_H_
#define CCMPC_SVG_PLOT_H_

#include <string>
#include <vector>

#include "ccmpc/simulation.h"

namespace ccmpc {

// Two panels side by side: top-down (x, y) paths of the vehicle and every
// obstacle, and separation against time with the 0.4 m reference line.
std::string PlotRunSvg(const std::vector<StepRecord>& steps, const std::string& title);

}  // namespace ccmpc

#endif  // CCMPC_SVG_PLOT_H_
