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

#ifndef CCMPC_RECORDS_H_
#define CCMPC_RECORDS_H_

// Line-delimited JSON records. One object per line; vectors are JSON arrays
// of three numbers, covariances are given by their diagonals. The schema of
// every record type is documented in README.md.

#include <iosfwd>
#include <string>
#include <vector>

#include "ccmpc/obstacle_detection.h"
#include "ccmpc/obstacle_tracking.h"
#include "ccmpc/simulation.h"

namespace ccmpc {

std::string DetectionToJson(const ObstacleMeasurement& m);
// Off-diagonal covariance entries are zero in the result.
ObstacleMeasurement DetectionFromJson(const std::string& line);

std::string TrackToJson(const Track& track, double time);

std::string StepToJson(const StepRecord& step);
// Enough of a step record for plotting: time, truth, obstacle positions and
// separations.
StepRecord StepFromJson(const std::string& line);

std::string SummaryToJson(const RunMetrics& m);
std::string TimingToJson(const RunMetrics& m);
std::string CampaignToJson(const CampaignReport& r);
std::string DetectionTableToJson(const std::vector<DetectionErrorRow>& rows);

// Writes steps.jsonl, summary.json and timing.jsonl into `dir` (created if
// missing). The first two are a pure function of the scenario and seed.
void WriteRunOutputs(const std::string& dir, const RunMetrics& m);
std::vector<StepRecord> ReadSteps(const std::string& path);

// Reads non-empty lines.
std::vector<std::string> ReadLines(std::istream& in);

}  // namespace ccmpc

#endif  // CCMPC_RECORDS_H_
