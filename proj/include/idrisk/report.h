// Copyright 2026 The idrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serialization of results to JSON, tidy CSV and simple SVG figures.

#ifndef IDRISK_REPORT_H_
#define IDRISK_REPORT_H_

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"

#include "idrisk/experiments.h"
#include "idrisk/risk.h"
#include "idrisk/utility.h"

namespace idrisk {

// {"variables": [{"name": ..., "kind": "continuous"|"categorical",
//                 "levels": [...]}]}
nlohmann::json ToJson(const Schema& schema);
Schema SchemaFromJson(const nlohmann::json& json);
Schema LoadSchema(const std::filesystem::path& path);

nlohmann::json ToJson(const RiskResult& result);
nlohmann::json ToJson(const UtilityResult& result);
nlohmann::json ToJson(const BoxSummary& box);
nlohmann::json ToJson(const Box2D& box);
// `include_matrices` adds the per-radius c/t/ir matrices.
nlohmann::json ToJson(const SweepResult& sweep, bool include_matrices = false);
nlohmann::json ToJson(const ScenarioOutcome& outcome);
nlohmann::json ToJson(const MStudyArm& arm);

// Writes c.csv, t.csv and ir.csv: one row per record, one column per
// synthetic dataset (syn_1 .. syn_m).
void WriteRiskMatrices(const RiskResult& result,
                       const std::filesystem::path& dir);

// Tidy CSVs: one row per scenario/radius/replicate, scenario/replicate, or
// m/repetition.
std::string SweepCsv(std::span<const SweepResult> sweeps,
                     std::span<const std::string> labels);
std::string ScenarioCsv(std::span<const ScenarioOutcome> outcomes);
std::string MStudyCsv(std::span<const MStudyArm> arms);

// Boxplots of file risk per radius, one panel per sweep.
std::string SweepSvg(std::span<const SweepResult> sweeps,
                     std::span<const std::string> labels);
// Utility (x) vs risk (y) scatter with quartile rectangles.
std::string ScenarioSvg(std::span<const ScenarioOutcome> outcomes);
// 2D boxplots: quartile rectangles and median-to-extreme whiskers.
std::string MStudySvg(std::span<const MStudyArm> arms);

void WriteText(const std::filesystem::path& path, const std::string& text);
void WriteJson(const std::filesystem::path& path, const nlohmann::json& json);

}  // namespace idrisk

#endif  // IDRISK_REPORT_H_
