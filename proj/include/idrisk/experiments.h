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

// End-to-end studies of the utility-risk trade-off on CE-like data: a radius
// sweep, a comparison of synthesis scenarios, and a study of the number of
// released replicates m.

#ifndef IDRISK_EXPERIMENTS_H_
#define IDRISK_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idrisk/cart.h"
#include "idrisk/dataset.h"
#include "idrisk/risk.h"
#include "idrisk/utility.h"

namespace idrisk {

enum class ScenarioId { kS1, kS2, kS3, kS4 };

struct Scenario {
  ScenarioId id;
  std::string name;
  // Synthesis order.
  std::vector<std::string> visit_sequence;
};

// S1: Income. S2: Tenure, Income. S3: Expenditure, Income.
// S4: Tenure, Expenditure, Income.
Scenario GetScenario(ScenarioId id);
std::vector<Scenario> AllScenarios();
// Accepts "S1".."S4" or "1".."4". Throws DataError otherwise.
Scenario ParseScenario(std::string_view text);

struct BoxSummary {
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;

  double iqr() const { return q3 - q1; }
};

// Five-number summary with linearly interpolated quartiles (R's type 7).
// Throws DataError on empty input.
BoxSummary Summarize(std::span<const double> values);

// Quartile rectangle plus median-to-extreme whiskers on both axes.
struct Box2D {
  BoxSummary risk;
  BoxSummary utility;
};

double Mean(std::span<const double> values);

// Seven CE-like variables in this column order:
//   Age (continuous, 20-80), Urban (2 levels), Tenure (6 levels),
//   Educ (7 levels), Expenditure (continuous, > 0), Marital (5 levels),
//   Income (continuous, > 0).
// Expenditure and Income are log-normal, correlated with each other and with
// Age. Deterministic in (n, seed).
Dataset GenerateCeLike(std::size_t n, std::uint64_t seed);

struct ExperimentConfig {
  std::vector<std::string> known = {"Age", "Urban", "Marital"};
  // Radius for continuous known variables. Unset: use the swept radius.
  std::optional<double> known_radius;
  bool percentage = true;
  bool euclidean = false;
  // CART settings; visit_sequence, m and seed are filled per run.
  SynthesisPlan cart;
  LogisticOptions logistic;
  unsigned threads = 0;
};

// Risk config for `scenario` with radius r on every synthesized continuous
// variable.
RiskConfig ScenarioRiskConfig(const Schema& schema,
                              const std::vector<std::string>& synthesized,
                              double r, const ExperimentConfig& config);

inline const std::vector<double>& DefaultRadiusGrid() {
  static const std::vector<double> grid = {0.01, 0.025, 0.05, 0.1, 0.2, 0.3};
  return grid;
}

struct SweepResult {
  std::vector<std::string> synthesized;
  std::vector<double> radii;
  // file_risk[r][k]: file-level risk of replicate k at radii[r].
  std::vector<std::vector<double>> file_risk;
  std::vector<BoxSummary> boxes;
  std::vector<double> mean_risk;
  // Radius with the largest mean file risk; ties go to the smaller radius.
  std::size_t best_index = 0;
  double best_radius = 0;
  // Full evaluations per radius.
  std::vector<RiskResult> results;
};

// Evaluates precomputed replicates at every radius of the grid.
SweepResult RadiusSweep(const Dataset& orig, std::span<const Dataset> replicates,
                        const std::vector<std::string>& synthesized,
                        const std::vector<double>& radii,
                        const ExperimentConfig& config);

// Synthesizes m replicates of `scenario` once, then sweeps the radius grid.
SweepResult RunRadiusSweep(const Dataset& orig, const Scenario& scenario,
                           const std::vector<double>& radii, int m,
                           std::uint64_t seed, const ExperimentConfig& config);

struct RadiusPolicy {
  // Used when `fixed` is unset: pick the risk-maximizing radius of the grid.
  std::vector<double> grid = DefaultRadiusGrid();
  std::optional<double> fixed;
};

struct ScenarioOutcome {
  Scenario scenario;
  SweepResult sweep;
  double radius = 0;
  // Per replicate, at `radius`.
  std::vector<double> risk;
  std::vector<double> utility;
  Box2D box;
};

// Per scenario: synthesize m replicates, choose the radius, and pair each
// replicate's file risk with its propensity utility. Scenario s uses seed
// stream (seed, s).
std::vector<ScenarioOutcome> ScenarioStudy(const Dataset& orig,
                                           std::span<const Scenario> scenarios,
                                           int m, const RadiusPolicy& policy,
                                           std::uint64_t seed,
                                           const ExperimentConfig& config);

// Same, on caller-provided replicates (one list per scenario).
ScenarioOutcome EvaluateScenario(const Dataset& orig, const Scenario& scenario,
                                 std::span<const Dataset> replicates,
                                 const RadiusPolicy& policy,
                                 const ExperimentConfig& config);

struct MStudyOptions {
  std::vector<int> m_values = {1, 10, 20};
  int repetitions = 200;
  double radius = 0.1;
  bool compute_utility = true;
};

struct MStudyArm {
  int m = 0;
  // Per repetition: mean over the m replicates.
  std::vector<double> mean_risk;
  std::vector<double> mean_utility;
  Box2D box;
};

// For each m and repetition, synthesizes m fresh replicates of `scenario` from
// seed stream (seed, m, repetition) and records the replicate-averaged file
// risk and utility.
std::vector<MStudyArm> MStudy(const Dataset& orig, const Scenario& scenario,
                              const MStudyOptions& options, std::uint64_t seed,
                              const ExperimentConfig& config);

}  // namespace idrisk

#endif  // IDRISK_EXPERIMENTS_H_
