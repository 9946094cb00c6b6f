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

#include "idrisk/experiments.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "idrisk/parallel.h"
#include "idrisk/rng.h"

namespace idrisk {

Scenario GetScenario(ScenarioId id) {
  switch (id) {
    case ScenarioId::kS1:
      return {id, "S1", {"Income"}};
    case ScenarioId::kS2:
      return {id, "S2", {"Tenure", "Income"}};
    case ScenarioId::kS3:
      return {id, "S3", {"Expenditure", "Income"}};
    case ScenarioId::kS4:
      return {id, "S4", {"Tenure", "Expenditure", "Income"}};
  }
  throw DataError("unknown scenario");
}

std::vector<Scenario> AllScenarios() {
  return {GetScenario(ScenarioId::kS1), GetScenario(ScenarioId::kS2),
          GetScenario(ScenarioId::kS3), GetScenario(ScenarioId::kS4)};
}

Scenario ParseScenario(std::string_view text) {
  std::string_view s = text;
  if (!s.empty() && (s.front() == 'S' || s.front() == 's')) s.remove_prefix(1);
  if (s == "1") return GetScenario(ScenarioId::kS1);
  if (s == "2") return GetScenario(ScenarioId::kS2);
  if (s == "3") return GetScenario(ScenarioId::kS3);
  if (s == "4") return GetScenario(ScenarioId::kS4);
  throw DataError("unknown scenario '" + std::string(text) +
                  "' (expected S1, S2, S3 or S4)");
}

namespace {

double Quantile(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

BoxSummary Summarize(std::span<const double> values) {
  if (values.empty()) throw DataError("cannot summarize an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxSummary box;
  box.min = sorted.front();
  box.q1 = Quantile(sorted, 0.25);
  box.median = Quantile(sorted, 0.5);
  box.q3 = Quantile(sorted, 0.75);
  box.max = sorted.back();
  return box;
}

double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

namespace {

template <std::size_t N>
std::size_t Draw(Rng& rng, const std::array<double, N>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.Uniform() * total;
  for (std::size_t k = 0; k < N; ++k) {
    if (u < weights[k]) return k;
    u -= weights[k];
  }
  return N - 1;
}

std::vector<std::string> Codes(int count) {
  std::vector<std::string> out;
  for (int k = 1; k <= count; ++k) out.push_back(std::to_string(k));
  return out;
}

}  // namespace

Dataset GenerateCeLike(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw DataError("generate: n must be at least 1");
  Rng rng = Rng::Stream(seed, {0xCE});

  std::vector<double> age(n), urban(n), tenure(n), educ(n), expenditure(n),
      marital(n), income(n);
  for (std::size_t i = 0; i < n; ++i) {
    double a;
    do {
      a = std::round(48.0 + 16.0 * rng.Normal());
    } while (a < 20.0 || a > 80.0);
    age[i] = a;
    const double centered = (a - 45.0) / 10.0;

    urban[i] = rng.Uniform() < 0.93 ? 0.0 : 1.0;

    // Married, widowed, divorced, separated, never married.
    std::array<double, 5> marital_w = {0.50, 0.06, 0.14, 0.03, 0.27};
    if (a < 30) marital_w = {0.25, 0.00, 0.04, 0.02, 0.69};
    if (a >= 65) marital_w = {0.50, 0.28, 0.14, 0.02, 0.06};
    marital[i] = static_cast<double>(Draw(rng, marital_w));

    const std::array<double, 7> educ_w = {0.03, 0.07, 0.24, 0.21,
                                          0.11, 0.21, 0.13};
    educ[i] = static_cast<double>(Draw(rng, educ_w));

    const double log_income = 10.75 + 0.16 * (educ[i] - 3.0) +
                              0.10 * centered - 0.04 * centered * centered +
                              (marital[i] == 0 ? 0.35 : 0.0) -
                              (urban[i] == 1 ? 0.10 : 0.0) +
                              0.90 * rng.Normal();
    income[i] = std::max(1.0, std::round(std::exp(log_income)));

    // Owned with mortgage, owned outright, owned (mortgage unknown), rented,
    // occupied without payment, student housing.
    const double own = 1.0 / (1.0 + std::exp(-(0.9 * (log_income - 10.75) +
                                               0.45 * centered + 0.2)));
    std::array<double, 6> tenure_w = {
        own * (a < 62 ? 0.62 : 0.30), own * (a < 62 ? 0.30 : 0.66),
        own * 0.04, (1.0 - own) * 0.93, (1.0 - own) * 0.05,
        a < 26 ? 0.02 : 0.002};
    tenure[i] = static_cast<double>(Draw(rng, tenure_w));

    const double log_expenditure = 8.55 + 0.45 * (log_income - 10.75) +
                                   0.03 * centered +
                                   (tenure[i] <= 2 ? 0.12 : 0.0) +
                                   0.70 * rng.Normal();
    expenditure[i] = std::max(1.0, std::round(std::exp(log_expenditure)));
  }

  Schema schema({VariableSpec::Continuous("Age"),
                 VariableSpec::Categorical("Urban", Codes(2)),
                 VariableSpec::Categorical("Tenure", Codes(6)),
                 VariableSpec::Categorical("Educ", Codes(7)),
                 VariableSpec::Continuous("Expenditure"),
                 VariableSpec::Categorical("Marital", Codes(5)),
                 VariableSpec::Continuous("Income")});
  return Dataset(std::move(schema),
                 {std::move(age), std::move(urban), std::move(tenure),
                  std::move(educ), std::move(expenditure), std::move(marital),
                  std::move(income)});
}

RiskConfig ScenarioRiskConfig(const Schema& schema,
                              const std::vector<std::string>& synthesized,
                              double r, const ExperimentConfig& config) {
  RiskConfig cfg = RiskConfig::WithUniformRadius(
      schema, config.known, synthesized, r, config.percentage,
      config.euclidean);
  if (config.known_radius) {
    for (const auto& name : config.known) {
      if (!schema[schema.IndexOf(name)].is_categorical()) {
        cfg.radii[name] = *config.known_radius;
      }
    }
  }
  return cfg;
}

SweepResult RadiusSweep(const Dataset& orig,
                        std::span<const Dataset> replicates,
                        const std::vector<std::string>& synthesized,
                        const std::vector<double>& radii,
                        const ExperimentConfig& config) {
  if (radii.empty()) throw DataError("radius sweep: empty radius grid");
  for (double r : radii) {
    if (!(r > 0) || !std::isfinite(r)) {
      throw DataError("radius sweep: radii must be positive");
    }
  }
  SweepResult sweep;
  sweep.synthesized = synthesized;
  sweep.radii = radii;
  EvaluateOptions eval;
  eval.threads = config.threads;
  for (double r : radii) {
    const RiskConfig cfg =
        ScenarioRiskConfig(orig.schema(), synthesized, r, config);
    RiskResult result = EvaluateFast(orig, replicates, cfg, eval);
    sweep.file_risk.push_back(result.file_risk);
    sweep.boxes.push_back(Summarize(result.file_risk));
    sweep.mean_risk.push_back(Mean(result.file_risk));
    sweep.results.push_back(std::move(result));
  }
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (sweep.mean_risk[k] > sweep.mean_risk[sweep.best_index]) {
      sweep.best_index = k;
    } else if (sweep.mean_risk[k] == sweep.mean_risk[sweep.best_index] &&
               radii[k] < radii[sweep.best_index]) {
      sweep.best_index = k;
    }
  }
  sweep.best_radius = radii[sweep.best_index];
  return sweep;
}

namespace {

std::vector<Dataset> SynthesizeScenario(const Dataset& orig,
                                        const Scenario& scenario, int m,
                                        std::uint64_t seed,
                                        const ExperimentConfig& config) {
  SynthesisPlan plan = config.cart;
  plan.visit_sequence = scenario.visit_sequence;
  plan.m = m;
  plan.seed = seed;
  return Synthesize(orig, plan, config.threads);
}

}  // namespace

SweepResult RunRadiusSweep(const Dataset& orig, const Scenario& scenario,
                           const std::vector<double>& radii, int m,
                           std::uint64_t seed, const ExperimentConfig& config) {
  const auto replicates = SynthesizeScenario(orig, scenario, m, seed, config);
  return RadiusSweep(orig, replicates, scenario.visit_sequence, radii, config);
}

ScenarioOutcome EvaluateScenario(const Dataset& orig, const Scenario& scenario,
                                 std::span<const Dataset> replicates,
                                 const RadiusPolicy& policy,
                                 const ExperimentConfig& config) {
  ScenarioOutcome out;
  out.scenario = scenario;
  const std::vector<double> grid =
      policy.fixed ? std::vector<double>{*policy.fixed} : policy.grid;
  out.sweep = RadiusSweep(orig, replicates, scenario.visit_sequence, grid,
                          config);
  out.radius = out.sweep.best_radius;
  out.risk = out.sweep.file_risk[out.sweep.best_index];
  out.utility =
      PropensityUtility(orig, replicates, config.logistic, config.threads)
          .per_dataset;
  out.box = Box2D{Summarize(out.risk), Summarize(out.utility)};
  return out;
}

std::vector<ScenarioOutcome> ScenarioStudy(const Dataset& orig,
                                           std::span<const Scenario> scenarios,
                                           int m, const RadiusPolicy& policy,
                                           std::uint64_t seed,
                                           const ExperimentConfig& config) {
  if (scenarios.empty()) throw DataError("scenario study: no scenarios");
  std::vector<ScenarioOutcome> outcomes;
  for (const Scenario& scenario : scenarios) {
    const std::uint64_t stream =
        SplitMix64(seed ^ SplitMix64(static_cast<std::uint64_t>(scenario.id) + 1));
    const auto replicates =
        SynthesizeScenario(orig, scenario, m, stream, config);
    outcomes.push_back(
        EvaluateScenario(orig, scenario, replicates, policy, config));
  }
  return outcomes;
}

std::vector<MStudyArm> MStudy(const Dataset& orig, const Scenario& scenario,
                              const MStudyOptions& options, std::uint64_t seed,
                              const ExperimentConfig& config) {
  if (options.repetitions < 2) {
    throw DataError("m study: repetitions must be at least 2");
  }
  if (options.m_values.empty()) throw DataError("m study: no m values");
  const RiskConfig risk_cfg = ScenarioRiskConfig(
      orig.schema(), scenario.visit_sequence, options.radius, config);
  // Validate once up front so worker threads do not all fail the same way.
  MatchRule(orig.schema(), risk_cfg);

  ExperimentConfig inner = config;
  inner.threads = 1;
  EvaluateOptions eval;
  eval.threads = 1;

  std::vector<MStudyArm> arms;
  for (int m : options.m_values) {
    if (m < 1) throw DataError("m study: m values must be at least 1");
    MStudyArm arm;
    arm.m = m;
    const auto reps = static_cast<std::size_t>(options.repetitions);
    arm.mean_risk.assign(reps, 0.0);
    arm.mean_utility.assign(reps, 0.0);
    ParallelFor(reps, config.threads, [&](std::size_t rep) {
      const std::uint64_t stream = SplitMix64(
          SplitMix64(seed ^ SplitMix64(static_cast<std::uint64_t>(m))) ^
          SplitMix64(rep + 0x9E37));
      const auto replicates =
          SynthesizeScenario(orig, scenario, m, stream, inner);
      arm.mean_risk[rep] =
          Mean(EvaluateFast(orig, replicates, risk_cfg, eval).file_risk);
      if (options.compute_utility) {
        arm.mean_utility[rep] = Mean(
            PropensityUtility(orig, replicates, config.logistic, 1)
                .per_dataset);
      }
    });
    arm.box = Box2D{Summarize(arm.mean_risk), Summarize(arm.mean_utility)};
    arms.push_back(std::move(arm));
  }
  return arms;
}

}  // namespace idrisk
