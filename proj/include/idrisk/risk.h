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

// Identification disclosure risk of partially synthetic microdata.
//
// For each confidential record i the intruder knows the unsynthesized "known"
// variables and the true values of the synthesized variables. A synthetic
// record j matches i when every known variable agrees (categorical equality,
// continuous values within a radius of the target's value) and every
// synthesized variable agrees (categorical equality, continuous values inside
// the target's range, either per-variable intervals or a normalized ellipse).
//
//   c_i  = number of matching synthetic records
//   t_i  = 1 if synthetic record i itself matches
//   ir_i = t_i / c_i   (0 when c_i = 0)
//
// File-level risk is the column sum of ir over records.

#ifndef IDRISK_RISK_H_
#define IDRISK_RISK_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "idrisk/dataset.h"

namespace idrisk {

struct RiskConfig {
  std::vector<std::string> known;
  std::vector<std::string> synthesized;
  // One radius per continuous variable in known ∪ synthesized.
  std::map<std::string, double> radii;
  // Radii are fractions of the confidential value rather than absolute units.
  bool percentage = true;
  // Synthesized continuous variables are matched inside a normalized ellipse
  // instead of a rectangle.
  bool euclidean = false;

  // Same radius for every continuous variable of `schema` in known ∪
  // synthesized.
  static RiskConfig WithUniformRadius(const Schema& schema,
                                      std::vector<std::string> known,
                                      std::vector<std::string> synthesized,
                                      double r, bool percentage = true,
                                      bool euclidean = false);
};

struct Range {
  double center = 0;
  double lo = 0;
  double hi = 0;

  double half_width() const { return hi - center; }
  bool Contains(double v) const { return lo <= v && v <= hi; }
};

// Closed matching interval around `x`. Percentage mode scales the radius by
// |x|, so x = 0 degenerates to exact matching. Throws DataError if r < 0.
Range MakeRange(double x, double r, bool percentage);

struct RecordRisk {
  std::uint32_t c = 0;
  std::uint8_t t = 0;
  double ir = 0;

  bool operator==(const RecordRisk&) const = default;
};

// Row-major n x m matrix.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct RiskResult {
  Matrix<std::uint32_t> c;
  Matrix<std::uint8_t> t;
  Matrix<double> ir;
  std::vector<double> file_risk;
  std::vector<double> true_match_rate;
  std::vector<double> false_match_rate;

  std::size_t num_records() const { return ir.rows(); }
  std::size_t num_synthetic() const { return ir.cols(); }

  bool operator==(const RiskResult&) const = default;
};

// RiskConfig resolved against a schema: column indices and radii by role.
class MatchRule {
 public:
  // Validates the config: names exist, known ∩ synthesized = ∅, every
  // continuous variable has a finite radius >= 0. Throws DataError.
  MatchRule(const Schema& schema, const RiskConfig& config);

  struct ContinuousTerm {
    std::size_t col;
    double radius;
  };

  const Schema& schema() const { return schema_; }
  bool percentage() const { return percentage_; }
  bool euclidean() const { return euclidean_; }
  std::span<const std::size_t> known_categorical() const {
    return known_categorical_;
  }
  std::span<const ContinuousTerm> known_continuous() const {
    return known_continuous_;
  }
  std::span<const std::size_t> syn_categorical() const {
    return syn_categorical_;
  }
  std::span<const ContinuousTerm> syn_continuous() const {
    return syn_continuous_;
  }

  // K: does `candidate` agree with `target` on every known variable?
  bool KnownMatch(std::span<const double> target,
                  std::span<const double> candidate) const;
  // S: does `candidate` agree with the true values of `target` on every
  // synthesized variable?
  bool SynMatch(std::span<const double> target,
                std::span<const double> candidate) const;
  bool Matches(std::span<const double> target,
               std::span<const double> candidate) const {
    return KnownMatch(target, candidate) && SynMatch(target, candidate);
  }

  // Ellipse criterion on precomputed per-variable ranges. A zero half-width
  // dimension requires exact equality.
  static bool InsideEllipse(std::span<const Range> ranges,
                            std::span<const double> values);

 private:
  Schema schema_;
  bool percentage_;
  bool euclidean_;
  std::vector<std::size_t> known_categorical_;
  std::vector<ContinuousTerm> known_continuous_;
  std::vector<std::size_t> syn_categorical_;
  std::vector<ContinuousTerm> syn_continuous_;
};

// Free-function forms operating on materialized rows.
bool KnownMatch(std::span<const double> target,
                std::span<const double> candidate, const Schema& schema,
                const RiskConfig& config);
bool SynMatch(std::span<const double> target,
              std::span<const double> candidate, const Schema& schema,
              const RiskConfig& config);

// Risk of original record `i` against one synthetic dataset, by direct
// enumeration over all synthetic rows. `syn` must share `orig`'s schema and
// row count.
RecordRisk ComputeRecordRisk(std::size_t i, const Dataset& orig,
                             const Dataset& syn, const RiskConfig& config);

struct EvaluateOptions {
  // 0 means hardware concurrency.
  unsigned threads = 0;
};

// Reference evaluator: enumerates every (target, candidate) pair.
RiskResult Evaluate(const Dataset& orig, std::span<const Dataset> syn_list,
                    const RiskConfig& config,
                    const EvaluateOptions& options = {});

// Grouped evaluator: buckets synthetic rows by their categorical key, sorts
// each bucket along one continuous dimension, and resolves each target by
// binary search plus a scan of the candidates inside that dimension's range.
// Output is identical to Evaluate.
RiskResult EvaluateFast(const Dataset& orig, std::span<const Dataset> syn_list,
                        const RiskConfig& config,
                        const EvaluateOptions& options = {});

}  // namespace idrisk

#endif  // IDRISK_RISK_H_
