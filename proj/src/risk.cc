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

#include "idrisk/risk.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include "idrisk/parallel.h"

namespace idrisk {

RiskConfig RiskConfig::WithUniformRadius(const Schema& schema,
                                         std::vector<std::string> known,
                                         std::vector<std::string> synthesized,
                                         double r, bool percentage,
                                         bool euclidean) {
  RiskConfig cfg;
  cfg.known = std::move(known);
  cfg.synthesized = std::move(synthesized);
  cfg.percentage = percentage;
  cfg.euclidean = euclidean;
  for (const auto* names : {&cfg.known, &cfg.synthesized}) {
    for (const auto& name : *names) {
      if (!schema[schema.IndexOf(name)].is_categorical()) cfg.radii[name] = r;
    }
  }
  return cfg;
}

Range MakeRange(double x, double r, bool percentage) {
  if (!(r >= 0)) {
    throw DataError("radius must be nonnegative, got " + FormatDouble(r));
  }
  const double half = percentage ? r * std::fabs(x) : r;
  return Range{x, x - half, x + half};
}

MatchRule::MatchRule(const Schema& schema, const RiskConfig& config)
    : schema_(schema),
      percentage_(config.percentage),
      euclidean_(config.euclidean) {
  std::set<std::string> seen;
  auto resolve = [&](const std::vector<std::string>& names, const char* role,
                     std::vector<std::size_t>& categorical,
                     std::vector<ContinuousTerm>& continuous) {
    for (const auto& name : names) {
      auto idx = schema.Find(name);
      if (!idx) {
        throw DataError(std::string(role) + " variable '" + name +
                        "' is not in the data");
      }
      if (!seen.insert(name).second) {
        throw DataError("variable '" + name +
                        "' is listed more than once across known/synthesized");
      }
      if (schema[*idx].is_categorical()) {
        categorical.push_back(*idx);
        continue;
      }
      auto r = config.radii.find(name);
      if (r == config.radii.end()) {
        throw DataError("continuous variable '" + name + "' has no radius");
      }
      if (!std::isfinite(r->second) || r->second < 0) {
        throw DataError("radius for '" + name +
                        "' must be finite and nonnegative");
      }
      continuous.push_back({*idx, r->second});
    }
  };
  resolve(config.known, "known", known_categorical_, known_continuous_);
  resolve(config.synthesized, "synthesized", syn_categorical_,
          syn_continuous_);
  for (const auto& [name, r] : config.radii) {
    if (!seen.count(name)) {
      throw DataError("radius given for '" + name +
                      "', which is neither known nor synthesized");
    }
    if (schema[schema.IndexOf(name)].is_categorical()) {
      throw DataError("radius given for categorical variable '" + name + "'");
    }
  }
}

bool MatchRule::KnownMatch(std::span<const double> target,
                           std::span<const double> candidate) const {
  for (std::size_t col : known_categorical_) {
    if (target[col] != candidate[col]) return false;
  }
  for (const auto& term : known_continuous_) {
    if (!MakeRange(target[term.col], term.radius, percentage_)
             .Contains(candidate[term.col])) {
      return false;
    }
  }
  return true;
}

bool MatchRule::InsideEllipse(std::span<const Range> ranges,
                              std::span<const double> values) {
  double sum = 0;
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    const double d = values[k] - ranges[k].center;
    const double w = ranges[k].half_width();
    if (w == 0) {
      if (d != 0) return false;
      continue;
    }
    const double z = d / w;
    sum += z * z;
  }
  return std::sqrt(sum) <= 1.0;
}

bool MatchRule::SynMatch(std::span<const double> target,
                         std::span<const double> candidate) const {
  for (std::size_t col : syn_categorical_) {
    if (target[col] != candidate[col]) return false;
  }
  if (!euclidean_) {
    for (const auto& term : syn_continuous_) {
      if (!MakeRange(target[term.col], term.radius, percentage_)
               .Contains(candidate[term.col])) {
        return false;
      }
    }
    return true;
  }
  constexpr std::size_t kInline = 8;
  const std::size_t dims = syn_continuous_.size();
  Range ranges_inline[kInline];
  double values_inline[kInline];
  std::vector<Range> ranges_heap;
  std::vector<double> values_heap;
  std::span<Range> ranges(ranges_inline, std::min(dims, kInline));
  std::span<double> values(values_inline, std::min(dims, kInline));
  if (dims > kInline) {
    ranges_heap.resize(dims);
    values_heap.resize(dims);
    ranges = ranges_heap;
    values = values_heap;
  }
  for (std::size_t k = 0; k < dims; ++k) {
    const auto& term = syn_continuous_[k];
    ranges[k] = MakeRange(target[term.col], term.radius, percentage_);
    values[k] = candidate[term.col];
  }
  return InsideEllipse(ranges, values);
}

bool KnownMatch(std::span<const double> target,
                std::span<const double> candidate, const Schema& schema,
                const RiskConfig& config) {
  return MatchRule(schema, config).KnownMatch(target, candidate);
}

bool SynMatch(std::span<const double> target,
              std::span<const double> candidate, const Schema& schema,
              const RiskConfig& config) {
  return MatchRule(schema, config).SynMatch(target, candidate);
}

namespace {

void CheckShape(const Dataset& orig, const Dataset& syn, std::size_t k) {
  if (syn.num_rows() != orig.num_rows()) {
    throw DataError("synthetic dataset " + std::to_string(k + 1) + " has " +
                    std::to_string(syn.num_rows()) + " rows, original has " +
                    std::to_string(orig.num_rows()));
  }
}

// Row-major copy of a dataset for cache-friendly row access.
class RowTable {
 public:
  explicit RowTable(const Dataset& ds)
      : width_(ds.num_cols()), data_(ds.num_rows() * ds.num_cols()) {
    for (std::size_t c = 0; c < width_; ++c) {
      auto col = ds.column(c);
      for (std::size_t r = 0; r < col.size(); ++r) {
        data_[r * width_ + c] = col[r];
      }
    }
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * width_, width_);
  }

 private:
  std::size_t width_;
  std::vector<double> data_;
};

RecordRisk MakeRecordRisk(std::uint32_t c, bool t) {
  RecordRisk rr;
  rr.c = c;
  rr.t = t ? 1 : 0;
  rr.ir = c > 0 ? static_cast<double>(rr.t) / static_cast<double>(c) : 0.0;
  return rr;
}

RiskResult AllocateResult(std::size_t n, std::size_t m) {
  RiskResult result;
  result.c = Matrix<std::uint32_t>(n, m);
  result.t = Matrix<std::uint8_t>(n, m);
  result.ir = Matrix<double>(n, m);
  result.file_risk.assign(m, 0.0);
  result.true_match_rate.assign(m, 0.0);
  result.false_match_rate.assign(m, 0.0);
  return result;
}

void Summarize(RiskResult& result) {
  const std::size_t n = result.num_records();
  for (std::size_t k = 0; k < result.num_synthetic(); ++k) {
    double total = 0;
    std::size_t unique = 0;
    std::size_t unique_true = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += result.ir(i, k);
      if (result.c(i, k) == 1) {
        ++unique;
        if (result.t(i, k) == 1) ++unique_true;
      }
    }
    result.file_risk[k] = total;
    result.true_match_rate[k] =
        n > 0 ? static_cast<double>(unique_true) / static_cast<double>(n) : 0;
    result.false_match_rate[k] =
        static_cast<double>(unique - unique_true) /
        static_cast<double>(std::max<std::size_t>(1, unique));
  }
}

std::vector<Dataset> Conform(const Dataset& orig,
                             std::span<const Dataset> syn_list) {
  if (syn_list.empty()) {
    throw DataError("at least one synthetic dataset is required");
  }
  std::vector<Dataset> out;
  out.reserve(syn_list.size());
  for (std::size_t k = 0; k < syn_list.size(); ++k) {
    CheckShape(orig, syn_list[k], k);
    out.push_back(syn_list[k].ConformTo(orig.schema()));
  }
  return out;
}

void Store(RiskResult& result, std::size_t i, std::size_t k,
           const RecordRisk& rr) {
  result.c(i, k) = rr.c;
  result.t(i, k) = rr.t;
  result.ir(i, k) = rr.ir;
}

}  // namespace

RecordRisk ComputeRecordRisk(std::size_t i, const Dataset& orig,
                             const Dataset& syn, const RiskConfig& config) {
  CheckShape(orig, syn, 0);
  const Dataset conformed = syn.ConformTo(orig.schema());
  if (i >= orig.num_rows()) {
    throw DataError("record index " + std::to_string(i) + " out of range");
  }
  const MatchRule rule(orig.schema(), config);
  const std::vector<double> target = orig.Row(i);
  std::uint32_t c = 0;
  for (std::size_t j = 0; j < conformed.num_rows(); ++j) {
    if (rule.Matches(target, conformed.Row(j))) ++c;
  }
  return MakeRecordRisk(c, rule.Matches(target, conformed.Row(i)));
}

RiskResult Evaluate(const Dataset& orig, std::span<const Dataset> syn_list,
                    const RiskConfig& config, const EvaluateOptions& options) {
  const MatchRule rule(orig.schema(), config);
  const std::vector<Dataset> syns = Conform(orig, syn_list);
  const std::size_t n = orig.num_rows();
  const std::size_t m = syns.size();
  RiskResult result = AllocateResult(n, m);
  const RowTable targets(orig);
  for (std::size_t k = 0; k < m; ++k) {
    const RowTable candidates(syns[k]);
    ParallelFor(n, options.threads, [&](std::size_t i) {
      const auto target = targets.row(i);
      std::uint32_t c = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (rule.Matches(target, candidates.row(j))) ++c;
      }
      Store(result, i, k,
            MakeRecordRisk(c, rule.Matches(target, candidates.row(i))));
    });
  }
  Summarize(result);
  return result;
}

namespace {

// Synthetic rows sharing one categorical key, ordered along the search
// dimension.
struct Bucket {
  std::vector<std::uint32_t> rows;
  std::vector<double> keys;
};

class GroupIndex {
 public:
  GroupIndex(const MatchRule& rule, const Dataset& syn) : rule_(rule) {
    for (std::size_t col : rule.known_categorical()) key_cols_.push_back(col);
    for (std::size_t col : rule.syn_categorical()) key_cols_.push_back(col);
    if (!rule.syn_continuous().empty()) {
      search_ = rule.syn_continuous().front();
      search_is_syn_ = true;
    } else if (!rule.known_continuous().empty()) {
      search_ = rule.known_continuous().front();
    }

    const std::size_t n = syn.num_rows();
    std::vector<std::uint32_t> key(key_cols_.size());
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t q = 0; q < key_cols_.size(); ++q) {
        key[q] = static_cast<std::uint32_t>(syn.at(j, key_cols_[q]));
      }
      auto [it, inserted] = lookup_.try_emplace(key, buckets_.size());
      if (inserted) buckets_.emplace_back();
      buckets_[it->second].rows.push_back(static_cast<std::uint32_t>(j));
    }
    if (search_) {
      auto values = syn.column(search_->col);
      for (auto& bucket : buckets_) {
        std::stable_sort(bucket.rows.begin(), bucket.rows.end(),
                         [&](std::uint32_t a, std::uint32_t b) {
                           return values[a] < values[b];
                         });
        bucket.keys.reserve(bucket.rows.size());
        for (auto r : bucket.rows) bucket.keys.push_back(values[r]);
      }
    }
  }

  // Candidate rows that may match `target`: a superset of the true matches.
  std::span<const std::uint32_t> Candidates(
      std::span<const double> target) const {
    std::vector<std::uint32_t> key(key_cols_.size());
    for (std::size_t q = 0; q < key_cols_.size(); ++q) {
      key[q] = static_cast<std::uint32_t>(target[key_cols_[q]]);
    }
    auto it = lookup_.find(key);
    if (it == lookup_.end()) return {};
    const Bucket& bucket = buckets_[it->second];
    if (!search_) return bucket.rows;

    const Range range = MakeRange(target[search_->col], search_->radius,
                                  rule_.percentage());
    double lo = range.lo;
    double hi = range.hi;
    if (search_is_syn_ && rule_.euclidean()) {
      // The ellipse test divides by the half-width, so pad the bounding box
      // to stay a superset under rounding.
      const double slack =
          1e-9 * (std::fabs(range.center) + range.half_width()) +
          std::numeric_limits<double>::denorm_min();
      lo -= slack;
      hi += slack;
    }
    auto first = std::lower_bound(bucket.keys.begin(), bucket.keys.end(), lo);
    auto last = std::upper_bound(first, bucket.keys.end(), hi);
    const std::size_t begin = first - bucket.keys.begin();
    const std::size_t count = last - first;
    return std::span<const std::uint32_t>(bucket.rows).subspan(begin, count);
  }

 private:
  const MatchRule& rule_;
  std::vector<std::size_t> key_cols_;
  std::optional<MatchRule::ContinuousTerm> search_;
  bool search_is_syn_ = false;
  std::map<std::vector<std::uint32_t>, std::size_t> lookup_;
  std::vector<Bucket> buckets_;
};

}  // namespace

RiskResult EvaluateFast(const Dataset& orig, std::span<const Dataset> syn_list,
                        const RiskConfig& config,
                        const EvaluateOptions& options) {
  const MatchRule rule(orig.schema(), config);
  const std::vector<Dataset> syns = Conform(orig, syn_list);
  const std::size_t n = orig.num_rows();
  const std::size_t m = syns.size();
  RiskResult result = AllocateResult(n, m);
  const RowTable targets(orig);
  for (std::size_t k = 0; k < m; ++k) {
    const RowTable candidates(syns[k]);
    const GroupIndex index(rule, syns[k]);
    ParallelFor(n, options.threads, [&](std::size_t i) {
      const auto target = targets.row(i);
      std::uint32_t c = 0;
      for (std::uint32_t j : index.Candidates(target)) {
        if (rule.Matches(target, candidates.row(j))) ++c;
      }
      Store(result, i, k,
            MakeRecordRisk(c, rule.Matches(target, candidates.row(i))));
    });
  }
  Summarize(result);
  return result;
}

}  // namespace idrisk
