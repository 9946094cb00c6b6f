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

#include "idrisk/cart.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "idrisk/parallel.h"
#include "idrisk/rng.h"

namespace idrisk {

std::vector<const CartNode*> CartTree::Leaves() const {
  std::vector<const CartNode*> leaves;
  for (const auto& node : nodes_) {
    if (node.is_leaf()) leaves.push_back(&node);
  }
  return leaves;
}

namespace {

constexpr std::size_t kMaxExhaustiveLevels = 10;

// Running impurity statistics for a set of rows. Continuous responses track
// sum and sum of squares (of the centered response); categorical responses
// track class counts and the sum of squared counts.
class NodeStats {
 public:
  explicit NodeStats(std::size_t num_classes) : counts_(num_classes, 0.0) {}

  void Add(double y) { Update(y, 1.0); }
  void Remove(double y) { Update(y, -1.0); }
  void Merge(const NodeStats& other) {
    n_ += other.n_;
    sum_ += other.sum_;
    sumsq_ += other.sumsq_;
    if (!counts_.empty()) {
      sq_counts_ = 0;
      for (std::size_t k = 0; k < counts_.size(); ++k) {
        counts_[k] += other.counts_[k];
        sq_counts_ += counts_[k] * counts_[k];
      }
    }
  }

  double count() const { return n_; }
  double mean() const { return n_ > 0 ? sum_ / n_ : 0.0; }
  double share(std::size_t k) const { return n_ > 0 ? counts_[k] / n_ : 0.0; }

  // Squared error about the mean, or n times the Gini index.
  double Impurity() const {
    if (n_ <= 0) return 0.0;
    if (counts_.empty()) return std::max(0.0, sumsq_ - sum_ * sum_ / n_);
    return std::max(0.0, n_ - sq_counts_ / n_);
  }

 private:
  void Update(double y, double w) {
    n_ += w;
    if (counts_.empty()) {
      sum_ += w * y;
      sumsq_ += w * y * y;
      return;
    }
    double& c = counts_[static_cast<std::size_t>(y)];
    sq_counts_ -= c * c;
    c += w;
    sq_counts_ += c * c;
  }

  double n_ = 0;
  double sum_ = 0;
  double sumsq_ = 0;
  std::vector<double> counts_;
  double sq_counts_ = 0;
};

struct SplitCandidate {
  int var = -1;
  double gain = 0;
  double threshold = 0;
  std::vector<std::uint8_t> goes_left;
  std::vector<std::uint8_t> level_seen;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::size_t response,
              std::vector<std::size_t> predictors, const SynthesisPlan& plan)
      : data_(data),
        response_(response),
        predictors_(std::move(predictors)),
        plan_(plan),
        num_classes_(data.schema()[response].is_categorical()
                         ? data.schema()[response].levels.size()
                         : 0) {
    const auto y = data.column(response);
    y_.assign(y.begin(), y.end());
    if (num_classes_ == 0 && !y_.empty()) {
      // Centering keeps the sum-of-squares updates well conditioned.
      const double mean =
          std::accumulate(y_.begin(), y_.end(), 0.0) / static_cast<double>(y_.size());
      for (double& v : y_) v -= mean;
    }
  }

  std::vector<CartNode> Build() {
    std::vector<std::uint32_t> rows(data_.num_rows());
    std::iota(rows.begin(), rows.end(), 0u);
    root_impurity_ = StatsOf(rows).Impurity();
    Grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  NodeStats StatsOf(std::span<const std::uint32_t> rows) const {
    NodeStats stats(num_classes_);
    for (auto r : rows) stats.Add(y_[r]);
    return stats;
  }

  int Grow(std::vector<std::uint32_t> rows, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].depth = depth;

    const NodeStats stats = StatsOf(rows);
    const double impurity = stats.Impurity();
    SplitCandidate best;
    if (rows.size() >= plan_.min_split && impurity > 0 &&
        depth < plan_.max_depth && root_impurity_ > 0) {
      best = BestSplit(rows, stats);
    }
    if (best.var < 0 || best.gain <= 0 ||
        best.gain < plan_.complexity_threshold * root_impurity_) {
      nodes_[id].donors = std::move(rows);
      return id;
    }

    std::vector<std::uint32_t> left_rows;
    std::vector<std::uint32_t> right_rows;
    const auto x = data_.column(static_cast<std::size_t>(best.var));
    for (auto r : rows) {
      bool left;
      if (best.goes_left.empty()) {
        left = x[r] <= best.threshold;
      } else {
        left = best.goes_left[static_cast<std::size_t>(x[r])] != 0;
      }
      (left ? left_rows : right_rows).push_back(r);
    }
    {
      CartNode& node = nodes_[id];
      node.split_var = best.var;
      node.threshold = best.threshold;
      node.improvement = best.gain;
      node.unseen_left = left_rows.size() >= right_rows.size();
      node.goes_left = std::move(best.goes_left);
      node.level_seen = std::move(best.level_seen);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int left = Grow(std::move(left_rows), depth + 1);
    const int right = Grow(std::move(right_rows), depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  SplitCandidate BestSplit(std::span<const std::uint32_t> rows,
                           const NodeStats& total) const {
    SplitCandidate best;
    for (std::size_t var : predictors_) {
      if (data_.schema()[var].is_categorical()) {
        CategoricalSplit(rows, total, var, best);
      } else {
        ContinuousSplit(rows, total, var, best);
      }
    }
    return best;
  }

  bool Admissible(double left, double right) const {
    const auto min_bucket = static_cast<double>(plan_.min_bucket);
    return left >= min_bucket && right >= min_bucket;
  }

  void ContinuousSplit(std::span<const std::uint32_t> rows,
                       const NodeStats& total, std::size_t var,
                       SplitCandidate& best) const {
    const auto x = data_.column(var);
    std::vector<std::uint32_t> order(rows.begin(), rows.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return x[a] < x[b];
                     });
    const double parent = total.Impurity();
    NodeStats left(num_classes_);
    NodeStats right = total;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      left.Add(y_[order[i]]);
      right.Remove(y_[order[i]]);
      const double a = x[order[i]];
      const double b = x[order[i + 1]];
      if (!(a < b) || !Admissible(left.count(), right.count())) continue;
      const double gain = parent - left.Impurity() - right.Impurity();
      if (gain > best.gain) {
        double mid = a + (b - a) / 2;
        if (!(mid < b)) mid = a;
        best.var = static_cast<int>(var);
        best.gain = gain;
        best.threshold = mid;
        best.goes_left.clear();
        best.level_seen.clear();
      }
    }
  }

  void CategoricalSplit(std::span<const std::uint32_t> rows,
                        const NodeStats& total, std::size_t var,
                        SplitCandidate& best) const {
    const auto x = data_.column(var);
    const std::size_t num_levels = data_.schema()[var].levels.size();
    std::vector<NodeStats> per_level(num_levels, NodeStats(num_classes_));
    for (auto r : rows) per_level[static_cast<std::size_t>(x[r])].Add(y_[r]);
    std::vector<std::size_t> present;
    for (std::size_t l = 0; l < num_levels; ++l) {
      if (per_level[l].count() > 0) present.push_back(l);
    }
    const std::size_t k = present.size();
    if (k < 2) return;
    const double parent = total.Impurity();

    auto consider = [&](const std::vector<std::uint8_t>& in_left) {
      NodeStats left(num_classes_);
      NodeStats right(num_classes_);
      for (std::size_t q = 0; q < k; ++q) {
        (in_left[q] ? left : right).Merge(per_level[present[q]]);
      }
      if (!Admissible(left.count(), right.count())) return;
      const double gain = parent - left.Impurity() - right.Impurity();
      if (gain > best.gain) {
        best.var = static_cast<int>(var);
        best.gain = gain;
        best.threshold = 0;
        best.goes_left.assign(num_levels, 0);
        best.level_seen.assign(num_levels, 0);
        for (std::size_t q = 0; q < k; ++q) {
          best.goes_left[present[q]] = in_left[q];
          best.level_seen[present[q]] = 1;
        }
      }
    };

    std::vector<std::uint8_t> in_left(k, 0);
    if (k <= kMaxExhaustiveLevels) {
      // The first present level always goes left; enumerate the rest.
      const std::uint32_t combos = 1u << (k - 1);
      for (std::uint32_t mask = 0; mask + 1 < combos; ++mask) {
        in_left[0] = 1;
        for (std::size_t q = 1; q < k; ++q) {
          in_left[q] = (mask >> (q - 1)) & 1u;
        }
        consider(in_left);
      }
      return;
    }

    // Order levels by mean response (or share of the node's modal class) and
    // split the ordering.
    std::vector<double> score(k);
    std::size_t modal = 0;
    if (num_classes_ > 0) {
      for (std::size_t c = 1; c < num_classes_; ++c) {
        if (total.share(c) > total.share(modal)) modal = c;
      }
    }
    for (std::size_t q = 0; q < k; ++q) {
      score[q] = num_classes_ > 0 ? per_level[present[q]].share(modal)
                                  : per_level[present[q]].mean();
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return score[a] < score[b];
                     });
    std::fill(in_left.begin(), in_left.end(), 0);
    for (std::size_t cut = 0; cut + 1 < k; ++cut) {
      in_left[order[cut]] = 1;
      consider(in_left);
    }
  }

  const Dataset& data_;
  std::size_t response_;
  std::vector<std::size_t> predictors_;
  const SynthesisPlan& plan_;
  std::size_t num_classes_;
  std::vector<double> y_;
  double root_impurity_ = 0;
  std::vector<CartNode> nodes_;
};

void ValidatePlan(const Schema& schema, const SynthesisPlan& plan) {
  if (plan.m < 1) throw DataError("synthesis plan: m must be at least 1");
  if (plan.min_bucket < 1) {
    throw DataError("synthesis plan: min_bucket must be at least 1");
  }
  std::set<std::string> seen;
  for (const auto& name : plan.visit_sequence) {
    if (!schema.Contains(name)) {
      throw DataError("synthesis plan: visit_sequence variable '" + name +
                      "' is not in the data");
    }
    if (!seen.insert(name).second) {
      throw DataError("synthesis plan: visit_sequence repeats '" + name + "'");
    }
  }
}

}  // namespace

CartTree FitTree(const Dataset& data, const std::string& response,
                 const std::vector<std::string>& predictors,
                 const SynthesisPlan& plan) {
  const std::size_t resp = data.schema().IndexOf(response);
  std::vector<std::size_t> pred;
  for (const auto& name : predictors) {
    const std::size_t idx = data.schema().IndexOf(name);
    if (idx == resp) {
      throw DataError("response '" + response + "' cannot be a predictor");
    }
    pred.push_back(idx);
  }
  TreeBuilder builder(data, resp, std::move(pred), plan);
  return CartTree(resp, builder.Build());
}

std::vector<Dataset> Synthesize(const Dataset& orig, const SynthesisPlan& plan,
                                unsigned threads) {
  const Schema& schema = orig.schema();
  ValidatePlan(schema, plan);

  // Trees are fit on the original data only, so they are shared by every
  // replicate; only the donor draws differ.
  std::vector<CartTree> trees;
  trees.reserve(plan.visit_sequence.size());
  for (const auto& name : plan.visit_sequence) {
    std::vector<std::string> predictors;
    for (const auto& v : schema.variables()) {
      if (v.name != name) predictors.push_back(v.name);
    }
    trees.push_back(FitTree(orig, name, predictors, plan));
  }

  const std::size_t m = static_cast<std::size_t>(plan.m);
  const std::size_t n = orig.num_rows();
  std::vector<Dataset> out(m);
  ParallelFor(m, threads, [&](std::size_t k) {
    Rng rng = Rng::Stream(plan.seed, {k});
    std::vector<std::vector<double>> cols(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      auto col = orig.column(c);
      cols[c].assign(col.begin(), col.end());
    }
    for (const CartTree& tree : trees) {
      const auto donor_values = orig.column(tree.response());
      std::vector<double> fresh(n);
      for (std::size_t i = 0; i < n; ++i) {
        const CartNode& leaf =
            tree.Route([&](std::size_t c) { return cols[c][i]; });
        const auto pick = rng.UniformIndex(leaf.donors.size());
        fresh[i] = donor_values[leaf.donors[pick]];
      }
      cols[tree.response()] = std::move(fresh);
    }
    out[k] = Dataset(schema, std::move(cols));
  });
  return out;
}

}  // namespace idrisk
