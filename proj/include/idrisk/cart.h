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

// Sequential CART synthesis for partially synthetic data.
//
// Variables in the visit sequence are replaced one at a time. Each variable
// gets a classification or regression tree fit on the original data with
// every other variable as a predictor. A record is routed through the tree
// using its current values (already-synthesized predictors take their
// synthetic values) and receives a value drawn uniformly from the original
// responses of the training rows in its leaf.

#ifndef IDRISK_CART_H_
#define IDRISK_CART_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "idrisk/dataset.h"

namespace idrisk {

struct SynthesisPlan {
  std::vector<std::string> visit_sequence;
  int m = 1;
  std::size_t min_bucket = 5;
  std::size_t min_split = 10;
  // Minimum impurity decrease, relative to the root impurity, for a split.
  double complexity_threshold = 1e-8;
  std::size_t max_depth = 30;
  std::uint64_t seed = 0;
};

struct CartNode {
  // Index into the schema of the split variable; -1 for leaves.
  int split_var = -1;
  // Continuous split: value <= threshold goes left.
  double threshold = 0;
  // Categorical split: goes_left[level] for levels seen in the node.
  std::vector<std::uint8_t> goes_left;
  std::vector<std::uint8_t> level_seen;
  // Side taken by categorical levels absent from the node's training rows.
  bool unseen_left = true;
  int left = -1;
  int right = -1;
  // Impurity decrease achieved by this split.
  double improvement = 0;
  std::size_t depth = 0;
  // Leaf only: training row indices.
  std::vector<std::uint32_t> donors;

  bool is_leaf() const { return split_var < 0; }
};

class CartTree {
 public:
  CartTree(std::size_t response, std::vector<CartNode> nodes)
      : response_(response), nodes_(std::move(nodes)) {}

  std::size_t response() const { return response_; }
  const std::vector<CartNode>& nodes() const { return nodes_; }
  const CartNode& root() const { return nodes_.front(); }

  // Leaf reached by a record whose cell for variable c is value(c).
  template <typename ValueFn>
  const CartNode& Route(ValueFn&& value) const {
    const CartNode* node = &nodes_.front();
    while (!node->is_leaf()) {
      const double v = value(static_cast<std::size_t>(node->split_var));
      bool left;
      if (node->goes_left.empty()) {
        left = v <= node->threshold;
      } else {
        const auto level = static_cast<std::size_t>(v);
        left = level < node->level_seen.size() && node->level_seen[level]
                   ? node->goes_left[level] != 0
                   : node->unseen_left;
      }
      node = &nodes_[static_cast<std::size_t>(left ? node->left : node->right)];
    }
    return *node;
  }

  std::vector<const CartNode*> Leaves() const;

 private:
  std::size_t response_;
  std::vector<CartNode> nodes_;
};

// Greedy recursive partitioning. Continuous responses use squared-error
// reduction; categorical responses use Gini impurity. A node is not split when
// it has fewer than min_split rows, is pure, is at max_depth, or its best split
// improves impurity by less than complexity_threshold times the root impurity.
// Both children must hold at least min_bucket rows. Categorical predictors with
// up to 10 levels present are split by exhaustive subset search; larger ones
// use the response-mean ordering.
CartTree FitTree(const Dataset& data, const std::string& response,
                 const std::vector<std::string>& predictors,
                 const SynthesisPlan& plan);

// m partially synthetic replicates. Replicate k draws from its own RNG stream
// derived from (plan.seed, k), so output does not depend on thread count.
std::vector<Dataset> Synthesize(const Dataset& orig, const SynthesisPlan& plan,
                                unsigned threads = 0);

}  // namespace idrisk

#endif  // IDRISK_CART_H_
