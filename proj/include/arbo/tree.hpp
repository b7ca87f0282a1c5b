// Copyright 2026 The Arbo Authors.
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

// Node-based binary decision trees and the recursive traversal that every
// other evaluation backend is checked against.
//
// Conventions shared by the whole library:
//  * a test that holds (margin <= 0) sends the sample to the LEFT child;
//  * margin > 0 marks a "false node" and sends the sample RIGHT;
//  * leaves are indexed 0..L-1 from left to right.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace arbo {

enum class FeatureType { kNumeric, kCategorical };

struct FeatureSpec {
  std::string name;
  FeatureType type = FeatureType::kNumeric;
  // Category names; the id of a category is its position here.
  std::vector<std::string> vocabulary;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

// Feature vectors are plain arrays aligned with the schema. Categorical
// features carry their category id as an integral double.
using FeatureVector = std::vector<double>;

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  // n numeric features named f1..fn.
  static FeatureSchema numeric(std::size_t n);

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t j) const { return features_[j]; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  bool is_categorical(std::size_t j) const { return features_[j].type == FeatureType::kCategorical; }

  // Throws InputError if x has the wrong length, a numeric entry is not finite, or a
  // categorical entry is not a valid category id.
  void check(std::span<const double> x) const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<FeatureSpec> features_;
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

class DecisionTree;

// "x[feature] <= threshold?"
struct AxisTest {
  int feature = 0;
  double threshold = 0.0;
  friend bool operator==(const AxisTest&, const AxisTest&) = default;
};

// "x[feature] in categories?" with categories sorted and unique.
struct CategoricalTest {
  int feature = 0;
  std::vector<int> categories;
  friend bool operator==(const CategoricalTest&, const CategoricalTest&) = default;
};

// "w.x - offset <= 0?" Weights on categorical features must be zero.
struct ObliqueTest {
  std::vector<double> weights;
  double offset = 0.0;
  friend bool operator==(const ObliqueTest&, const ObliqueTest&) = default;
};

// "inner(x) <= threshold?" where inner is another regression tree over the
// same schema. This is how stacked trees are expressed.
struct ComposedTest {
  std::shared_ptr<const DecisionTree> inner;
  double threshold = 0.0;
  friend bool operator==(const ComposedTest& a, const ComposedTest& b);
};

using TestFunction = std::variant<AxisTest, CategoricalTest, ObliqueTest, ComposedTest>;

struct ConstantLeaf {
  // Class id (integral) in classification trees.
  double value = 0.0;
  friend bool operator==(const ConstantLeaf&, const ConstantLeaf&) = default;
};

// w.x + offset over the numeric features. Regression only.
struct LinearLeaf {
  std::vector<double> weights;
  double offset = 0.0;
  friend bool operator==(const LinearLeaf&, const LinearLeaf&) = default;
};

using LeafModel = std::variant<ConstantLeaf, LinearLeaf>;

enum class Task { kRegression, kClassification };

// Signed margin of a test. Positive means the test fails (false node).
double test_margin(const TestFunction& test, std::span<const double> x);

double leaf_value(const LeafModel& leaf, std::span<const double> x);

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct Node {
  bool is_leaf = true;
  TestFunction test;  // internal only
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  LeafModel leaf;  // leaf only
};

struct PathStep {
  NodeId node;
  bool passed;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct LeafOutcome {
  int leaf_index = 0;  // left-to-right position
  NodeId leaf_node = kNoNode;
  double value = 0.0;
  std::vector<PathStep> path;
};

// Immutable full binary tree. Build one with DecisionTree::Builder.
class DecisionTree {
 public:
  class Builder {
   public:
    Builder(SchemaPtr schema, Task task);

    NodeId add_leaf(LeafModel leaf);
    NodeId add_internal(TestFunction test, NodeId left, NodeId right);

    // Validates that every node is reachable from root exactly once, that
    // tests reference valid features, and that leaves fit the task.
    DecisionTree build(NodeId root) &&;

   private:
    SchemaPtr schema_;
    Task task_;
    std::vector<Node> nodes_;
  };

  const FeatureSchema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  Task task() const { return task_; }

  NodeId root() const { return root_; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t n_internal() const { return nodes_.size() / 2; }
  std::size_t n_leaves() const { return nodes_.size() - nodes_.size() / 2; }

  // Leaf node ids in left-to-right order.
  const std::vector<NodeId>& leaves() const { return leaf_order_; }
  int leaf_index(NodeId leaf) const { return leaf_rank_[static_cast<std::size_t>(leaf)]; }

  std::vector<NodeId> internal_bfs() const;
  std::vector<NodeId> internal_preorder() const;

 private:
  DecisionTree() = default;

  SchemaPtr schema_;
  Task task_ = Task::kRegression;
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
  std::vector<NodeId> leaf_order_;
  std::vector<int> leaf_rank_;
};

using TreePtr = std::shared_ptr<const DecisionTree>;

// Standard traversal: TRUE -> left, FALSE -> right. Throws InputError if x
// does not match the tree's schema.
LeafOutcome evaluate_classic(const DecisionTree& tree, std::span<const double> x);

// Same traversal without schema checks or path recording.
int classic_leaf(const DecisionTree& tree, std::span<const double> x);

// Flat node array for fast classic traversal of trees whose tests are all
// axis-aligned. Children below zero encode ~leaf_index.
class CompactTree {
 public:
  // nullopt unless every test is an AxisTest and the tree has a test.
  static std::optional<CompactTree> from(const DecisionTree& tree);

  int leaf(std::span<const double> x) const {
    int id = 0;
    do {
      const Slot& s = slots_[static_cast<std::size_t>(id)];
      id = s.child[x[static_cast<std::size_t>(s.feature)] > s.threshold];
    } while (id >= 0);
    return ~id;
  }

 private:
  struct Slot {
    double threshold;
    int feature;
    int child[2];  // left, right
  };
  std::vector<Slot> slots_;
};

// Number of node levels on the longest root-to-leaf path.
int tree_depth(const DecisionTree& tree);

// Node levels from the root down to every leaf, in leaf order.
std::vector<int> leaf_depths(const DecisionTree& tree);

// Structural equality, including tests and leaf models.
bool trees_equal(const DecisionTree& a, const DecisionTree& b);

}  // namespace arbo
