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


// Small hand-built trees shared by the tests.

#pragma once

#include <string>

#include "arbo/tree.hpp"

namespace arbo::fixture {

inline std::string path(const std::string& name) { return std::string(ARBO_FIXTURES_DIR) + "/" + name; }

inline SchemaPtr numeric_schema(std::size_t n) { return std::make_shared<const FeatureSchema>(FeatureSchema::numeric(n)); }

// The worked example tree: four numeric features, leaves v1..v6 carrying
// the values 1..6 (leaf index i holds i + 1).
inline DecisionTree fig1_tree() {
  DecisionTree::Builder b(numeric_schema(4), Task::kRegression);
  const NodeId v1 = b.add_leaf(ConstantLeaf{1});
  const NodeId v2 = b.add_leaf(ConstantLeaf{2});
  const NodeId v3 = b.add_leaf(ConstantLeaf{3});
  const NodeId v4 = b.add_leaf(ConstantLeaf{4});
  const NodeId v5 = b.add_leaf(ConstantLeaf{5});
  const NodeId v6 = b.add_leaf(ConstantLeaf{6});
  const NodeId n5 = b.add_internal(AxisTest{3, 5.0}, v2, v3);
  const NodeId n4 = b.add_internal(AxisTest{1, 2.0}, v1, n5);
  const NodeId n2 = b.add_internal(AxisTest{1, 4.0}, n4, v4);
  const NodeId n3 = b.add_internal(AxisTest{2, 3.0}, v5, v6);
  const NodeId root = b.add_internal(AxisTest{0, 1.0}, n2, n3);
  return std::move(b).build(root);
}

// x_1 <= threshold ? low : high
inline DecisionTree one_split_tree(double low = 3.0, double high = 7.0, double threshold = 0.0, std::size_t n = 1) {
  DecisionTree::Builder b(numeric_schema(n), Task::kRegression);
  const NodeId l = b.add_leaf(ConstantLeaf{low});
  const NodeId r = b.add_leaf(ConstantLeaf{high});
  return std::move(b).build(b.add_internal(AxisTest{0, threshold}, l, r));
}

inline DecisionTree single_leaf_tree(double value = 2.5, std::size_t n = 2) {
  DecisionTree::Builder b(numeric_schema(n), Task::kRegression);
  const NodeId l = b.add_leaf(ConstantLeaf{value});
  return std::move(b).build(l);
}

}  // namespace arbo::fixture
