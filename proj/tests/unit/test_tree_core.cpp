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


#include <doctest.h>

#include <cmath>

#include "arbo/error.hpp"
#include "arbo/random.hpp"
#include "arbo/tree.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace arbo;

TEST_CASE("classic traversal on the worked example") {
  const DecisionTree t = fixture::fig1_tree();
  CHECK(t.n_internal() == 5);
  CHECK(t.n_leaves() == 6);

  const LeafOutcome a = evaluate_classic(t, std::vector<double>{2, 1, 2, 2});
  CHECK(a.leaf_index == 4);  // v5
  CHECK(a.value == 5.0);
  REQUIRE(a.path.size() == 2);
  CHECK_FALSE(a.path[0].passed);  // x1 = 2 > 1
  CHECK(a.path[1].passed);        // x3 = 2 <= 3

  // No false node at all: leftmost leaf.
  const LeafOutcome b = evaluate_classic(t, std::vector<double>{1, 1, 2, 3});
  CHECK(b.leaf_index == 0);
  CHECK(b.value == 1.0);
  CHECK(b.path.size() == 3);
}

TEST_CASE("single-leaf tree always lands on its leaf") {
  const DecisionTree t = fixture::single_leaf_tree(2.5, 2);
  CHECK(t.n_internal() == 0);
  const LeafOutcome o = evaluate_classic(t, std::vector<double>{-4, 9});
  CHECK(o.leaf_index == 0);
  CHECK(o.value == 2.5);
  CHECK(o.path.empty());
  CHECK(tree_depth(t) == 1);
}

TEST_CASE("schema mismatches are input errors") {
  const DecisionTree t = fixture::fig1_tree();
  CHECK_THROWS_AS(evaluate_classic(t, std::vector<double>{1, 2, 3}), InputError);
  CHECK_THROWS_AS(evaluate_classic(t, std::vector<double>{1, 2, 3, NAN}), InputError);

  auto schema = std::make_shared<const FeatureSchema>(
      std::vector<FeatureSpec>{{"x", FeatureType::kNumeric, {}}, {"color", FeatureType::kCategorical, {"red", "green"}}});
  CHECK_NOTHROW(schema->check(std::vector<double>{0.5, 1}));
  CHECK_THROWS_AS(schema->check(std::vector<double>{0.5, 2}), InputError);
  CHECK_THROWS_AS(schema->check(std::vector<double>{0.5, 0.5}), InputError);
  CHECK_THROWS_AS(FeatureSchema({{"a", FeatureType::kNumeric, {}}, {"a", FeatureType::kNumeric, {}}}), InputError);
}

TEST_CASE("test margins follow the false-node sign convention") {
  const std::vector<double> x{2, 1, 2, 2};
  CHECK(test_margin(AxisTest{1, 4.0}, x) == -3.0);
  // On the threshold the test holds.
  CHECK(test_margin(AxisTest{0, 2.0}, x) == 0.0);
  CHECK(test_margin(ObliqueTest{{1, 1, 0, 0}, 3.0}, x) == 0.0);
  CHECK(test_margin(CategoricalTest{3, {2}}, x) == -1.0);
  CHECK(test_margin(CategoricalTest{3, {0, 1}}, x) == 1.0);

  auto inner = std::make_shared<const DecisionTree>(fixture::one_split_tree(3, 7, 0.0, 4));
  CHECK(test_margin(ComposedTest{inner, 5.0}, x) == 2.0);  // inner gives 7
}

TEST_CASE("builder rejects malformed trees") {
  auto schema = fixture::numeric_schema(2);
  {
    DecisionTree::Builder b(schema, Task::kRegression);
    const NodeId l = b.add_leaf(ConstantLeaf{1});
    const NodeId root = b.add_internal(AxisTest{0, 0}, l, l);
    CHECK_THROWS_AS(std::move(b).build(root), InputError);
  }
  {
    DecisionTree::Builder b(schema, Task::kRegression);
    const NodeId l = b.add_leaf(ConstantLeaf{1});
    const NodeId r = b.add_leaf(ConstantLeaf{2});
    b.add_leaf(ConstantLeaf{3});  // unreachable
    const NodeId root = b.add_internal(AxisTest{0, 0}, l, r);
    CHECK_THROWS_AS(std::move(b).build(root), InputError);
  }
  {
    DecisionTree::Builder b(schema, Task::kRegression);
    const NodeId l = b.add_leaf(ConstantLeaf{1});
    const NodeId r = b.add_leaf(ConstantLeaf{2});
    const NodeId root = b.add_internal(AxisTest{5, 0}, l, r);  // no feature 5
    CHECK_THROWS_AS(std::move(b).build(root), InputError);
  }
  {
    DecisionTree::Builder b(schema, Task::kClassification);
    const NodeId l = b.add_leaf(LinearLeaf{{1, 1}, 0});
    CHECK_THROWS_AS(std::move(b).build(l), InputError);
  }
}

TEST_CASE("depth") {
  CHECK(tree_depth(fixture::fig1_tree()) == 5);
  CHECK(leaf_depths(fixture::fig1_tree()) == std::vector<int>{4, 5, 5, 3, 3, 3});

  // Left chain with three internal nodes.
  DecisionTree::Builder b(fixture::numeric_schema(1), Task::kRegression);
  NodeId n = b.add_leaf(ConstantLeaf{0});
  for (int k = 0; k < 3; ++k) n = b.add_internal(AxisTest{0, double(k)}, n, b.add_leaf(ConstantLeaf{double(k + 1)}));
  CHECK(tree_depth(std::move(b).build(n)) == 4);

  // ceil(log2 L) + 1 <= depth <= n_internal + 1 on random trees.
  Rng rng(11);
  const auto schema = fixture::numeric_schema(3);
  for (int i = 0; i < 300; ++i) {
    const std::size_t leaves = 1 + rng() % 40;
    const DecisionTree t = generate_random_tree(rng, leaves, schema);
    const int d = tree_depth(t);
    CHECK(d >= static_cast<int>(std::ceil(std::log2(double(leaves)))) + 1);
    CHECK(d <= static_cast<int>(t.n_internal()) + 1);
  }
}

TEST_CASE("random trees") {
  CHECK(generate_random_tree(7, 1, 4).n_internal() == 0);
  const DecisionTree a = generate_random_tree(7, 6, 4);
  CHECK(a.n_internal() == 5);
  CHECK(a.n_leaves() == 6);
  CHECK(trees_equal(a, generate_random_tree(7, 6, 4)));
  CHECK_FALSE(trees_equal(a, generate_random_tree(8, 6, 4)));
  CHECK_THROWS_AS(generate_random_tree(7, 0, 4), InputError);

  RandomTreeParams p;
  p.threshold_min = 2.0;
  p.threshold_max = 3.0;
  const DecisionTree t = generate_random_tree(3, 30, 2, p);
  for (std::size_t id = 0; id < t.node_count(); ++id) {
    const Node& n = t.node(static_cast<NodeId>(id));
    if (n.is_leaf) continue;
    const double th = std::get<AxisTest>(n.test).threshold;
    CHECK(th >= 2.0);
    CHECK(th <= 3.0);
  }
}

TEST_CASE("traversal paths are consistent with the tests they record") {
  Rng rng(5);
  RandomTreeParams p;
  p.oblique_fraction = 0.3;
  p.categorical_fraction = 0.3;
  p.categorical_features = 2;
  p.linear_leaf_fraction = 0.2;
  const SchemaPtr schema = make_schema(6, 2, 4);
  for (int i = 0; i < 200; ++i) {
    const DecisionTree t = generate_random_tree(rng, 1 + rng() % 30, schema, p);
    CHECK(t.n_leaves() == t.n_internal() + 1);
    for (int k = 0; k < 10; ++k) {
      const FeatureVector x = random_input(rng, t, RandomInputParams{-1.5, 1.5, 0.2});
      const LeafOutcome o = evaluate_classic(t, x);
      CHECK(o.leaf_index == oracle::walk(t, x));
      CHECK(o.leaf_index == classic_leaf(t, x));
      for (const PathStep& s : o.path) CHECK(s.passed == (test_margin(t.node(s.node).test, x) <= 0.0));
      if (!o.path.empty()) CHECK(o.path.front().node == t.root());
    }
  }
}
