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

#include "arbo/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "arbo/error.hpp"

namespace arbo {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_category_id(double v, std::size_t vocab) {
  return v >= 0.0 && v < static_cast<double>(vocab) && std::floor(v) == v;
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  for (std::size_t j = 0; j < features_.size(); ++j) {
    const auto& f = features_[j];
    if (f.name.empty()) throw InputError("feature " + std::to_string(j) + " has an empty name");
    for (std::size_t k = 0; k < j; ++k) {
      if (features_[k].name == f.name) throw InputError("duplicate feature name '" + f.name + "'");
    }
    if (f.type == FeatureType::kCategorical && f.vocabulary.empty()) {
      throw InputError("categorical feature '" + f.name + "' has an empty vocabulary");
    }
  }
}

FeatureSchema FeatureSchema::numeric(std::size_t n) {
  std::vector<FeatureSpec> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j].name = "f" + std::to_string(j + 1);
  return FeatureSchema(std::move(f));
}

void FeatureSchema::check(std::span<const double> x) const {
  if (x.size() != features_.size()) {
    throw InputError("feature vector has " + std::to_string(x.size()) +
                     " entries, schema declares " + std::to_string(features_.size()));
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& f = features_[j];
    if (f.type == FeatureType::kCategorical) {
      if (!is_category_id(x[j], f.vocabulary.size())) {
        throw InputError("feature '" + f.name + "': category id " + std::to_string(x[j]) +
                         " outside vocabulary of size " + std::to_string(f.vocabulary.size()));
      }
    } else if (!std::isfinite(x[j])) {
      throw InputError("feature '" + f.name + "' is not a finite number");
    }
  }
}

bool operator==(const ComposedTest& a, const ComposedTest& b) {
  if (a.threshold != b.threshold) return false;
  if (a.inner == b.inner) return true;
  if (!a.inner || !b.inner) return false;
  return trees_equal(*a.inner, *b.inner);
}

double test_margin(const TestFunction& test, std::span<const double> x) {
  return std::visit(
      Overloaded{
          [&](const AxisTest& t) { return x[static_cast<std::size_t>(t.feature)] - t.threshold; },
          [&](const CategoricalTest& t) {
            const int id = static_cast<int>(x[static_cast<std::size_t>(t.feature)]);
            return std::binary_search(t.categories.begin(), t.categories.end(), id) ? -1.0 : 1.0;
          },
          [&](const ObliqueTest& t) {
            double s = 0.0;
            for (std::size_t k = 0; k < t.weights.size(); ++k) s += t.weights[k] * x[k];
            return s - t.offset;
          },
          [&](const ComposedTest& t) {
            const DecisionTree& inner = *t.inner;
            const NodeId leaf = inner.leaves()[static_cast<std::size_t>(classic_leaf(inner, x))];
            return leaf_value(inner.node(leaf).leaf, x) - t.threshold;
          },
      },
      test);
}

double leaf_value(const LeafModel& leaf, std::span<const double> x) {
  return std::visit(Overloaded{
                        [](const ConstantLeaf& c) { return c.value; },
                        [&](const LinearLeaf& l) {
                          double s = 0.0;
                          for (std::size_t k = 0; k < l.weights.size(); ++k) s += l.weights[k] * x[k];
                          return s + l.offset;
                        },
                    },
                    leaf);
}

DecisionTree::Builder::Builder(SchemaPtr schema, Task task) : schema_(std::move(schema)), task_(task) {
  if (!schema_) throw InputError("tree builder needs a feature schema");
}

NodeId DecisionTree::Builder::add_leaf(LeafModel leaf) {
  Node n;
  n.is_leaf = true;
  n.leaf = std::move(leaf);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId DecisionTree::Builder::add_internal(TestFunction test, NodeId left, NodeId right) {
  Node n;
  n.is_leaf = false;
  n.test = std::move(test);
  n.left = left;
  n.right = right;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

namespace {

void check_test(const TestFunction& test, const FeatureSchema& schema) {
  const auto n = schema.size();
  auto check_feature = [&](int j) {
    if (j < 0 || static_cast<std::size_t>(j) >= n) {
      throw InputError("test references unknown feature id " + std::to_string(j));
    }
  };
  std::visit(Overloaded{
                 [&](const AxisTest& t) {
                   check_feature(t.feature);
                   if (schema.is_categorical(static_cast<std::size_t>(t.feature))) {
                     throw InputError("axis test on categorical feature '" +
                                      schema[static_cast<std::size_t>(t.feature)].name + "'");
                   }
                   if (std::isnan(t.threshold)) throw InputError("axis test threshold is NaN");
                 },
                 [&](const CategoricalTest& t) {
                   check_feature(t.feature);
                   const auto& f = schema[static_cast<std::size_t>(t.feature)];
                   if (f.type != FeatureType::kCategorical) {
                     throw InputError("categorical test on numeric feature '" + f.name + "'");
                   }
                   if (!std::is_sorted(t.categories.begin(), t.categories.end()) ||
                       std::adjacent_find(t.categories.begin(), t.categories.end()) != t.categories.end()) {
                     throw InputError("categorical test categories must be sorted and unique");
                   }
                   for (int c : t.categories) {
                     if (c < 0 || static_cast<std::size_t>(c) >= f.vocabulary.size()) {
                       throw InputError("category id " + std::to_string(c) + " outside vocabulary of '" +
                                        f.name + "'");
                     }
                   }
                 },
                 [&](const ObliqueTest& t) {
                   if (t.weights.size() != n) {
                     throw InputError("oblique test has " + std::to_string(t.weights.size()) +
                                      " weights for " + std::to_string(n) + " features");
                   }
                   for (std::size_t k = 0; k < n; ++k) {
                     if (schema.is_categorical(k) && t.weights[k] != 0.0) {
                       throw InputError("oblique test puts weight on categorical feature '" + schema[k].name + "'");
                     }
                   }
                 },
                 [&](const ComposedTest& t) {
                   if (!t.inner) throw InputError("composed test without inner model");
                   if (t.inner->task() != Task::kRegression) {
                     throw InputError("composed test needs a regression inner model");
                   }
                   if (!(t.inner->schema() == schema)) {
                     throw InputError("composed test inner model uses a different schema");
                   }
                 },
             },
             test);
}

void check_leaf(const LeafModel& leaf, const FeatureSchema& schema, Task task) {
  std::visit(Overloaded{
                 [&](const ConstantLeaf& c) {
                   if (task == Task::kClassification && (c.value < 0 || std::floor(c.value) != c.value)) {
                     throw InputError("classification leaf value must be a class id");
                   }
                 },
                 [&](const LinearLeaf& l) {
                   if (task != Task::kRegression) throw InputError("linear leaves require regression mode");
                   if (l.weights.size() != schema.size()) throw InputError("linear leaf weight count mismatch");
                   for (std::size_t k = 0; k < schema.size(); ++k) {
                     if (schema.is_categorical(k) && l.weights[k] != 0.0) {
                       throw InputError("linear leaf puts weight on categorical feature");
                     }
                   }
                 },
             },
             leaf);
}

}  // namespace

DecisionTree DecisionTree::Builder::build(NodeId root) && {
  const auto count = nodes_.size();
  if (root < 0 || static_cast<std::size_t>(root) >= count) throw InputError("root id out of range");

  std::vector<int> parents(count, 0);
  for (const auto& n : nodes_) {
    if (n.is_leaf) continue;
    for (NodeId c : {n.left, n.right}) {
      if (c < 0 || static_cast<std::size_t>(c) >= count) throw InputError("child id out of range");
      ++parents[static_cast<std::size_t>(c)];
    }
  }
  if (parents[static_cast<std::size_t>(root)] != 0) throw InputError("root has a parent");

  DecisionTree tree;
  tree.leaf_rank_.assign(count, -1);
  // In-order walk; left before right gives left-to-right leaf order.
  std::vector<char> seen(count, 0);
  std::vector<NodeId> stack{root};
  std::size_t reached = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const auto u = static_cast<std::size_t>(id);
    if (seen[u] || parents[u] > 1) throw InputError("node " + std::to_string(id) + " has several parents");
    seen[u] = 1;
    ++reached;
    const Node& n = nodes_[u];
    if (n.is_leaf) {
      check_leaf(n.leaf, *schema_, task_);
      tree.leaf_rank_[u] = static_cast<int>(tree.leaf_order_.size());
      tree.leaf_order_.push_back(id);
    } else {
      check_test(n.test, *schema_);
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  if (reached != count) throw InputError("tree has nodes unreachable from the root");

  tree.schema_ = std::move(schema_);
  tree.task_ = task_;
  tree.nodes_ = std::move(nodes_);
  tree.root_ = root;
  return tree;
}

std::vector<NodeId> DecisionTree::internal_bfs() const {
  std::vector<NodeId> out;
  std::deque<NodeId> queue{root_};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    const Node& n = node(id);
    if (n.is_leaf) continue;
    out.push_back(id);
    queue.push_back(n.left);
    queue.push_back(n.right);
  }
  return out;
}

std::vector<NodeId> DecisionTree::internal_preorder() const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& n = node(id);
    if (n.is_leaf) continue;
    out.push_back(id);
    stack.push_back(n.right);
    stack.push_back(n.left);
  }
  return out;
}

int classic_leaf(const DecisionTree& tree, std::span<const double> x) {
  NodeId id = tree.root();
  for (;;) {
    const Node& n = tree.node(id);
    if (n.is_leaf) return tree.leaf_index(id);
    id = test_margin(n.test, x) > 0.0 ? n.right : n.left;
  }
}

std::optional<CompactTree> CompactTree::from(const DecisionTree& tree) {
  if (tree.n_internal() == 0) return std::nullopt;
  CompactTree out;
  // Preorder slots so the root is slot 0.
  std::vector<int> slot_of(tree.node_count(), -1);
  std::vector<NodeId> order;
  std::vector<NodeId> stack{tree.root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& n = tree.node(id);
    if (n.is_leaf) continue;
    if (!std::holds_alternative<AxisTest>(n.test)) return std::nullopt;
    slot_of[static_cast<std::size_t>(id)] = static_cast<int>(order.size());
    order.push_back(id);
    stack.push_back(n.right);
    stack.push_back(n.left);
  }
  auto child = [&](NodeId id) {
    return tree.node(id).is_leaf ? ~tree.leaf_index(id) : slot_of[static_cast<std::size_t>(id)];
  };
  for (NodeId id : order) {
    const Node& n = tree.node(id);
    const auto& t = std::get<AxisTest>(n.test);
    out.slots_.push_back({t.threshold, t.feature, {child(n.left), child(n.right)}});
  }
  return out;
}

LeafOutcome evaluate_classic(const DecisionTree& tree, std::span<const double> x) {
  tree.schema().check(x);
  LeafOutcome out;
  NodeId id = tree.root();
  for (;;) {
    const Node& n = tree.node(id);
    if (n.is_leaf) break;
    const bool passed = !(test_margin(n.test, x) > 0.0);
    out.path.push_back({id, passed});
    id = passed ? n.left : n.right;
  }
  out.leaf_node = id;
  out.leaf_index = tree.leaf_index(id);
  out.value = leaf_value(tree.node(id).leaf, x);
  return out;
}

std::vector<int> leaf_depths(const DecisionTree& tree) {
  std::vector<int> depth(tree.node_count(), 0);
  std::vector<int> out(tree.n_leaves(), 0);
  std::vector<NodeId> stack{tree.root()};
  depth[static_cast<std::size_t>(tree.root())] = 1;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const Node& n = tree.node(id);
    const int d = depth[static_cast<std::size_t>(id)];
    if (n.is_leaf) {
      out[static_cast<std::size_t>(tree.leaf_index(id))] = d;
      continue;
    }
    depth[static_cast<std::size_t>(n.left)] = d + 1;
    depth[static_cast<std::size_t>(n.right)] = d + 1;
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
  return out;
}

int tree_depth(const DecisionTree& tree) {
  const auto d = leaf_depths(tree);
  return *std::max_element(d.begin(), d.end());
}

bool trees_equal(const DecisionTree& a, const DecisionTree& b) {
  if (a.task() != b.task() || !(a.schema() == b.schema()) || a.node_count() != b.node_count()) return false;
  std::vector<std::pair<NodeId, NodeId>> stack{{a.root(), b.root()}};
  while (!stack.empty()) {
    const auto [ia, ib] = stack.back();
    stack.pop_back();
    const Node& na = a.node(ia);
    const Node& nb = b.node(ib);
    if (na.is_leaf != nb.is_leaf) return false;
    if (na.is_leaf) {
      if (!(na.leaf == nb.leaf)) return false;
      continue;
    }
    if (!(na.test == nb.test)) return false;
    stack.emplace_back(na.left, nb.left);
    stack.emplace_back(na.right, nb.right);
  }
  return true;
}

}  // namespace arbo
