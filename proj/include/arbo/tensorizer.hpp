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

// Compilation of a DecisionTree into the matrix parameterization (S, t, B, v)
// and the derived forms built on top of it.
//
// B has one row per leaf (left to right) and one column per internal node.
// Column j holds 0 at exactly the leaves of node j's left subtree: those are
// the leaves ruled out when node j is a false node.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "arbo/matrix.hpp"
#include "arbo/tree.hpp"

namespace arbo {

enum class InternalOrdering { kBfs, kPreorder };

std::string to_string(InternalOrdering o);
InternalOrdering parse_ordering(const std::string& s);

// Bare shape of a full binary tree. Leaves have left == right == -1.
struct TreeShape {
  struct Node {
    int left = -1;
    int right = -1;
    bool is_leaf() const { return left < 0; }
  };
  std::vector<Node> nodes;
  int root = 0;

  std::size_t n_leaves() const { return (nodes.size() + 1) / 2; }
  std::size_t n_internal() const { return nodes.size() / 2; }

  // Nested parenthesised form, e.g. "((L,(L,L)),L)".
  std::string to_string() const;
};

TreeShape shape_of(const DecisionTree& tree);

// Ordered shapes are equal when their nested forms match.
bool same_shape(const TreeShape& a, const TreeShape& b);

struct StructureLayout {
  BitMatrix bits;
  std::vector<int> internal_order;  // column -> shape node
  std::vector<int> leaf_order;      // row -> shape node
};

// B of a shape with columns in the requested order. Requires >= 1 internal node.
StructureLayout structure_matrix(const TreeShape& shape, InternalOrdering ordering);

struct DecodedStructure {
  TreeShape shape;
  std::vector<int> column_node;  // column of B -> shape node
  std::vector<int> row_node;     // row of B -> shape node (leaf)
};

// Recovers the shape from B alone. Column order of B is free; the result
// records which shape node each column belongs to. Throws
// InvalidStructureError naming the first violated rule, or InputError if B
// is not L x (L-1) with L >= 2.
DecodedStructure decode_structure(const BitMatrix& bits);

class TreeTuple;

// A test that has no (S row, threshold) form: categorical or composed.
struct BankedTest {
  int column = 0;
  TestFunction test;
  // Compiled inner model of a composed test (null for categorical).
  std::shared_ptr<const TreeTuple> inner;
};

// The (S, t, B, v) parameterization of one tree.
//
// Axis tests occupy a one-hot row of S; oblique tests a general real row.
// Categorical and composed tests live in test_bank, with a zero S row and
// zero threshold in their column.
class TreeTuple {
 public:
  SchemaPtr schema;
  Task task = Task::kRegression;
  DenseMatrix selection;           // n_L x n
  std::vector<double> thresholds;  // n_L
  BitMatrix bits;                  // L x n_L
  std::vector<LeafModel> values;   // L
  InternalOrdering ordering = InternalOrdering::kBfs;
  std::vector<NodeId> internal_order;
  std::vector<NodeId> leaf_order;
  std::vector<BankedTest> test_bank;

  std::size_t n_internal() const { return thresholds.size(); }
  std::size_t n_leaves() const { return values.size(); }

  // Builds the per-column lookup tables below. Called by compile() and the
  // loaders; call again after editing the public fields by hand.
  void index();

  // Per column: feature id when the S row is one-hot with a 1, else -1.
  const std::vector<int>& one_hot_feature() const { return one_hot_; }
  // Per column: position in test_bank, or -1 when the test is (S row, t).
  const std::vector<int>& bank_slot() const { return bank_slot_; }
  // True when every column is a one-hot S row, so margin j is
  // x[one_hot_feature()[j]] - t_j.
  bool axis_only() const { return axis_only_; }

  // Margin of column j's test: (Sx - t)_j or the banked test's margin.
  double margin(std::size_t column, std::span<const double> x) const;

 private:
  std::vector<int> one_hot_;
  std::vector<int> bank_slot_;
  bool axis_only_ = false;
};

using TuplePtr = std::shared_ptr<const TreeTuple>;

// Throws DegenerateTreeError for single-leaf trees.
TreeTuple compile(const DecisionTree& tree, InternalOrdering ordering = InternalOrdering::kBfs);

// Rebuilds the node-based tree from a tuple. Shape comes from B via
// decode_structure; tests from S/t/bank; leaves from v.
DecisionTree to_tree(const TreeTuple& tuple);

// Row-normalised ternary pattern matrix: -1 for a passed test on the leaf's
// decision path, +1 for a failed one, 0 for tests not on the path.
struct TernaryTuple {
  SchemaPtr schema;
  Task task = Task::kRegression;
  std::vector<std::int8_t> pattern;  // L x n_L, row-major
  std::vector<int> row_norm;         // L1 norm of each pattern row
  // [S | t]; the augmented input is (x, -1).
  DenseMatrix augmented_selection;
  std::vector<LeafModel> values;
  std::vector<NodeId> internal_order;
  std::vector<NodeId> leaf_order;
  std::vector<BankedTest> test_bank;

  std::size_t n_leaves() const { return values.size(); }
  std::size_t n_internal() const { return augmented_selection.rows(); }
  std::int8_t at(std::size_t leaf, std::size_t column) const { return pattern[leaf * n_internal() + column]; }
  // Normalised entry, pattern / row_norm.
  double normalized(std::size_t leaf, std::size_t column) const;

  // Sparse view of each row for scoring: (column, sign) pairs.
  std::vector<std::vector<std::pair<int, std::int8_t>>> rows() const;
};

TernaryTuple ternary_form(const TreeTuple& tuple);

struct SumProductFactor {
  int sense = 1;  // +1: factor H(x_v - t), -1: factor H(t - x_v)
  int feature = 0;
  double threshold = 0.0;
  friend bool operator==(const SumProductFactor&, const SumProductFactor&) = default;
};

struct SumProductTerm {
  double coefficient = 0.0;
  std::vector<SumProductFactor> factors;
  friend bool operator==(const SumProductTerm&, const SumProductTerm&) = default;
};

// f(x) = sum_m a_m prod_k H(s_km (x_{v_km} - t_km)), one term per leaf.
struct SumProductForm {
  std::vector<SumProductTerm> terms;
};

// Requires an axis-aligned regression tree with constant leaves; throws
// UnsupportedFormError otherwise.
SumProductForm sum_product_form(const DecisionTree& tree);

// Minimal-support binary u with first_argmax(B u) == leaf: ones exactly at
// the tests leaf's path fails. Throws InputError for a bad leaf index.
std::vector<std::uint8_t> characteristic_vector(const BitMatrix& bits, int leaf);
std::vector<std::uint8_t> characteristic_vector(const TreeTuple& tuple, int leaf);

// Leaves of column j's left subtree, i.e. the zero rows of column j.
std::vector<int> left_reachable_set(const BitMatrix& bits, int column);

std::vector<std::uint8_t> complement(const std::vector<std::uint8_t>& bits);

struct Equivalence {
  bool equivalent = false;
  std::string reason;
  explicit operator bool() const { return equivalent; }
};

// True iff the tuples differ only by a permutation of internal nodes.
Equivalence tuples_equivalent(const TreeTuple& a, const TreeTuple& b);

// Permutes the columns of a tuple into BFS order of its shape.
TreeTuple canonicalize(const TreeTuple& tuple);

}  // namespace arbo
