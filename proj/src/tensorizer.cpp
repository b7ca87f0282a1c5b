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

#include "arbo/tensorizer.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "arbo/error.hpp"

namespace arbo {

std::string to_string(InternalOrdering o) { return o == InternalOrdering::kBfs ? "bfs" : "preorder"; }

InternalOrdering parse_ordering(const std::string& s) {
  if (s == "bfs") return InternalOrdering::kBfs;
  if (s == "preorder") return InternalOrdering::kPreorder;
  throw ConfigError("unknown ordering '" + s + "' (expected bfs or preorder)");
}

// ---------------------------------------------------------------------------
// Shapes

std::string TreeShape::to_string() const {
  std::string out;
  // Iterative to survive deep chains.
  std::vector<std::pair<int, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [id, state] = stack.back();
    const Node& n = nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) {
      out += 'L';
      stack.pop_back();
      continue;
    }
    if (state == 0) {
      out += '(';
      state = 1;
      stack.emplace_back(n.left, 0);
    } else if (state == 1) {
      out += ',';
      state = 2;
      stack.emplace_back(n.right, 0);
    } else {
      out += ')';
      stack.pop_back();
    }
  }
  return out;
}

TreeShape shape_of(const DecisionTree& tree) {
  TreeShape s;
  s.nodes.resize(tree.node_count());
  for (std::size_t i = 0; i < tree.node_count(); ++i) {
    const Node& n = tree.node(static_cast<NodeId>(i));
    if (!n.is_leaf) s.nodes[i] = {n.left, n.right};
  }
  s.root = tree.root();
  return s;
}

bool same_shape(const TreeShape& a, const TreeShape& b) { return a.to_string() == b.to_string(); }

namespace {

std::vector<int> shape_bfs(const TreeShape& s) {
  std::vector<int> out;
  std::deque<int> queue{s.root};
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    const auto& n = s.nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) continue;
    out.push_back(id);
    queue.push_back(n.left);
    queue.push_back(n.right);
  }
  return out;
}

std::vector<int> shape_preorder(const TreeShape& s) {
  std::vector<int> out;
  std::vector<int> stack{s.root};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const auto& n = s.nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) continue;
    out.push_back(id);
    stack.push_back(n.right);
    stack.push_back(n.left);
  }
  return out;
}

// Leaves in left-to-right order plus, for every node, the half-open range of
// leaf positions below it.
struct LeafRanges {
  std::vector<int> leaves;
  std::vector<std::pair<int, int>> range;
};

LeafRanges leaf_ranges(const TreeShape& s) {
  LeafRanges lr;
  lr.range.assign(s.nodes.size(), {0, 0});
  std::vector<std::pair<int, bool>> stack{{s.root, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    const auto& n = s.nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) {
      const int pos = static_cast<int>(lr.leaves.size());
      lr.leaves.push_back(id);
      lr.range[static_cast<std::size_t>(id)] = {pos, pos + 1};
      continue;
    }
    if (expanded) {
      lr.range[static_cast<std::size_t>(id)] = {lr.range[static_cast<std::size_t>(n.left)].first,
                                                lr.range[static_cast<std::size_t>(n.right)].second};
      continue;
    }
    stack.emplace_back(id, true);
    stack.emplace_back(n.right, false);
    stack.emplace_back(n.left, false);
  }
  return lr;
}

}  // namespace

StructureLayout structure_matrix(const TreeShape& shape, InternalOrdering ordering) {
  if (shape.n_internal() == 0) throw DegenerateTreeError();
  StructureLayout out;
  out.internal_order = ordering == InternalOrdering::kBfs ? shape_bfs(shape) : shape_preorder(shape);
  const LeafRanges lr = leaf_ranges(shape);
  out.leaf_order = lr.leaves;
  const std::size_t rows = lr.leaves.size();
  const std::size_t cols = out.internal_order.size();
  out.bits = BitMatrix(rows, cols, 1);
  for (std::size_t c = 0; c < cols; ++c) {
    const auto& n = shape.nodes[static_cast<std::size_t>(out.internal_order[c])];
    const auto [lo, hi] = lr.range[static_cast<std::size_t>(n.left)];
    for (int r = lo; r < hi; ++r) out.bits(static_cast<std::size_t>(r), c) = 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decoding B

namespace {

struct ZeroSpan {
  int first = -1;  // first zero row, -1 if none
  int last = -1;
  int count = 0;
  bool contiguous = true;
};

class StructureDecoder {
 public:
  explicit StructureDecoder(const BitMatrix& b) : b_(b) {
    spans_.resize(b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
      ZeroSpan& z = spans_[c];
      for (std::size_t r = 0; r < b.rows(); ++r) {
        if (b(r, c) != 0) continue;
        if (z.first < 0) {
          z.first = static_cast<int>(r);
        } else if (z.last != static_cast<int>(r) - 1) {
          z.contiguous = false;
        }
        z.last = static_cast<int>(r);
        ++z.count;
      }
    }
  }

  DecodedStructure run() {
    const int rows = static_cast<int>(b_.rows());
    for (std::size_t c = 0; c < b_.cols(); ++c) {
      const int col = static_cast<int>(c);
      if (spans_[c].count == 0) {
        throw InvalidStructureError(2, "column has no 0; every internal node has a left subtree", {col});
      }
      if (spans_[c].count == rows) {
        throw InvalidStructureError(1, "column has no 1; a node cannot rule out every leaf", {col});
      }
    }
    out_.column_node.assign(b_.cols(), -1);
    out_.row_node.assign(b_.rows(), -1);
    std::vector<int> all(b_.cols());
    std::iota(all.begin(), all.end(), 0);
    out_.shape.root = build(0, rows, all);
    return std::move(out_);
  }

 private:
  int new_node() {
    out_.shape.nodes.emplace_back();
    return static_cast<int>(out_.shape.nodes.size() - 1);
  }

  // Subtree over leaf rows [lo, hi) owning the given columns.
  int build(int lo, int hi, const std::vector<int>& cols) {
    if (hi - lo == 1) {
      const int leaf = new_node();
      out_.row_node[static_cast<std::size_t>(lo)] = leaf;
      return leaf;
    }
    // The subtree root is the largest bitvector ruling out the subtree's
    // leftmost leaf; the other candidates are the nested left spine.
    int root = -1;
    int tie = -1;
    for (int c : cols) {
      if (b_(static_cast<std::size_t>(lo), static_cast<std::size_t>(c)) != 0) continue;
      const int z = spans_[static_cast<std::size_t>(c)].count;
      if (root < 0 || z > spans_[static_cast<std::size_t>(root)].count) {
        root = c;
        tie = -1;
      } else if (z == spans_[static_cast<std::size_t>(root)].count) {
        tie = c;
      }
    }
    if (root < 0) {
      throw InvalidStructureError(1, "no column rules out leaf " + std::to_string(lo) +
                                         ", so the subtree over rows [" + std::to_string(lo) + ", " +
                                         std::to_string(hi) + ") has no root",
                                  cols, {lo});
    }
    if (tie >= 0) {
      throw InvalidStructureError(1, "two columns tie for the most 0s in a subtree", {root, tie}, {lo});
    }
    const ZeroSpan& rz = spans_[static_cast<std::size_t>(root)];
    if (!rz.contiguous || rz.first != lo) {
      throw InvalidStructureError(3, "zeros of a node must be the contiguous block of its left subtree", {root});
    }
    if (rz.last >= hi - 1) {
      throw InvalidStructureError(1, "root column rules out its whole subtree", {root}, {lo, hi - 1});
    }
    const int mid = rz.last + 1;

    std::vector<int> left, right;
    for (int c : cols) {
      if (c == root) continue;
      const ZeroSpan& z = spans_[static_cast<std::size_t>(c)];
      const bool in_left = z.first >= lo && z.last < mid;
      const bool in_right = z.first >= mid && z.last < hi;
      if (in_left && z.contiguous) {
        left.push_back(c);
      } else if (in_right && z.contiguous) {
        right.push_back(c);
      } else if (z.first < mid) {
        throw InvalidStructureError(3, "column does not keep the 1s its left-side ancestor sets", {c, root});
      } else {
        throw InvalidStructureError(4, "column under a right child keeps 0s outside its parent's 1 block",
                                    {c, root});
      }
    }
    if (static_cast<int>(left.size()) != mid - lo - 1) {
      if (mid - lo == 1) {
        throw InvalidStructureError(2, "left-leaf parent must have exactly one 0", {root});
      }
      throw InvalidStructureError(3, "left subtree has " + std::to_string(mid - lo) + " leaves but " +
                                         std::to_string(left.size()) + " internal columns",
                                  left);
    }
    if (static_cast<int>(right.size()) != hi - mid - 1) {
      throw InvalidStructureError(4, "right subtree has " + std::to_string(hi - mid) + " leaves but " +
                                         std::to_string(right.size()) + " internal columns",
                                  right);
    }
    const int node = new_node();
    out_.column_node[static_cast<std::size_t>(root)] = node;
    const int l = build(lo, mid, left);
    const int r = build(mid, hi, right);
    out_.shape.nodes[static_cast<std::size_t>(node)] = {l, r};
    return node;
  }

  const BitMatrix& b_;
  std::vector<ZeroSpan> spans_;
  DecodedStructure out_;
};

}  // namespace

DecodedStructure decode_structure(const BitMatrix& bits) {
  if (bits.rows() < 2 || bits.cols() + 1 != bits.rows()) {
    throw InputError("structure matrix must be L x (L-1) with L >= 2, got " + std::to_string(bits.rows()) +
                     " x " + std::to_string(bits.cols()));
  }
  return StructureDecoder(bits).run();
}

namespace {

// For every row, the (column, passed) pairs on that leaf's decision path,
// root first.
std::vector<std::vector<std::pair<int, bool>>> leaf_paths(const DecodedStructure& d) {
  std::vector<int> node_column(d.shape.nodes.size(), -1);
  for (std::size_t c = 0; c < d.column_node.size(); ++c) {
    node_column[static_cast<std::size_t>(d.column_node[c])] = static_cast<int>(c);
  }
  std::vector<int> node_row(d.shape.nodes.size(), -1);
  for (std::size_t r = 0; r < d.row_node.size(); ++r) node_row[static_cast<std::size_t>(d.row_node[r])] = static_cast<int>(r);

  std::vector<std::vector<std::pair<int, bool>>> out(d.row_node.size());
  std::vector<std::pair<int, std::vector<std::pair<int, bool>>>> stack;
  stack.push_back({d.shape.root, {}});
  while (!stack.empty()) {
    auto [id, path] = std::move(stack.back());
    stack.pop_back();
    const auto& n = d.shape.nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) {
      out[static_cast<std::size_t>(node_row[static_cast<std::size_t>(id)])] = std::move(path);
      continue;
    }
    const int col = node_column[static_cast<std::size_t>(id)];
    auto right = path;
    right.emplace_back(col, false);
    path.emplace_back(col, true);
    stack.push_back({n.right, std::move(right)});
    stack.push_back({n.left, std::move(path)});
  }
  return out;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------------------
// Compilation

void TreeTuple::index() {
  const std::size_t nl = thresholds.size();
  one_hot_.assign(nl, -1);
  bank_slot_.assign(nl, -1);
  for (std::size_t s = 0; s < test_bank.size(); ++s) {
    const int c = test_bank[s].column;
    if (c < 0 || static_cast<std::size_t>(c) >= nl) throw InputError("banked test column out of range");
    bank_slot_[static_cast<std::size_t>(c)] = static_cast<int>(s);
  }
  for (std::size_t j = 0; j < nl && j < selection.rows(); ++j) {
    if (bank_slot_[j] >= 0) continue;
    int hot = -1;
    bool one_hot = true;
    const auto row = selection.row(j);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] == 0.0) continue;
      if (row[k] != 1.0 || hot >= 0) {
        one_hot = false;
        break;
      }
      hot = static_cast<int>(k);
    }
    if (one_hot && hot >= 0) one_hot_[j] = hot;
  }
  axis_only_ = selection.rows() == nl && std::all_of(one_hot_.begin(), one_hot_.end(), [](int f) { return f >= 0; });
}

TreeTuple compile(const DecisionTree& tree, InternalOrdering ordering) {
  if (tree.n_internal() == 0) throw DegenerateTreeError();
  const TreeShape shape = shape_of(tree);
  StructureLayout layout = structure_matrix(shape, ordering);

  TreeTuple t;
  t.schema = tree.schema_ptr();
  t.task = tree.task();
  t.ordering = ordering;
  t.bits = std::move(layout.bits);
  const std::size_t nl = layout.internal_order.size();
  const std::size_t n = tree.schema().size();
  t.selection = DenseMatrix(nl, n);
  t.thresholds.assign(nl, 0.0);
  for (std::size_t c = 0; c < nl; ++c) {
    const NodeId id = layout.internal_order[c];
    t.internal_order.push_back(id);
    const TestFunction& test = tree.node(id).test;
    std::visit(Overloaded{
                   [&](const AxisTest& a) {
                     t.selection(c, static_cast<std::size_t>(a.feature)) = 1.0;
                     t.thresholds[c] = a.threshold;
                   },
                   [&](const ObliqueTest& o) {
                     std::copy(o.weights.begin(), o.weights.end(), t.selection.row(c).begin());
                     t.thresholds[c] = o.offset;
                   },
                   [&](const CategoricalTest&) { t.test_bank.push_back({static_cast<int>(c), test, nullptr}); },
                   [&](const ComposedTest& k) {
                     TuplePtr inner;
                     if (k.inner->n_internal() > 0) inner = std::make_shared<const TreeTuple>(compile(*k.inner));
                     t.test_bank.push_back({static_cast<int>(c), test, std::move(inner)});
                   },
               },
               test);
  }
  for (int id : layout.leaf_order) {
    t.leaf_order.push_back(id);
    t.values.push_back(tree.node(id).leaf);
  }
  t.index();
  return t;
}

DecisionTree to_tree(const TreeTuple& tuple) {
  if (tuple.values.size() != tuple.bits.rows() || tuple.thresholds.size() != tuple.bits.cols() ||
      tuple.selection.rows() != tuple.thresholds.size()) {
    throw InputError("tuple dimensions disagree");
  }
  const DecodedStructure d = decode_structure(tuple.bits);
  std::vector<int> node_column(d.shape.nodes.size(), -1);
  for (std::size_t c = 0; c < d.column_node.size(); ++c) {
    node_column[static_cast<std::size_t>(d.column_node[c])] = static_cast<int>(c);
  }
  std::vector<int> node_row(d.shape.nodes.size(), -1);
  for (std::size_t r = 0; r < d.row_node.size(); ++r) node_row[static_cast<std::size_t>(d.row_node[r])] = static_cast<int>(r);

  auto test_of = [&](std::size_t c) -> TestFunction {
    if (const int s = tuple.bank_slot()[c]; s >= 0) return tuple.test_bank[static_cast<std::size_t>(s)].test;
    if (const int f = tuple.one_hot_feature()[c]; f >= 0) return AxisTest{f, tuple.thresholds[c]};
    const auto row = tuple.selection.row(c);
    return ObliqueTest{{row.begin(), row.end()}, tuple.thresholds[c]};
  };

  DecisionTree::Builder builder(tuple.schema, tuple.task);
  std::vector<NodeId> ids(d.shape.nodes.size(), kNoNode);
  // Children are created after parents by the decoder, so a reverse sweep
  // sees both children first.
  for (std::size_t i = d.shape.nodes.size(); i-- > 0;) {
    const auto& n = d.shape.nodes[i];
    if (n.is_leaf()) {
      ids[i] = builder.add_leaf(tuple.values[static_cast<std::size_t>(node_row[i])]);
    } else {
      ids[i] = builder.add_internal(test_of(static_cast<std::size_t>(node_column[i])),
                                    ids[static_cast<std::size_t>(n.left)], ids[static_cast<std::size_t>(n.right)]);
    }
  }
  return std::move(builder).build(ids[static_cast<std::size_t>(d.shape.root)]);
}

// ---------------------------------------------------------------------------
// Ternary form

double TernaryTuple::normalized(std::size_t leaf, std::size_t column) const {
  return static_cast<double>(at(leaf, column)) / static_cast<double>(row_norm[leaf]);
}

std::vector<std::vector<std::pair<int, std::int8_t>>> TernaryTuple::rows() const {
  std::vector<std::vector<std::pair<int, std::int8_t>>> out(n_leaves());
  for (std::size_t r = 0; r < n_leaves(); ++r) {
    for (std::size_t c = 0; c < n_internal(); ++c) {
      if (const auto v = at(r, c); v != 0) out[r].emplace_back(static_cast<int>(c), v);
    }
  }
  return out;
}

TernaryTuple ternary_form(const TreeTuple& tuple) {
  const DecodedStructure d = decode_structure(tuple.bits);
  const auto paths = leaf_paths(d);
  const std::size_t nl = tuple.n_internal();
  const std::size_t n = tuple.selection.cols();

  TernaryTuple out;
  out.schema = tuple.schema;
  out.task = tuple.task;
  out.values = tuple.values;
  out.internal_order = tuple.internal_order;
  out.leaf_order = tuple.leaf_order;
  out.test_bank = tuple.test_bank;
  out.pattern.assign(tuple.n_leaves() * nl, 0);
  out.row_norm.assign(tuple.n_leaves(), 0);
  for (std::size_t r = 0; r < paths.size(); ++r) {
    for (const auto& [c, passed] : paths[r]) out.pattern[r * nl + static_cast<std::size_t>(c)] = passed ? -1 : 1;
    out.row_norm[r] = static_cast<int>(paths[r].size());
  }
  out.augmented_selection = DenseMatrix(nl, n + 1);
  for (std::size_t c = 0; c < nl; ++c) {
    const auto row = tuple.selection.row(c);
    std::copy(row.begin(), row.end(), out.augmented_selection.row(c).begin());
    out.augmented_selection(c, n) = tuple.thresholds[c];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sum-product form

SumProductForm sum_product_form(const DecisionTree& tree) {
  if (tree.task() != Task::kRegression) throw UnsupportedFormError("sum-product form needs a regression tree");
  SumProductForm out;
  std::vector<std::pair<NodeId, std::vector<SumProductFactor>>> stack;
  stack.push_back({tree.root(), {}});
  while (!stack.empty()) {
    auto [id, factors] = std::move(stack.back());
    stack.pop_back();
    const Node& n = tree.node(id);
    if (n.is_leaf) {
      const auto* c = std::get_if<ConstantLeaf>(&n.leaf);
      if (c == nullptr) throw UnsupportedFormError("sum-product form needs constant leaves");
      out.terms.push_back({c->value, std::move(factors)});
      continue;
    }
    const auto* a = std::get_if<AxisTest>(&n.test);
    if (a == nullptr) throw UnsupportedFormError("sum-product form needs axis-aligned tests");
    auto right = factors;
    right.push_back({+1, a->feature, a->threshold});
    factors.push_back({-1, a->feature, a->threshold});
    stack.push_back({n.right, std::move(right)});
    stack.push_back({n.left, std::move(factors)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Characteristic vectors, reachable sets, complements

std::vector<std::uint8_t> characteristic_vector(const BitMatrix& bits, int leaf) {
  if (leaf < 0 || static_cast<std::size_t>(leaf) >= bits.rows()) {
    throw InputError("leaf index " + std::to_string(leaf) + " out of range");
  }
  const auto paths = leaf_paths(decode_structure(bits));
  std::vector<std::uint8_t> u(bits.cols(), 0);
  for (const auto& [c, passed] : paths[static_cast<std::size_t>(leaf)]) {
    if (!passed) u[static_cast<std::size_t>(c)] = 1;
  }
  return u;
}

std::vector<std::uint8_t> characteristic_vector(const TreeTuple& tuple, int leaf) {
  return characteristic_vector(tuple.bits, leaf);
}

std::vector<int> left_reachable_set(const BitMatrix& bits, int column) {
  if (column < 0 || static_cast<std::size_t>(column) >= bits.cols()) {
    throw InputError("column index " + std::to_string(column) + " out of range");
  }
  std::vector<int> out;
  for (std::size_t r = 0; r < bits.rows(); ++r) {
    if (bits(r, static_cast<std::size_t>(column)) == 0) out.push_back(static_cast<int>(r));
  }
  return out;
}

std::vector<std::uint8_t> complement(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> out(bits.size());
  std::transform(bits.begin(), bits.end(), out.begin(), [](std::uint8_t b) { return b ? 0 : 1; });
  return out;
}

// ---------------------------------------------------------------------------
// Equivalence

TreeTuple canonicalize(const TreeTuple& tuple) {
  const DecodedStructure d = decode_structure(tuple.bits);
  std::vector<int> node_column(d.shape.nodes.size(), -1);
  for (std::size_t c = 0; c < d.column_node.size(); ++c) {
    node_column[static_cast<std::size_t>(d.column_node[c])] = static_cast<int>(c);
  }
  const std::vector<int> bfs = shape_bfs(d.shape);
  const std::size_t nl = bfs.size();

  TreeTuple out;
  out.schema = tuple.schema;
  out.task = tuple.task;
  out.values = tuple.values;
  out.leaf_order = tuple.leaf_order;
  out.ordering = InternalOrdering::kBfs;
  out.selection = DenseMatrix(nl, tuple.selection.cols());
  out.thresholds.assign(nl, 0.0);
  out.bits = BitMatrix(tuple.bits.rows(), nl);
  std::vector<int> new_of_old(nl, -1);
  for (std::size_t k = 0; k < nl; ++k) {
    const auto old = static_cast<std::size_t>(node_column[static_cast<std::size_t>(bfs[k])]);
    new_of_old[old] = static_cast<int>(k);
    const auto row = tuple.selection.row(old);
    std::copy(row.begin(), row.end(), out.selection.row(k).begin());
    out.thresholds[k] = tuple.thresholds[old];
    for (std::size_t r = 0; r < tuple.bits.rows(); ++r) out.bits(r, k) = tuple.bits(r, old);
    if (old < tuple.internal_order.size()) out.internal_order.push_back(tuple.internal_order[old]);
  }
  out.test_bank = tuple.test_bank;
  for (auto& b : out.test_bank) b.column = new_of_old[static_cast<std::size_t>(b.column)];
  std::sort(out.test_bank.begin(), out.test_bank.end(),
            [](const BankedTest& a, const BankedTest& b) { return a.column < b.column; });
  out.index();
  return out;
}

Equivalence tuples_equivalent(const TreeTuple& a, const TreeTuple& b) {
  if (a.bits.rows() != b.bits.rows() || a.bits.cols() != b.bits.cols() ||
      a.selection.cols() != b.selection.cols()) {
    return {false, "dimension mismatch: " + std::to_string(a.bits.rows()) + "x" + std::to_string(a.bits.cols()) +
                       " vs " + std::to_string(b.bits.rows()) + "x" + std::to_string(b.bits.cols())};
  }
  if (a.task != b.task) return {false, "task differs"};
  if (a.schema && b.schema && !(*a.schema == *b.schema)) return {false, "feature schema differs"};
  if (!(a.values == b.values)) return {false, "value vectors differ"};
  TreeTuple ca, cb;
  try {
    ca = canonicalize(a);
    cb = canonicalize(b);
  } catch (const InvalidStructureError& e) {
    return {false, std::string("invalid structure matrix: ") + e.what()};
  }
  if (!(ca.bits == cb.bits)) return {false, "structure matrices differ under every column permutation"};
  if (!(ca.selection == cb.selection)) return {false, "selection matrices differ"};
  if (ca.thresholds != cb.thresholds) return {false, "threshold vectors differ"};
  if (ca.test_bank.size() != cb.test_bank.size()) return {false, "banked tests differ"};
  for (std::size_t i = 0; i < ca.test_bank.size(); ++i) {
    if (ca.test_bank[i].column != cb.test_bank[i].column || !(ca.test_bank[i].test == cb.test_bank[i].test)) {
      return {false, "banked tests differ"};
    }
  }
  return {true, ""};
}

}  // namespace arbo
