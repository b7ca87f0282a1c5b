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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arbo/inference.hpp"
#include "arbo/matrix.hpp"
#include "arbo/tensorizer.hpp"
#include "arbo/tree.hpp"

namespace arbo {

enum class Backend { kClassic, kMatrix, kBitwise, kTernary, kSumProduct, kSoft };

std::string to_string(Backend b);
Backend parse_backend(const std::string& name);

// Rows of feature vectors sharing one schema.
struct Dataset {
  SchemaPtr schema;
  DenseMatrix rows;  // n_rows x n_features

  std::size_t size() const { return rows.rows(); }
  std::span<const double> row(std::size_t i) const { return rows.row(i); }
};

enum class Aggregation { kSum, kVote };

std::string to_string(Aggregation a);
Aggregation parse_aggregation(const std::string& name);

struct ScoringOptions {
  Activation activation = Activation::binarized_relu();
  SoftSelector selector = SoftSelector::softmax(1.0);
};

// One tree of an ensemble with every compiled form the backends need.
// Single-leaf trees have no tuple; every backend returns their leaf value.
struct EnsembleMember {
  TreePtr tree;
  TuplePtr tuple;
  std::shared_ptr<const TernaryTuple> ternary;
  std::shared_ptr<const TernaryKernel> ternary_kernel;
  std::shared_ptr<const BitwiseTree> bitwise;
  // Flattened column-major B as doubles for the matrix backend.
  std::vector<double> dense_bits;
  // Rows of B packed into ceil(n_L / 64) words each. Under the binarized
  // activation (B.h)_i is popcount(row_i AND h).
  std::vector<std::uint64_t> packed_rows;
  std::size_t packed_words = 0;
  // Flat node array for classic traversal of axis-aligned trees.
  std::optional<CompactTree> compact;
  std::optional<SumProductForm> sum_product;  // when the tree supports it
};

// Ordered trees plus an aggregation rule. Sum mode returns
// sum_k weight_k * tree_k(x); vote mode returns the plurality class with ties
// going to the smaller class id.
class EnsembleModel {
 public:
  EnsembleModel() = default;
  // Compiles every tree. Throws InputError if trees disagree on schema or
  // task, or vote mode is used without classification trees.
  EnsembleModel(SchemaPtr schema, Task task, Aggregation aggregation, std::vector<DecisionTree> trees,
                std::vector<double> weights = {});

  // Copy of this model with member k's tuple replaced as-is, without
  // validation. The node tree of that member is kept for classic traversal.
  // Fault-injection entry point; throws InputError if k has no tuple or the
  // dimensions differ.
  EnsembleModel with_member_tuple(std::size_t k, TreeTuple tuple) const;

  const FeatureSchema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  Task task() const { return task_; }
  Aggregation aggregation() const { return aggregation_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return members_.size(); }
  const EnsembleMember& member(std::size_t k) const { return members_[k]; }
  int n_classes() const { return n_classes_; }
  std::size_t max_leaves() const;

 private:
  static void finish_member(EnsembleMember& m);

  SchemaPtr schema_;
  Task task_ = Task::kRegression;
  Aggregation aggregation_ = Aggregation::kSum;
  std::vector<double> weights_;
  std::vector<EnsembleMember> members_;
  int n_classes_ = 0;
};

// Exit leaf and value of one member on one input. Leaf is -1 when a
// backend cannot name a leaf (soft, sum-product).
Prediction score_member(const EnsembleMember& member, std::span<const double> x, Backend backend,
                        const ScoringOptions& options = {});

double score_ensemble(const EnsembleModel& model, std::span<const double> x, Backend backend,
                      const ScoringOptions& options = {});

// Scores every row. Rows are split into contiguous ranges across workers;
// the output is identical for every worker count. Throws RowError naming
// the first row that does not match the schema.
std::vector<double> score_batch(const EnsembleModel& model, const Dataset& data, Backend backend,
                                std::size_t workers = 1, const ScoringOptions& options = {});

struct BenchEntry {
  Backend backend = Backend::kClassic;
  std::size_t trees = 0;
  std::size_t max_leaves = 0;
  std::size_t batch_size = 0;
  std::size_t repetitions = 0;
  double median_seconds = 0.0;
  double rows_per_second = 0.0;
  std::string iteration_order;
};

struct BenchReport {
  std::vector<BenchEntry> entries;
  std::size_t workers = 1;
  std::size_t verified_rows = 0;
  std::string environment;
};

// Verifies every backend against classic traversal on the full dataset
// (values) and on a prefix of rows (per-tree exit leaves), then times
// `repetitions` runs per backend after that warm-up and reports the median.
// Throws BackendDisagreementError with a sample of differing rows if any
// backend disagrees; ConfigError for the soft backend or repetitions == 0.
BenchReport run_bench(const EnsembleModel& model, const Dataset& data, const std::vector<Backend>& backends,
                      std::size_t repetitions = 5, std::size_t workers = 1, const ScoringOptions& options = {});

}  // namespace arbo
