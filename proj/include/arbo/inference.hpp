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

// Evaluation backends over compiled trees.
//
// The hard backends run in three phases: margins of every test (Sx - t),
// an activation that is positive exactly on false nodes, and a score vector
// B h whose first maximum names the exit leaf. Ties are always resolved to
// the smallest index.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "arbo/matrix.hpp"
#include "arbo/tensorizer.hpp"

namespace arbo {

// A positivity-augmented function: tau(z) > 0 for z > 0 and tau(z) = 0 for
// z <= 0. Built-ins are dispatched without an indirect call.
class Activation {
 public:
  enum class Kind { kBinarizedRelu, kRelu, kScaledRelu, kRectifiedQuadratic, kCustom };

  static Activation binarized_relu() { return Activation(Kind::kBinarizedRelu, "binarized-relu"); }
  static Activation relu() { return Activation(Kind::kRelu, "relu"); }
  // Throws ConfigError unless alpha > 0.
  static Activation scaled_relu(double alpha);
  static Activation rectified_quadratic() { return Activation(Kind::kRectifiedQuadratic, "rectified-quadratic"); }
  // Probes fn on a fixed grid and throws ConfigError if it breaks the
  // positivity-augmented contract there.
  static Activation custom(std::string name, std::function<double(double)> fn);

  // Accepts "binarized-relu", "relu", "scaled-relu" (alpha 1),
  // "scaled-relu:<alpha>" and "rectified-quadratic".
  static Activation from_name(const std::string& name);

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }

  double operator()(double z) const {
    switch (kind_) {
      case Kind::kBinarizedRelu:
        return z > 0.0 ? 1.0 : 0.0;
      case Kind::kRelu:
        return z > 0.0 ? z : 0.0;
      case Kind::kScaledRelu:
        return z > 0.0 ? alpha_ * z : 0.0;
      case Kind::kRectifiedQuadratic:
        return z > 0.0 ? z * z : 0.0;
      case Kind::kCustom:
        break;
    }
    return fn_(z);
  }

 private:
  Activation(Kind kind, std::string name, double alpha = 1.0) : kind_(kind), name_(std::move(name)), alpha_(alpha) {}

  Kind kind_;
  std::string name_;
  double alpha_ = 1.0;
  std::function<double(double)> fn_;
};

// Smallest index attaining the maximum. Throws InputError on empty input.
int first_argmax(std::span<const double> scores);

// Margins of every test, in column order: (Sx - t) for linear tests, +-1 for
// categorical ones, inner output minus threshold for composed ones.
std::vector<double> test_margins(const TreeTuple& tuple, std::span<const double> x);

// Signed margin of one test. Positive means false node.
double evaluate_test_function(const TestFunction& test, std::span<const double> x);

// h_j = activation(margin_j).
std::vector<double> test_phase(const TreeTuple& tuple, std::span<const double> x,
                               const Activation& activation = Activation::binarized_relu());

// b = B h. Throws InputError on a dimension mismatch.
std::vector<double> traversal_phase(const BitMatrix& bits, std::span<const double> h);
std::vector<double> traversal_phase(const DenseMatrix& b, std::span<const double> h);

struct Prediction {
  int leaf = 0;
  double value = 0.0;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

Prediction predict_matrix(const TreeTuple& tuple, std::span<const double> x,
                          const Activation& activation = Activation::binarized_relu());

// QuickScorer-style: AND together the bitvectors of all false nodes and take
// the leftmost set bit. Masks are packed per tree, one word per 64 leaves.
class BitwiseTree {
 public:
  explicit BitwiseTree(TuplePtr tuple);

  std::size_t words() const { return words_; }
  // Mask of column j, `words()` words, bit i of word w is leaf 64 w + i.
  std::span<const std::uint64_t> mask(std::size_t column) const {
    return {masks_.data() + column * words_, words_};
  }

  // Leftmost leaf of the AND of false-node masks; -1 if the AND is empty,
  // which a structure matrix never produces.
  int exit_leaf(std::span<const double> x) const;
  const TreeTuple& tuple() const { return *tuple_; }

 private:
  TuplePtr tuple_;
  std::size_t words_;
  std::vector<std::uint64_t> masks_;
};

// Index of the leftmost set bit of the AND of the given columns' bitvectors,
// with no columns meaning an all-ones mask; -1 if the AND is empty.
int leftmost_of_and(const BitMatrix& bits, std::span<const int> false_columns);

// Throws DomainError if the AND of false-node masks is empty.
Prediction predict_bitwise(const TreeTuple& tuple, std::span<const double> x);

// Scores of the ternary backend for every leaf: row-normalised pattern
// dotted with sgn of the margins (sgn(0) = -1). The pattern row of the leaf
// that x reaches scores exactly 1.
std::vector<double> ternary_scores(const TernaryTuple& ternary, std::span<const double> x);
Prediction predict_ternary(const TernaryTuple& ternary, std::span<const double> x);

// Batch evaluator for the ternary backend. Pattern rows are stored sparsely,
// so a leaf costs its path length; scores and the chosen leaf are identical
// to ternary_scores / predict_ternary. No schema checks.
class TernaryKernel {
 public:
  explicit TernaryKernel(std::shared_ptr<const TernaryTuple> ternary);

  int exit_leaf(std::span<const double> x, std::vector<int>& sign_scratch) const;
  const TernaryTuple& ternary() const { return *ternary_; }

 private:
  std::shared_ptr<const TernaryTuple> ternary_;
  std::vector<int> feature_;        // one-hot column feature, or -1
  std::vector<double> threshold_;
  std::vector<int> row_start_;      // L + 1 offsets into entries
  std::vector<int> entry_column_;
  std::vector<int> entry_sign_;
};

// Unit step with H(0) = 0.
double predict_sum_product(const SumProductForm& form, std::span<const double> x);

// exp(b_i / T) / sum_j exp(b_j / T), max-subtracted. Throws ConfigError
// unless T > 0.
std::vector<double> softmax_select(std::span<const double> scores, double temperature);

// argmin_p sum_i w_i (p_i - z_i)^2 over the probability simplex. Throws
// ConfigError unless w is strictly positive and strictly decreasing.
std::vector<double> weighted_sparsemax(std::span<const double> z, std::span<const double> w);

// w_i = 1 / i for i = 1..n.
std::vector<double> harmonic_weights(std::size_t n);

struct SoftSelector {
  enum class Kind { kSoftmax, kWeightedSparsemax };
  Kind kind = Kind::kSoftmax;
  double temperature = 1.0;
  std::vector<double> weights;  // weighted-sparsemax; empty means 1/i

  static SoftSelector softmax(double temperature) { return {Kind::kSoftmax, temperature, {}}; }
  static SoftSelector sparsemax(std::vector<double> weights = {}) {
    return {Kind::kWeightedSparsemax, 1.0, std::move(weights)};
  }

  std::vector<double> select(std::span<const double> scores) const;
};

// <selector(B act(Sx - t)), p(x)> with p the leaf predictions at x. Throws
// UnsupportedFormError for classification tuples.
double predict_soft(const TreeTuple& tuple, std::span<const double> x, const SoftSelector& selector,
                    const Activation& activation = Activation::binarized_relu());

// Real-valued replacement for B that keeps the selected leaf.
struct GeneralizedB {
  enum class Provenance { kBitvector, kPositiveScaled, kZeroNegated, kFree };
  DenseMatrix entries;  // L x n_L
  Provenance provenance = Provenance::kFree;

  static GeneralizedB from_bits(const BitMatrix& bits);
  // Checks the provenance invariant against the bitvector matrix it was
  // derived from; throws InputError when it does not hold.
  static GeneralizedB make(DenseMatrix entries, Provenance provenance, const BitMatrix& base);
};

struct PositiveScale {
  std::vector<double> alpha;  // one per column, > 0
};
struct ZeroNegate {
  double value = -1.0;  // < 0
};

// Throws ConfigError if alpha <= 0 or the substitute is >= 0.
GeneralizedB apply_generalized_B(const TreeTuple& tuple, const PositiveScale& transform);
GeneralizedB apply_generalized_B(const TreeTuple& tuple, const ZeroNegate& transform);

Prediction predict_matrix(const TreeTuple& tuple, const GeneralizedB& b, std::span<const double> x,
                          const Activation& activation = Activation::binarized_relu());

}  // namespace arbo
