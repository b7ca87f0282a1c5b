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

// Seeded generators for fuzzing fixtures: random trees and inputs.

#pragma once

#include <cstdint>
#include <random>

#include "arbo/tree.hpp"

namespace arbo {

using Rng = std::mt19937_64;

struct RandomTreeParams {
  double threshold_min = -1.0;
  double threshold_max = 1.0;
  // Probability that an internal node gets an oblique / categorical test.
  // The rest are axis-aligned.
  double oblique_fraction = 0.0;
  double categorical_fraction = 0.0;
  // Trailing features of the generated schema that are categorical.
  std::size_t categorical_features = 0;
  std::size_t vocabulary_size = 4;

  Task task = Task::kRegression;
  int n_classes = 3;
  double leaf_min = -10.0;
  double leaf_max = 10.0;
  // Probability that a regression leaf is linear instead of constant.
  double linear_leaf_fraction = 0.0;
};

// Schema with `n_features` features, the last `categorical` of which are
// categorical with vocabularies c0..c{vocab-1}.
SchemaPtr make_schema(std::size_t n_features, std::size_t categorical, std::size_t vocab);

// Grows the shape by splitting a uniformly chosen leaf n_leaves - 1 times.
// Throws InputError when n_leaves == 0.
DecisionTree generate_random_tree(std::uint64_t seed, std::size_t n_leaves, std::size_t n_features,
                                  const RandomTreeParams& params = {});

DecisionTree generate_random_tree(Rng& rng, std::size_t n_leaves, const SchemaPtr& schema,
                                  const RandomTreeParams& params = {});

struct RandomInputParams {
  double min = -1.5;
  double max = 1.5;
  // Probability that a numeric feature is set exactly onto one of the axis
  // thresholds the tree uses for it, to exercise boundary ties.
  double snap_probability = 0.0;
};

FeatureVector random_input(Rng& rng, const FeatureSchema& schema, const RandomInputParams& params = {});
FeatureVector random_input(Rng& rng, const DecisionTree& tree, const RandomInputParams& params);

}  // namespace arbo
