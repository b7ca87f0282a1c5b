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

#include "arbo/random.hpp"

#include <algorithm>
#include <map>

#include "arbo/error.hpp"

namespace arbo {

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

bool coin(Rng& rng, double p) { return p > 0.0 && uniform(rng, 0.0, 1.0) < p; }

struct Sketch {
  int left = -1;
  int right = -1;
};

TestFunction random_test(Rng& rng, const FeatureSchema& schema, const RandomTreeParams& p,
                         const std::vector<std::size_t>& numeric, const std::vector<std::size_t>& categorical) {
  const double roll = uniform(rng, 0.0, 1.0);
  if (!categorical.empty() && roll < p.categorical_fraction) {
    const std::size_t j = categorical[pick(rng, categorical.size())];
    const std::size_t vocab = schema[j].vocabulary.size();
    CategoricalTest t{static_cast<int>(j), {}};
    // Nonempty subset; proper when the vocabulary allows it.
    while (t.categories.empty() || (vocab > 1 && t.categories.size() == vocab)) {
      t.categories.clear();
      for (std::size_t c = 0; c < vocab; ++c) {
        if (coin(rng, 0.5)) t.categories.push_back(static_cast<int>(c));
      }
    }
    return t;
  }
  if (!numeric.empty() && roll < p.categorical_fraction + p.oblique_fraction) {
    ObliqueTest t;
    t.weights.assign(schema.size(), 0.0);
    for (std::size_t j : numeric) t.weights[j] = uniform(rng, -1.0, 1.0);
    t.offset = uniform(rng, p.threshold_min, p.threshold_max);
    return t;
  }
  if (numeric.empty()) {
    throw InputError("random tree: schema has no numeric feature for an axis test");
  }
  const std::size_t j = numeric[pick(rng, numeric.size())];
  return AxisTest{static_cast<int>(j), uniform(rng, p.threshold_min, p.threshold_max)};
}

LeafModel random_leaf(Rng& rng, const FeatureSchema& schema, const RandomTreeParams& p,
                      const std::vector<std::size_t>& numeric) {
  if (p.task == Task::kClassification) {
    return ConstantLeaf{static_cast<double>(pick(rng, static_cast<std::size_t>(std::max(1, p.n_classes))))};
  }
  if (coin(rng, p.linear_leaf_fraction)) {
    LinearLeaf l;
    l.weights.assign(schema.size(), 0.0);
    for (std::size_t j : numeric) l.weights[j] = uniform(rng, -1.0, 1.0);
    l.offset = uniform(rng, p.leaf_min, p.leaf_max);
    return l;
  }
  return ConstantLeaf{uniform(rng, p.leaf_min, p.leaf_max)};
}

}  // namespace

SchemaPtr make_schema(std::size_t n_features, std::size_t categorical, std::size_t vocab) {
  if (categorical > n_features) throw InputError("more categorical features than features");
  std::vector<FeatureSpec> specs(n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    specs[j].name = "f" + std::to_string(j + 1);
    if (j >= n_features - categorical) {
      specs[j].type = FeatureType::kCategorical;
      for (std::size_t c = 0; c < vocab; ++c) specs[j].vocabulary.push_back("c" + std::to_string(c));
    }
  }
  return std::make_shared<const FeatureSchema>(std::move(specs));
}

DecisionTree generate_random_tree(Rng& rng, std::size_t n_leaves, const SchemaPtr& schema,
                                  const RandomTreeParams& params) {
  if (n_leaves == 0) throw InputError("random tree needs at least one leaf");

  std::vector<Sketch> sketch(1);
  std::vector<int> open_leaves{0};
  while (open_leaves.size() < n_leaves) {
    const std::size_t k = pick(rng, open_leaves.size());
    const int id = open_leaves[k];
    const int l = static_cast<int>(sketch.size());
    sketch.push_back({});
    sketch.push_back({});
    sketch[static_cast<std::size_t>(id)] = {l, l + 1};
    open_leaves[k] = l;
    open_leaves.push_back(l + 1);
  }

  std::vector<std::size_t> numeric, categorical;
  for (std::size_t j = 0; j < schema->size(); ++j) {
    (schema->is_categorical(j) ? categorical : numeric).push_back(j);
  }

  // Sketch ids are in creation order (parents before children), so assigning
  // tests and leaves in that order keeps the draw sequence shape-driven.
  DecisionTree::Builder builder(schema, params.task);
  std::vector<TestFunction> tests(sketch.size());
  std::vector<LeafModel> leaves(sketch.size());
  for (std::size_t i = 0; i < sketch.size(); ++i) {
    if (sketch[i].left >= 0) {
      tests[i] = random_test(rng, *schema, params, numeric, categorical);
    } else {
      leaves[i] = random_leaf(rng, *schema, params, numeric);
    }
  }
  std::vector<NodeId> ids(sketch.size(), kNoNode);
  for (std::size_t i = sketch.size(); i-- > 0;) {
    if (sketch[i].left < 0) {
      ids[i] = builder.add_leaf(std::move(leaves[i]));
    } else {
      ids[i] = builder.add_internal(std::move(tests[i]), ids[static_cast<std::size_t>(sketch[i].left)],
                                    ids[static_cast<std::size_t>(sketch[i].right)]);
    }
  }
  return std::move(builder).build(ids[0]);
}

DecisionTree generate_random_tree(std::uint64_t seed, std::size_t n_leaves, std::size_t n_features,
                                  const RandomTreeParams& params) {
  if (n_leaves == 0) throw InputError("random tree needs at least one leaf");
  Rng rng(seed);
  return generate_random_tree(rng, n_leaves,
                              make_schema(n_features, params.categorical_features, params.vocabulary_size),
                              params);
}

FeatureVector random_input(Rng& rng, const FeatureSchema& schema, const RandomInputParams& params) {
  FeatureVector x(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    x[j] = schema.is_categorical(j) ? static_cast<double>(pick(rng, schema[j].vocabulary.size()))
                                    : uniform(rng, params.min, params.max);
  }
  return x;
}

FeatureVector random_input(Rng& rng, const DecisionTree& tree, const RandomInputParams& params) {
  FeatureVector x = random_input(rng, tree.schema(), params);
  if (params.snap_probability <= 0.0) return x;
  std::map<int, std::vector<double>> thresholds;
  for (std::size_t id = 0; id < tree.node_count(); ++id) {
    const Node& n = tree.node(static_cast<NodeId>(id));
    if (!n.is_leaf) {
      if (const auto* a = std::get_if<AxisTest>(&n.test)) thresholds[a->feature].push_back(a->threshold);
    }
  }
  for (auto& [j, ts] : thresholds) {
    if (coin(rng, params.snap_probability)) x[static_cast<std::size_t>(j)] = ts[pick(rng, ts.size())];
  }
  return x;
}

}  // namespace arbo
