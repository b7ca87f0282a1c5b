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


#include "arbo/selfcheck.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

#include "arbo/error.hpp"
#include "arbo/inference.hpp"
#include "arbo/model_io.hpp"
#include "arbo/random.hpp"
#include "arbo/validator.hpp"

namespace arbo {

namespace {

constexpr const char* kLemmas = "validator-lemmas";
constexpr const char* kRoundTrip = "round-trip";
constexpr const char* kBackends = "backend-equivalence";

std::optional<std::string> lemma_failure(const BitMatrix& b) {
  const ValidationReport r = check_four_rules(b);
  if (!r.valid) {
    const auto& v = r.violations.front();
    return "four-rules check failed: rule " + std::to_string(v.rule) + ": " + v.message;
  }
  const int nl = static_cast<int>(b.cols());
  if (r.rank != nl) return "rank " + std::to_string(r.rank) + " != " + std::to_string(nl);
  if (const int rc = rank_exact(b.complement()); rc != nl) {
    return "complement rank " + std::to_string(rc) + " != " + std::to_string(nl);
  }
  if (!r.augmented_det_nonzero) return "augmented determinant is zero";
  if (!check_complement_pairs(b)) return "two columns are complements of each other";
  return std::nullopt;
}

std::optional<std::string> round_trip_failure(const TreeTuple& tuple, const DecisionTree* tree) {
  DecodedStructure d;
  try {
    d = decode_structure(tuple.bits);
  } catch (const InvalidStructureError& e) {
    return std::string("decode failed: ") + e.what();
  }
  if (tuple.ordering == InternalOrdering::kBfs && structure_matrix(d.shape, InternalOrdering::kBfs).bits != tuple.bits) {
    return "re-encoding the decoded shape " + d.shape.to_string() + " does not reproduce B";
  }
  if (tree) {
    const TreeShape want = shape_of(*tree);
    if (!same_shape(d.shape, want)) return "decoded " + d.shape.to_string() + ", tree is " + want.to_string();
  }
  return std::nullopt;
}

struct BackendMismatch {
  std::string detail;
  std::size_t input = 0;
};

std::string vec_text(std::span<const double> x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << format_double(x[i]);
  os << ")";
  return os.str();
}

std::optional<BackendMismatch> backend_failure(const DecisionTree& ref, const TreeTuple& tuple,
                                               const std::vector<FeatureVector>& inputs) {
  const TuplePtr shared(std::shared_ptr<void>{}, &tuple);
  const BitwiseTree bitwise(shared);
  std::optional<TernaryTuple> ternary;
  try {
    ternary = ternary_form(tuple);
  } catch (const InvalidStructureError& e) {
    return BackendMismatch{std::string("ternary form unavailable: ") + e.what(), 0};
  }
  std::optional<SumProductForm> sp;
  try {
    sp = sum_product_form(ref);
  } catch (const UnsupportedFormError&) {
  }
  std::optional<TreeTuple> ref_tuple;
  if (sp) ref_tuple = compile(ref);

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const FeatureVector& x = inputs[i];
    const LeafOutcome c = evaluate_classic(ref, x);
    const auto fail = [&](const std::string& backend, int got) {
      return BackendMismatch{"x=" + vec_text(x) + ": classic leaf " + std::to_string(c.leaf_index) + ", " + backend +
                                 " leaf " + std::to_string(got),
                             i};
    };
    if (const int m = predict_matrix(tuple, x).leaf; m != c.leaf_index) return fail("matrix", m);
    if (const int b = bitwise.exit_leaf(x); b != c.leaf_index) return fail("bitwise", b);
    if (const int t = predict_ternary(*ternary, x).leaf; t != c.leaf_index) return fail("ternary", t);
    if (sp) {
      const auto margins = test_margins(*ref_tuple, x);
      const bool on_boundary = std::any_of(margins.begin(), margins.end(), [](double z) { return z == 0.0; });
      const double v = predict_sum_product(*sp, x);
      if (!on_boundary && v != c.value) {
        return BackendMismatch{"x=" + vec_text(x) + ": classic value " + format_double(c.value) +
                                   ", sum-product " + format_double(v),
                               i};
      }
    }
  }
  return std::nullopt;
}

// Runs the checks in order; `tree` is the ground truth when known.
std::optional<SelfcheckFailure> run_checks(const TreeTuple& tuple, const DecisionTree* tree,
                                           const std::vector<FeatureVector>& inputs, std::size_t* checks) {
  auto failure = [&](const char* check, std::string detail, std::vector<FeatureVector> xs) {
    SelfcheckFailure f;
    f.check = check;
    f.detail = std::move(detail);
    f.tuple = tuple;
    f.inputs = std::move(xs);
    return f;
  };
  if (checks) ++*checks;
  if (auto e = lemma_failure(tuple.bits)) return failure(kLemmas, *e, inputs);
  if (checks) ++*checks;
  if (auto e = round_trip_failure(tuple, tree)) return failure(kRoundTrip, *e, inputs);
  if (checks) ++*checks;
  const DecisionTree ref = tree ? *tree : to_tree(tuple);
  if (auto e = backend_failure(ref, tuple, inputs)) {
    std::vector<FeatureVector> one;
    if (e->input < inputs.size()) one.push_back(inputs[e->input]);
    return failure(kBackends, e->detail, std::move(one));
  }
  return std::nullopt;
}

// Copy of `tree` with node `target` replaced by the leftmost leaf of its
// subtree.
DecisionTree collapse(const DecisionTree& tree, NodeId target) {
  DecisionTree::Builder b(tree.schema_ptr(), tree.task());
  auto copy = [&](auto&& self, NodeId id) -> NodeId {
    const Node& n = tree.node(id);
    if (id == target) {
      NodeId leaf = id;
      while (!tree.node(leaf).is_leaf) leaf = tree.node(leaf).left;
      return b.add_leaf(tree.node(leaf).leaf);
    }
    if (n.is_leaf) return b.add_leaf(n.leaf);
    const NodeId l = self(self, n.left);
    const NodeId r = self(self, n.right);
    return b.add_internal(n.test, l, r);
  };
  const NodeId root = copy(copy, tree.root());
  return std::move(b).build(root);
}

SelfcheckFailure shrink(const DecisionTree& start, SelfcheckFailure failure) {
  DecisionTree tree = start;
  bool progress = true;
  while (progress && tree.n_internal() > 1) {
    progress = false;
    for (NodeId id : tree.internal_bfs()) {
      if (id == tree.root()) continue;
      DecisionTree smaller = collapse(tree, id);
      const TreeTuple t = compile(smaller, failure.tuple.ordering);
      auto f = run_checks(t, &smaller, failure.inputs, nullptr);
      if (f && f->check == failure.check) {
        f->case_index = failure.case_index;
        failure = std::move(*f);
        tree = std::move(smaller);
        progress = true;
        break;
      }
    }
  }
  return failure;
}

}  // namespace

SelfcheckResult run_selfcheck(const SelfcheckOptions& options) {
  if (options.count == 0) throw ConfigError("selfcheck: count must be >= 1");
  if (options.max_leaves < 2) throw ConfigError("selfcheck: max-leaves must be >= 2");
  if (options.inputs_per_tree == 0) throw ConfigError("selfcheck: need at least one input per tree");
  Rng rng(options.seed);
  const SchemaPtr schema = make_schema(5, 1, 4);
  SelfcheckResult result;
  for (std::size_t i = 0; i < options.count; ++i) {
    std::uniform_int_distribution<std::size_t> leaves(2, options.max_leaves);
    const std::size_t n = leaves(rng);
    RandomTreeParams params;
    // Every other tree is axis-aligned so the sum-product form gets exercised.
    if (i % 2 == 1) {
      params.oblique_fraction = 0.2;
      params.categorical_fraction = 0.2;
      params.categorical_features = 1;
    }
    const DecisionTree tree = generate_random_tree(rng, n, schema, params);
    TreeTuple tuple = compile(tree);
    if (options.inject_corruption) {
      std::uniform_int_distribution<std::size_t> row(0, tuple.bits.rows() - 1);
      std::uniform_int_distribution<std::size_t> col(0, tuple.bits.cols() - 1);
      const std::size_t r = row(rng);
      const std::size_t c = col(rng);
      tuple.bits(r, c) ^= 1;
    }
    std::vector<FeatureVector> inputs;
    for (std::size_t k = 0; k < options.inputs_per_tree; ++k) {
      inputs.push_back(random_input(rng, tree, RandomInputParams{-1.5, 1.5, 0.1}));
    }
    ++result.cases;
    if (auto f = run_checks(tuple, &tree, inputs, &result.checks)) {
      f->case_index = i;
      if (!options.inject_corruption) *f = shrink(tree, std::move(*f));
      result.passed = false;
      result.failure = std::move(*f);
      return result;
    }
  }
  return result;
}

std::optional<SelfcheckFailure> check_tuple(const TreeTuple& tuple, const std::vector<FeatureVector>& inputs) {
  return run_checks(tuple, nullptr, inputs, nullptr);
}

std::string reproducer_document(const SelfcheckFailure& failure, const SelfcheckOptions& options) {
  nlohmann::json doc = nlohmann::json::parse(dump_model(ModelDocument::of(failure.tuple)));
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& x : failure.inputs) inputs.push_back(x);
  doc["selfcheck"] = {{"check", failure.check},
                      {"detail", failure.detail},
                      {"seed", options.seed},
                      {"case", failure.case_index},
                      {"inputs", std::move(inputs)}};
  return canonical_json(doc.dump());
}

SelfcheckResult replay_reproducer(const std::string& text) {
  const ModelDocument doc = parse_model(text, LoadOptions{false});
  if (doc.kind != PayloadKind::kTuple) throw InputError("reproducer must hold a tuple payload");
  std::vector<FeatureVector> inputs;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("selfcheck") && j["selfcheck"].contains("inputs")) {
      for (const auto& x : j["selfcheck"]["inputs"]) inputs.push_back(x.get<FeatureVector>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedDocumentError(std::string("selfcheck block: ") + e.what());
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    try {
      doc.schema->check(inputs[i]);
    } catch (const InputError& e) {
      throw RowError(i, e.what());
    }
  }
  SelfcheckResult result;
  result.cases = 1;
  if (auto f = run_checks(*doc.tuple, nullptr, inputs, &result.checks)) {
    result.passed = false;
    result.failure = std::move(*f);
  }
  return result;
}

}  // namespace arbo
