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
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "arbo/error.hpp"
#include "arbo/model_io.hpp"
#include "arbo/random.hpp"
#include "fixtures.hpp"

using namespace arbo;

namespace {

std::string with_replaced(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

SchemaPtr mixed_schema() {
  return std::make_shared<const FeatureSchema>(FeatureSchema({{"age", FeatureType::kNumeric, {}},
                                                              {"colour", FeatureType::kCategorical, {"red", "green", "blue"}},
                                                              {"height", FeatureType::kNumeric, {}}}));
}

}  // namespace

TEST_CASE("fixtures load to the worked example") {
  const ModelDocument tree = load_model(fixture::path("fig1_tree.arbo.json"));
  REQUIRE(tree.kind == PayloadKind::kTree);
  CHECK(trees_equal(*tree.tree, fixture::fig1_tree()));

  const ModelDocument tuple = load_model(fixture::path("fig1_tuple.arbo.json"));
  REQUIRE(tuple.kind == PayloadKind::kTuple);
  CHECK(tuple.tuple->bits == compile(fixture::fig1_tree()).bits);
  CHECK(tuple.tuple->internal_order.size() == 5);
  CHECK(trees_equal(to_tree(*tuple.tuple), fixture::fig1_tree()));

  const ModelDocument ternary = load_model(fixture::path("fig1_ternary.arbo.json"));
  REQUIRE(ternary.kind == PayloadKind::kTernary);
  CHECK(ternary.ternary->pattern == ternary_form(compile(fixture::fig1_tree())).pattern);

  const ModelDocument matrix = load_model(fixture::path("counterexample_matrix.arbo.json"));
  REQUIRE(matrix.kind == PayloadKind::kMatrix);
  CHECK(matrix.matrix->rows() == 6);
}

TEST_CASE("canonical dumps are byte-identical to the fixtures") {
  const DecisionTree fig = fixture::fig1_tree();
  CHECK(dump_model(ModelDocument::of(fig)) == read_text_file(fixture::path("fig1_tree.arbo.json")));
  CHECK(dump_model(ModelDocument::of(compile(fig))) == read_text_file(fixture::path("fig1_tuple.arbo.json")));
  CHECK(dump_model(ModelDocument::of(ternary_form(compile(fig)))) ==
        read_text_file(fixture::path("fig1_ternary.arbo.json")));
  for (const char* name : {"fig1_tree.arbo.json", "fig1_tuple.arbo.json", "fig1_ternary.arbo.json",
                           "counterexample_matrix.arbo.json"}) {
    const std::string text = read_text_file(fixture::path(name));
    CHECK(dump_model(parse_model(text)) == text);
    CHECK(canonical_json(text) == text);
  }
}

TEST_CASE("round trips of fuzzed trees, tuples and ensembles") {
  Rng rng(91);
  const SchemaPtr schema = make_schema(5, 2, 4);
  for (Task task : {Task::kRegression, Task::kClassification}) {
    RandomTreeParams p;
    p.task = task;
    p.oblique_fraction = 0.2;
    p.categorical_fraction = 0.2;
    p.categorical_features = 2;
    p.linear_leaf_fraction = task == Task::kRegression ? 0.3 : 0.0;
    std::vector<DecisionTree> trees;
    for (int k = 0; k < 40; ++k) {
      const DecisionTree tree = generate_random_tree(rng, 1 + rng() % 40, schema, p);
      const std::string text = dump_model(ModelDocument::of(tree));
      const ModelDocument back = parse_model(text);
      CHECK(trees_equal(*back.tree, tree));
      CHECK(dump_model(back) == text);
      if (tree.n_leaves() > 1) {
        for (InternalOrdering o : {InternalOrdering::kBfs, InternalOrdering::kPreorder}) {
          const TreeTuple t = compile(tree, o);
          const std::string tt = dump_model(ModelDocument::of(t));
          const ModelDocument tb = parse_model(tt);
          CHECK(tb.tuple->bits == t.bits);
          CHECK(tb.tuple->thresholds == t.thresholds);
          CHECK(tb.tuple->ordering == o);
          CHECK(trees_equal(to_tree(*tb.tuple), tree));
          CHECK(dump_model(tb) == tt);
          const std::string nt = dump_model(ModelDocument::of(ternary_form(t)));
          CHECK(dump_model(parse_model(nt)) == nt);
        }
      }
      trees.push_back(tree);
    }
    const Aggregation agg = task == Task::kRegression ? Aggregation::kSum : Aggregation::kVote;
    std::vector<double> weights;
    for (std::size_t k = 0; k < trees.size(); ++k) weights.push_back(0.1 * static_cast<double>(k) + 1.0 / 3.0);
    const EnsembleModel m(schema, task, agg, trees, weights);
    const std::string text = dump_model(ModelDocument::of(m));
    const ModelDocument back = parse_model(text);
    REQUIRE(back.ensemble->size() == trees.size());
    CHECK(back.ensemble->weights() == weights);
    CHECK(back.ensemble->aggregation() == agg);
    for (std::size_t k = 0; k < trees.size(); ++k) CHECK(trees_equal(*back.ensemble->member(k).tree, trees[k]));
    CHECK(dump_model(back) == text);
  }
}

TEST_CASE("vocabulary names and composed tests survive a round trip") {
  const SchemaPtr schema = mixed_schema();
  DecisionTree::Builder ib(schema, Task::kRegression);
  const NodeId a = ib.add_leaf(ConstantLeaf{0.25});
  const NodeId c = ib.add_leaf(LinearLeaf{{1.5, 0.0, -2.0}, 0.125});
  const DecisionTree inner = std::move(ib).build(ib.add_internal(AxisTest{2, 1.75}, a, c));

  DecisionTree::Builder b(schema, Task::kRegression);
  const NodeId l0 = b.add_leaf(ConstantLeaf{1});
  const NodeId l1 = b.add_leaf(ConstantLeaf{2});
  const NodeId l2 = b.add_leaf(ConstantLeaf{3});
  const NodeId l3 = b.add_leaf(ConstantLeaf{0.1});
  const NodeId n2 = b.add_internal(ComposedTest{std::make_shared<const DecisionTree>(inner), 0.5}, l2, l3);
  const NodeId n1 = b.add_internal(CategoricalTest{1, {0, 2}}, l0, l1);
  const NodeId n0 = b.add_internal(ObliqueTest{{0.5, 0.0, -1.0}, 0.2}, n1, n2);
  const DecisionTree tree = std::move(b).build(n0);

  const std::string text = dump_model(ModelDocument::of(tree));
  CHECK(text.find("\"blue\"") != std::string::npos);
  CHECK(text.find("\"composed\"") != std::string::npos);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  const ModelDocument back = parse_model(text);
  CHECK(trees_equal(*back.tree, tree));
  CHECK(*back.schema == *schema);

  const TreeTuple t = compile(tree);
  const std::string tt = dump_model(ModelDocument::of(t));
  const ModelDocument tb = parse_model(tt);
  CHECK(trees_equal(to_tree(*tb.tuple), tree));
}

TEST_CASE("document errors") {
  const std::string good = read_text_file(fixture::path("fig1_tuple.arbo.json"));
  CHECK_THROWS_AS(parse_model("{not json"), MalformedDocumentError);
  CHECK_THROWS_AS(parse_model("[]"), MalformedDocumentError);
  CHECK_THROWS_AS(parse_model(with_replaced(good, "\"1.0\"", "\"2.0\"")), UnknownVersionError);
  CHECK_THROWS_AS(parse_model(with_replaced(good, "\"arbo-model\"", "\"other\"")), MalformedDocumentError);
  CHECK_THROWS_AS(parse_model(with_replaced(good, "\"kind\": \"tuple\"", "\"kind\": \"forest\"")),
                  MalformedDocumentError);
  CHECK_THROWS_AS(parse_model(with_replaced(good, "\"11111\"]", "\"11111\", \"11111\"]")), MalformedDocumentError);
  CHECK_THROWS_AS(parse_model(with_replaced(good, "\"t\": [1, 4, 3, 2, 5]", "\"t\": [1, 4, 3, 2]")),
                  MalformedDocumentError);
  CHECK_THROWS_AS(parse_model(with_replaced(good, "\"t\": [1, 4, 3, 2, 5]", "\"t\": \"x\"")),
                  MalformedDocumentError);
  CHECK_THROWS_AS(parse_model(with_replaced(good, "\"00101\"", "\"00201\"")), MalformedDocumentError);
  CHECK_THROWS_AS(parse_model(with_replaced(good, "\"task\": \"regression\"", "\"task\": \"ranking\"")),
                  MalformedDocumentError);

  const std::string tree = read_text_file(fixture::path("fig1_tree.arbo.json"));
  CHECK_THROWS_AS(parse_model(with_replaced(tree, "\"feature\": \"f4\"", "\"feature\": \"f9\"")), InputError);

  const std::string bad = read_text_file(fixture::path("counterexample_tuple.arbo.json"));
  try {
    parse_model(bad);
    FAIL("expected ValidatorFailureError");
  } catch (const ValidatorFailureError& e) {
    CHECK(std::string(e.what()).find("rule") != std::string::npos);
  }
  const ModelDocument raw = parse_model(bad, LoadOptions{false});
  CHECK(raw.tuple->bits.rows() == 6);

  try {
    load_model("/nonexistent/model.arbo.json");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/model.arbo.json") != std::string::npos);
  }
}

TEST_CASE("save and load") {
  const std::string path = (std::filesystem::temp_directory_path() / "arbo_unit_save.arbo.json").string();
  save_model(ModelDocument::of(fixture::fig1_tree()), path);
  CHECK(read_text_file(path) == read_text_file(fixture::path("fig1_tree.arbo.json")));
  std::remove(path.c_str());
  CHECK_THROWS_AS(save_model(ModelDocument::of(fixture::fig1_tree()), "/nonexistent/dir/x.json"), IoError);
}

TEST_CASE("format_double") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(0.1) == "0.10000000000000001");
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) / 3.0;
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("canonical_json") {
  CHECK(canonical_json(R"({"b": 1, "a": [1, 2], "c": {"z": [], "y": [[1], [2]]}})") ==
        "{\n  \"a\": [1, 2],\n  \"b\": 1,\n  \"c\": {\n    \"y\": [\n      [1],\n      [2]\n    ],\n"
        "    \"z\": []\n  }\n}\n");
  CHECK_THROWS_AS(canonical_json("{"), MalformedDocumentError);
}

TEST_CASE("csv datasets") {
  const SchemaPtr fig = fixture::numeric_schema(4);
  const Dataset d = load_dataset_csv(fixture::path("fig1_inputs.csv"), fig);
  REQUIRE(d.size() == 2);
  CHECK(std::vector<double>(d.row(0).begin(), d.row(0).end()) == std::vector<double>{2, 1, 2, 2});
  CHECK(std::vector<double>(d.row(1).begin(), d.row(1).end()) == std::vector<double>{1, 1, 2, 3});

  CHECK(parse_dataset_csv("f1,f2,f3,f4\n", fig).size() == 0);
  CHECK(parse_dataset_csv("f1,f2,f3,f4\r\n1,2,3,4\r\n", fig).size() == 1);
  CHECK_THROWS_AS(parse_dataset_csv("f1,f2,f4,f3\n1,2,3,4\n", fig), InputError);
  CHECK_THROWS_AS(parse_dataset_csv("", fig), InputError);
  try {
    parse_dataset_csv("f1,f2,f3,f4\n1,2,3,4\n1,2,x,4\n", fig);
    FAIL("expected RowError");
  } catch (const RowError& e) {
    CHECK(e.row() == 1);
  }
  try {
    parse_dataset_csv("f1,f2,f3,f4\n1,2,3\n", fig);
    FAIL("expected RowError");
  } catch (const RowError& e) {
    CHECK(e.row() == 0);
  }
  CHECK_THROWS_AS(parse_dataset_csv("f1,f2,f3,f4\n1,2,nan,4\n", fig), RowError);

  const SchemaPtr mixed = mixed_schema();
  const Dataset m = parse_dataset_csv("age,colour,height\n30,blue,1.8\n-1e-3,red,0\n", mixed);
  CHECK(m.rows(0, 1) == 2.0);
  CHECK(m.rows(1, 0) == -1e-3);
  CHECK_THROWS_AS(parse_dataset_csv("age,colour,height\n30,purple,1.8\n", mixed), RowError);

  Rng rng(3);
  Dataset r{mixed, DenseMatrix(50, 3)};
  for (std::size_t i = 0; i < 50; ++i) {
    const FeatureVector x = random_input(rng, *mixed);
    std::copy(x.begin(), x.end(), r.rows.row(i).begin());
  }
  CHECK(parse_dataset_csv(dump_dataset_csv(r), mixed).rows == r.rows);
}

TEST_CASE("bench report json") {
  BenchReport r;
  r.workers = 2;
  r.verified_rows = 10;
  r.environment = "test";
  BenchEntry e;
  e.backend = Backend::kBitwise;
  e.trees = 3;
  e.max_leaves = 8;
  e.batch_size = 10;
  e.repetitions = 5;
  e.median_seconds = 0.5;
  e.rows_per_second = 20;
  e.iteration_order = "interleaved";
  r.entries.push_back(e);
  const auto j = nlohmann::json::parse(bench_report_json(r));
  REQUIRE(j.contains("backends"));
  CHECK(j["backends"].size() == 1);
  CHECK(j["backends"][0]["backend"] == "bitwise");
  CHECK(j["backends"][0]["leaves"] == 8);
  CHECK(j["backends"][0]["median_seconds"] == 0.5);
  CHECK(j["verified"] == true);
  CHECK(j["verified_rows"] == 10);
}
