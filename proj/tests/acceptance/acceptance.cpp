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


// Acceptance suite. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "arbo/cli.hpp"
#include "arbo/ensemble.hpp"
#include "arbo/error.hpp"
#include "arbo/inference.hpp"
#include "arbo/model_io.hpp"
#include "arbo/random.hpp"
#include "arbo/tensorizer.hpp"
#include "arbo/validator.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace arbo;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures with the first few messages kept for the report.
class Tally {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (samples_.size() < 3) samples_.push_back(what);
  }
  long checks() const { return checks_; }
  long failures() const { return failures_; }
  Outcome outcome(const std::string& summary) const {
    std::ostringstream s;
    s << summary << "; " << checks_ << " checks, " << failures_ << " failures";
    for (const auto& m : samples_) s << "; " << m;
    return {failures_ == 0 && checks_ > 0, s.str()};
  }

 private:
  long checks_ = 0;
  long failures_ = 0;
  std::vector<std::string> samples_;
};

const SchemaPtr& mixed_schema() {
  static const SchemaPtr schema = make_schema(6, 2, 5);
  return schema;
}

// Tree k of the fuzz corpus: 2..64 leaves. Three in four trees mix oblique
// and categorical tests into the axis-aligned ones; the rest are
// axis-aligned with constant leaves so the sum-product form exists.
DecisionTree fuzz_tree(Rng& rng, int k) {
  RandomTreeParams p;
  if (k % 4 != 0) {
    p.oblique_fraction = 0.2;
    p.categorical_fraction = 0.2;
    p.categorical_features = 2;
  }
  return generate_random_tree(rng, 2 + rng() % 63, mixed_schema(), p);
}

bool off_boundary(const TreeTuple& t, const FeatureVector& x) {
  for (double m : test_margins(t, x)) {
    if (m == 0.0) return false;
  }
  return true;
}

std::string vec(const std::vector<double>& v) {
  std::ostringstream s;
  s << "(";
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  s << ")";
  return s.str();
}

// 1 -------------------------------------------------------------------------
Outcome golden_example() {
  Tally t;
  const ModelDocument doc = load_model(fixture::path("fig1_tree.arbo.json"));
  const TreeTuple tuple = compile(*doc.tree);
  const std::vector<double> x = {2, 1, 2, 2};
  const auto margins = test_margins(tuple, x);
  const auto h = test_phase(tuple, x);
  const auto b = traversal_phase(tuple.bits, h);
  t.check(margins == std::vector<double>{1, -3, -1, -1, -3}, "h~ = " + vec(margins));
  t.check(h == std::vector<double>{1, 0, 0, 0, 0}, "h = " + vec(h));
  t.check(b == std::vector<double>{0, 0, 0, 0, 1, 1}, "b = " + vec(b));
  t.check(first_argmax(b) == 4, "i != v5");
  const Prediction p = predict_matrix(tuple, x);
  t.check(p.leaf == 4 && p.value == 5.0, "prediction is not v5");
  const std::vector<double> y = {1, 1, 2, 3};
  t.check(predict_matrix(tuple, y).leaf == 0, "second input does not reach v1");

  const ModelDocument golden = load_model(fixture::path("fig1_tuple.arbo.json"));
  for (const auto& in : {x, y}) {
    const int leaf = evaluate_classic(*doc.tree, in).leaf_index;
    t.check(predict_matrix(*golden.tuple, in).leaf == leaf, "golden tuple disagrees");
    t.check(predict_bitwise(tuple, in).leaf == leaf, "bitwise disagrees");
    t.check(predict_ternary(ternary_form(tuple), in).leaf == leaf, "ternary disagrees");
  }
  return t.outcome("x=(2,1,2,2) -> v5, x=(1,1,2,3) -> v1");
}

// 2 -------------------------------------------------------------------------
Outcome backend_equivalence() {
  Tally t;
  Rng rng(20260101);
  long sum_product_cases = 0;
  for (int k = 0; k < 1000; ++k) {
    const DecisionTree tree = fuzz_tree(rng, k);
    const TreeTuple tuple = compile(tree);
    const TernaryTuple ternary = ternary_form(tuple);
    const BitwiseTree bitwise(std::make_shared<const TreeTuple>(tuple));
    std::optional<SumProductForm> sp;
    try {
      sp = sum_product_form(tree);
    } catch (const UnsupportedFormError&) {
    }
    for (int r = 0; r < 100; ++r) {
      const FeatureVector x = random_input(rng, tree, {-1.5, 1.5, 0.1});
      const LeafOutcome classic = evaluate_classic(tree, x);
      const int leaf = classic.leaf_index;
      const bool agree = oracle::walk(tree, x) == leaf && predict_matrix(tuple, x).leaf == leaf &&
                         bitwise.exit_leaf(x) == leaf && predict_bitwise(tuple, x).leaf == leaf &&
                         predict_ternary(ternary, x).leaf == leaf;
      t.check(agree, "tree " + std::to_string(k) + " input " + std::to_string(r));
      if (sp && off_boundary(tuple, x)) {
        ++sum_product_cases;
        t.check(predict_sum_product(*sp, x) == classic.value,
                "sum-product tree " + std::to_string(k) + " input " + std::to_string(r));
      }
    }
  }
  t.check(sum_product_cases > 0, "sum-product never exercised");
  return t.outcome("1000 trees x 100 inputs, " + std::to_string(sum_product_cases) + " off-boundary sum-product cases");
}

// 3 -------------------------------------------------------------------------
BitMatrix complement_matrix(const BitMatrix& b) {
  BitMatrix c(b.rows(), b.cols());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = 1 - b(i, j);
  }
  return c;
}

Outcome lemma_suite() {
  Tally t;
  Rng rng(20260202);
  int cross_checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const DecisionTree tree = fuzz_tree(rng, k);
    const BitMatrix b = compile(tree, k % 2 ? InternalOrdering::kPreorder : InternalOrdering::kBfs).bits;
    const int nl = static_cast<int>(b.cols());
    const ValidationReport r = check_four_rules(b);
    const std::string id = "B " + std::to_string(k);
    t.check(r.valid, id + " fails the four rules");
    t.check(r.rank == nl, id + " rank");
    t.check(rank_exact(complement_matrix(b)) == nl, id + " complement rank");
    t.check(r.augmented_det_nonzero, id + " augmented determinant");
    t.check(check_complement_pairs(b), id + " has a complement column pair");
    if (b.rows() <= 16) {
      ++cross_checked;
      auto aug = oracle::to_long(b);
      for (auto& row : aug) row.push_back(1);
      t.check(oracle::rank_rational(oracle::to_long(b)) == nl, id + " oracle rank");
      t.check(oracle::det_rational(aug) != 0, id + " oracle determinant");
    }
  }
  const BitMatrix counter = load_model(fixture::path("counterexample_matrix.arbo.json")).matrix.value();
  t.check(!check_four_rules(counter).valid, "counterexample accepted");
  return t.outcome("1000 fuzzed B, " + std::to_string(cross_checked) + " cross-checked with rational elimination");
}

// 4 -------------------------------------------------------------------------
Outcome round_trip() {
  Tally t;
  Rng rng(20260303);
  for (int k = 0; k < 1000; ++k) {
    const DecisionTree tree = fuzz_tree(rng, k);
    for (InternalOrdering o : {InternalOrdering::kBfs, InternalOrdering::kPreorder}) {
      const TreeTuple tuple = compile(tree, o);
      t.check(same_shape(decode_structure(tuple.bits).shape, shape_of(tree)), "fuzzed tree " + std::to_string(k));
      t.check(trees_equal(to_tree(tuple), tree), "to_tree " + std::to_string(k));
    }
  }
  bool degenerate = false;
  try {
    compile(fixture::single_leaf_tree());
  } catch (const DegenerateTreeError&) {
    degenerate = true;
  }
  t.check(degenerate, "single leaf tree compiled");
  const auto schema = fixture::numeric_schema(2);
  std::string counts;
  for (std::size_t leaves = 2; leaves <= 6; ++leaves) {
    std::size_t n = 0;
    oracle::for_each_shape(leaves, [&](const oracle::Shape& s) {
      ++n;
      const DecisionTree tree = oracle::tree_from_shape(s, schema);
      const BitMatrix b = compile(tree).bits;
      t.check(b == oracle::structure_matrix_by_definition(s), "definition " + oracle::shape_string(s));
      t.check(decode_structure(b).shape.to_string() == oracle::shape_string(s), "decode " + oracle::shape_string(s));
    });
    t.check(n == oracle::catalan(leaves - 1), "shape count at " + std::to_string(leaves) + " leaves");
    counts += (counts.empty() ? "" : ",") + std::to_string(n);
  }
  return t.outcome("1000 fuzzed trees; exhaustive shape counts " + counts);
}

// 5 -------------------------------------------------------------------------
Outcome invariance_suite() {
  Tally t;
  Rng rng(20260404);
  const std::vector<Activation> acts = {Activation::relu(), Activation::scaled_relu(3.5),
                                        Activation::rectified_quadratic()};
  std::uniform_real_distribution<double> pos(1e-3, 1e3);
  long pairs = 0;
  for (int k = 0; k < 1000; ++k) {
    const TreeTuple tuple = compile(fuzz_tree(rng, k));
    PositiveScale scale;
    for (std::size_t j = 0; j < tuple.n_internal(); ++j) scale.alpha.push_back(pos(rng));
    const GeneralizedB scaled = apply_generalized_B(tuple, scale);
    const GeneralizedB negated = apply_generalized_B(tuple, ZeroNegate{-pos(rng)});
    for (int r = 0; r < 10; ++r, ++pairs) {
      const FeatureVector x = random_input(rng, *tuple.schema, {-1.5, 1.5, 0.2});
      const int leaf = predict_matrix(tuple, x).leaf;
      bool same = true;
      for (const Activation& a : acts) {
        same = same && predict_matrix(tuple, x, a).leaf == leaf;
        same = same && predict_matrix(tuple, scaled, x, a).leaf == leaf;
        same = same && predict_matrix(tuple, negated, x, a).leaf == leaf;
      }
      same = same && predict_matrix(tuple, scaled, x).leaf == leaf && predict_matrix(tuple, negated, x).leaf == leaf;
      t.check(same, "tree " + std::to_string(k) + " input " + std::to_string(r));
    }
  }
  // The printed real-valued matrix for the worked example.
  const TreeTuple fig = compile(fixture::fig1_tree());
  const GeneralizedB printed = GeneralizedB::make(
      DenseMatrix::from_rows({{-2, -200, 2, -3, 1},
                              {-3, -400, 2, 4, -1},
                              {-4, -4, 2, 4, 1},
                              {-5, 20, 2, 4, 1},
                              {5.1, 20, -2, 4, 1},
                              {5.1, 20, 2, 4, 1}}),
      GeneralizedB::Provenance::kZeroNegated, fig.bits);
  std::uniform_int_distribution<int> cell(0, 12);
  for (int r = 0; r < 10000; ++r) {
    FeatureVector x(4);
    for (double& v : x) v = cell(rng) * 0.5;
    const int leaf = predict_matrix(fig, x).leaf;
    bool same = predict_matrix(fig, printed, x).leaf == leaf;
    for (const Activation& a : acts) same = same && predict_matrix(fig, printed, x, a).leaf == leaf;
    t.check(same, "printed matrix input " + std::to_string(r));
  }
  return t.outcome(std::to_string(pairs) + " fuzzed (tree, x) pairs plus 10000 inputs on the printed real B");
}

// 6 -------------------------------------------------------------------------
Outcome and_equals_argmax() {
  Tally t;
  Rng rng(20260505);
  const auto schema = fixture::numeric_schema(2);
  for (int k = 0; k < 10000; ++k) {
    const BitMatrix b = compile(generate_random_tree(rng, 2 + rng() % 150, schema)).bits;
    std::vector<int> cols;
    std::vector<double> h(b.cols(), 0.0);
    const unsigned density = 1 + rng() % 4;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      if (rng() % density == 0) {
        cols.push_back(static_cast<int>(j));
        h[j] = 1.0;
      }
    }
    t.check(leftmost_of_and(b, cols) == first_argmax(traversal_phase(b, h)), "pair " + std::to_string(k));
  }
  return t.outcome("10000 (B, false subset) pairs with 2..151 leaves");
}

// 7 -------------------------------------------------------------------------
Outcome characteristic_vectors() {
  Tally t;
  const TreeTuple fig = compile(fixture::fig1_tree());
  t.check(characteristic_vector(fig, 4) == std::vector<std::uint8_t>{1, 0, 0, 0, 0}, "v5");
  t.check(characteristic_vector(fig, 5) == std::vector<std::uint8_t>{1, 0, 1, 0, 0}, "v6");
  long shapes = 0;
  for (std::size_t leaves = 2; leaves <= 13; ++leaves) {
    oracle::for_each_shape(leaves, [&](const oracle::Shape& s) {
      ++shapes;
      const BitMatrix b = oracle::structure_matrix_by_definition(s);
      const auto minimal = oracle::minimal_characteristic_vectors(b);
      for (std::size_t i = 0; i < leaves; ++i) {
        const auto u = characteristic_vector(b, static_cast<int>(i));
        std::uint32_t packed = 0;
        for (std::size_t j = 0; j < u.size(); ++j) packed |= std::uint32_t(u[j]) << j;
        const bool ok = minimal[i].size() == 1 && minimal[i][0] == packed;
        t.check(ok, oracle::shape_string(s) + " leaf " + std::to_string(i));
      }
    });
  }
  return t.outcome("Fig. 1 v5/v6 and " + std::to_string(shapes) + " shapes with n_L <= 12");
}

// 8 -------------------------------------------------------------------------
Outcome sparsemax() {
  Tally t;
  const auto p = weighted_sparsemax(std::vector<double>{1, 2}, std::vector<double>{1, 0.5});
  t.check(std::abs(p[0] - 1.0 / 3) <= 1e-12 && std::abs(p[1] - 2.0 / 3) <= 1e-12, "z=(1,2), w=(1,1/2)");
  Rng rng(20260606);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  double worst_kkt = 0.0, worst_sum = 0.0, worst_grid = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng() % 16;
    std::vector<double> z(n), w(n);
    for (double& v : z) v = g(rng);
    for (double& v : w) v = u(rng);
    std::sort(w.begin(), w.end(), std::greater<>());
    for (std::size_t i = 1; i < n; ++i) {
      if (!(w[i] < w[i - 1])) w[i] = std::nextafter(w[i - 1], 0.0);
    }
    const auto s = weighted_sparsemax(z, w);
    double sum = 0.0;
    bool nonneg = true;
    for (double v : s) {
      sum += v;
      nonneg = nonneg && v >= 0.0;
    }
    const double kkt = oracle::sparsemax_kkt_residual(s, z, w);
    worst_kkt = std::max(worst_kkt, kkt);
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    t.check(nonneg && kkt <= 1e-10 && std::abs(sum - 1.0) <= 1e-12, "case " + std::to_string(k));
    if (n <= 4 && k % 4 == 0) {
      const auto o = oracle::sparsemax_search(z, w);
      for (std::size_t i = 0; i < n; ++i) worst_grid = std::max(worst_grid, std::abs(o[i] - s[i]));
      bool close = true;
      for (std::size_t i = 0; i < n; ++i) close = close && std::abs(o[i] - s[i]) <= 1e-4;
      t.check(close, "grid case " + std::to_string(k));
    }
  }
  std::ostringstream s;
  s << "max KKT residual " << worst_kkt << ", max |sum-1| " << worst_sum << ", max grid gap " << worst_grid;
  return t.outcome(s.str());
}

// 9 -------------------------------------------------------------------------
Outcome soft_limit() {
  Tally t;
  Rng rng(20260707);
  const auto schema = fixture::numeric_schema(5);
  RandomTreeParams p;
  p.linear_leaf_fraction = 0.2;
  const SoftSelector sharp = SoftSelector::softmax(1e-3);
  long pairs = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const TreeTuple tuple = compile(generate_random_tree(rng, 2 + rng() % 63, schema, p));
    int found = 0;
    for (int attempt = 0; attempt < 2000 && found < 10; ++attempt) {
      // Every tenth attempt pushes all features above the threshold range,
      // which makes every test false and the scores tie-free.
      FeatureVector x = attempt % 10 == 9 ? FeatureVector(5, 2.0) : random_input(rng, *schema);
      const auto b = traversal_phase(tuple.bits, test_phase(tuple, x));
      const double top = *std::max_element(b.begin(), b.end());
      if (std::count(b.begin(), b.end(), top) != 1) continue;
      ++found;
      ++pairs;
      const double hard = predict_matrix(tuple, x).value;
      const double soft = predict_soft(tuple, x, sharp);
      const double rel = std::abs(soft - hard) / std::max(1.0, std::abs(hard));
      worst = std::max(worst, rel);
      t.check(rel <= 1e-6, "tree " + std::to_string(k));
    }
    t.check(found > 0, "tree " + std::to_string(k) + " has no tie-free input");
  }
  std::ostringstream s;
  s << pairs << " tie-free (tree, x) pairs on 100 trees, max relative gap " << worst;
  return t.outcome(s.str());
}

// 10 ------------------------------------------------------------------------
Outcome bench_harness() {
  Tally t;
  const auto dir = std::filesystem::temp_directory_path() / "arbo_acceptance";
  std::filesystem::create_directories(dir);
  const std::string model = (dir / "ensemble.arbo.json").string();
  const std::string data = (dir / "rows.csv").string();
  const std::string report = (dir / "bench.json").string();
  std::ostringstream out, err;
  int code = run_cli({"synth", "--seed", "10", "--trees", "500", "--leaves", "64", "--features", "10", "--rows",
                      "100000", "--model-out", model, "--data-out", data},
                     out, err);
  t.check(code == kExitOk, "synth failed: " + err.str());
  code = run_cli({"bench", "--model", model, "--data", data, "--backends", "classic,matrix,bitwise", "--reps", "5",
                  "-o", report},
                 out, err);
  t.check(code == kExitOk, "bench failed: " + err.str());
  if (code != kExitOk) return t.outcome("bench did not run");
  const auto j = nlohmann::json::parse(read_text_file(report));
  t.check(j.at("verified") == true, "report not verified");
  t.check(j.at("verified_rows") == 100000, "verified rows");
  std::vector<std::string> names;
  std::ostringstream rates;
  for (const auto& e : j.at("backends")) {
    names.push_back(e.at("backend"));
    t.check(e.at("trees") == 500 && e.at("leaves") == 64 && e.at("batch_size") == 100000 && e.at("repetitions") == 5,
            "entry shape");
    rates << " " << e.at("backend").get<std::string>() << "=" << std::lround(e.at("rows_per_second").get<double>())
          << " rows/s";
  }
  t.check(names == std::vector<std::string>{"classic", "matrix", "bitwise"}, "backend coverage");
  t.check(!j.contains("speedup"), "report claims a speedup");
  std::filesystem::remove_all(dir);
  return t.outcome("500 trees x 64 leaves x 100000 rows, median of 5;" + rates.str());
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;  // 0: no limit stated
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "golden example", 1.0, golden_example},
      {2, "backend equivalence", 60.0, backend_equivalence},
      {3, "lemma suite", 30.0, lemma_suite},
      {4, "round trip", 0.0, round_trip},
      {5, "invariance suite", 0.0, invariance_suite},
      {6, "AND equals first argmax", 0.0, and_equals_argmax},
      {7, "characteristic vectors", 0.0, characteristic_vectors},
      {8, "weighted sparsemax", 0.0, sparsemax},
      {9, "soft limit", 0.0, soft_limit},
      {10, "bench harness", 300.0, bench_harness},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0.0 && seconds >= c.limit_seconds) {
      o.pass = false;
      o.detail += "; over the " + std::to_string(static_cast<int>(c.limit_seconds)) + " s limit";
    }
    failed += !o.pass;
    std::printf("%s  [%2d] %-24s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), seconds,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
