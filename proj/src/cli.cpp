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


#include "arbo/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iomanip>
#include <ostream>
#include <sstream>

#include "arbo/ensemble.hpp"
#include "arbo/error.hpp"
#include "arbo/inference.hpp"
#include "arbo/model_io.hpp"
#include "arbo/random.hpp"
#include "arbo/selfcheck.hpp"
#include "arbo/tensorizer.hpp"
#include "arbo/validator.hpp"

namespace arbo {

namespace {

// Writes to `path`, or to `out` when path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct CompileArgs {
  std::string model;
  std::string ordering = "bfs";
  std::string out;
};

int cmd_compile(const CompileArgs& a, std::ostream& out) {
  const ModelDocument doc = load_model(a.model);
  if (doc.kind != PayloadKind::kTree) throw InputError(a.model + ": compile expects a tree document");
  emit(a.out, dump_model(ModelDocument::of(compile(*doc.tree, parse_ordering(a.ordering)))), out);
  return kExitOk;
}

struct ExportArgs {
  std::string model;
  std::string to;
  std::string ordering = "bfs";
  std::string out;
};

int cmd_export(const ExportArgs& a, std::ostream& out) {
  const ModelDocument doc = load_model(a.model);
  const InternalOrdering ordering = parse_ordering(a.ordering);
  std::optional<DecisionTree> tree;
  switch (doc.kind) {
    case PayloadKind::kTree:
      tree = *doc.tree;
      break;
    case PayloadKind::kTuple:
      tree = to_tree(*doc.tuple);
      break;
    case PayloadKind::kTernary:
      throw UnsupportedFormError("ternary documents cannot be exported; keep the tree or tuple document");
    case PayloadKind::kEnsemble:
    case PayloadKind::kMatrix:
      throw InputError(a.model + ": export expects a tree or tuple document");
  }
  ModelDocument result;
  if (a.to == "tree") {
    result = ModelDocument::of(*tree);
  } else if (a.to == "tuple") {
    result = doc.kind == PayloadKind::kTuple && doc.tuple->ordering == ordering ? ModelDocument::of(*doc.tuple)
                                                                                : ModelDocument::of(compile(*tree, ordering));
  } else if (a.to == "ternary") {
    result = ModelDocument::of(ternary_form(doc.kind == PayloadKind::kTuple ? *doc.tuple : compile(*tree, ordering)));
  } else if (a.to == "matrix") {
    result = ModelDocument::of(compile(*tree, ordering).bits);
  } else {
    throw ConfigError("--to must be tree, tuple, ternary or matrix");
  }
  emit(a.out, dump_model(result), out);
  return kExitOk;
}

BitMatrix matrix_of(const ModelDocument& doc, const std::string& path) {
  if (doc.kind == PayloadKind::kTuple) return doc.tuple->bits;
  if (doc.kind == PayloadKind::kMatrix) return *doc.matrix;
  if (doc.kind == PayloadKind::kTree) return compile(*doc.tree).bits;
  throw InputError(path + ": expected a tree, tuple or matrix document");
}

int cmd_validate(const std::string& path, std::ostream& out) {
  const ModelDocument doc = load_model(path, LoadOptions{false});
  const BitMatrix b = matrix_of(doc, path);
  const ValidationReport r = check_four_rules(b);
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"rule", v.rule}, {"columns", v.columns}, {"rows", v.rows}, {"message", v.message}});
  }
  const nlohmann::json report = {{"valid", r.valid},
                                 {"violations", std::move(violations)},
                                 {"rows", b.rows()},
                                 {"columns", b.cols()},
                                 {"rank", r.rank},
                                 {"complement_rank", rank_exact(b.complement())},
                                 {"augmented_det_nonzero", r.augmented_det_nonzero},
                                 {"no_complement_pairs", check_complement_pairs(b)}};
  out << canonical_json(report.dump());
  return r.valid ? kExitOk : kExitDomain;
}

struct DecodeArgs {
  std::string model;
  std::string out;
};

int cmd_decode(const DecodeArgs& a, std::ostream& out) {
  const ModelDocument doc = load_model(a.model, LoadOptions{false});
  if (doc.kind == PayloadKind::kTuple) {
    emit(a.out, dump_model(ModelDocument::of(to_tree(*doc.tuple))), out);
    return kExitOk;
  }
  const DecodedStructure d = decode_structure(matrix_of(doc, a.model));
  std::ostringstream os;
  os << "shape: " << d.shape.to_string() << "\n";
  for (std::size_t c = 0; c < d.column_node.size(); ++c) {
    os << "column " << c << ": node " << d.column_node[c] << "\n";
  }
  for (std::size_t r = 0; r < d.row_node.size(); ++r) os << "row " << r << ": node " << d.row_node[r] << "\n";
  emit(a.out, os.str(), out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ScoringArgs {
  std::string backend = "matrix";
  std::string activation = "binarized-relu";
  std::string selector = "softmax";
  double temperature = 1.0;
  std::size_t workers = 1;
};

ScoringOptions scoring_options(const ScoringArgs& a) {
  ScoringOptions o;
  o.activation = Activation::from_name(a.activation);
  if (a.selector == "softmax") {
    if (!(a.temperature > 0.0)) throw ConfigError("--temperature must be > 0");
    o.selector = SoftSelector::softmax(a.temperature);
  } else if (a.selector == "sparsemax") {
    o.selector = SoftSelector::sparsemax();
  } else {
    throw ConfigError("--selector must be softmax or sparsemax");
  }
  return o;
}

// Single trees and tuples become one-member ensembles; tuples keep their
// column order.
EnsembleModel ensemble_of(const ModelDocument& doc, const std::string& path) {
  try {
    return as_ensemble(doc);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  ScoringArgs scoring;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const ModelDocument doc = load_model(a.model);
  const Dataset data = load_dataset_csv(a.data, doc.schema);
  const Backend backend = parse_backend(a.scoring.backend);
  const ScoringOptions options = scoring_options(a.scoring);
  std::ostringstream os;
  if (doc.kind == PayloadKind::kTernary) {
    if (backend != Backend::kTernary) throw ConfigError("ternary documents support only --backend ternary");
    os << "row_id,leaf_index,value\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
      Prediction p;
      try {
        p = predict_ternary(*doc.ternary, data.row(r));
      } catch (const RowError&) {
        throw;
      } catch (const InputError& e) {
        throw RowError(r, e.what());
      }
      os << r << "," << p.leaf << "," << format_double(p.value) << "\n";
    }
  } else if (doc.kind == PayloadKind::kEnsemble) {
    const auto values = score_batch(*doc.ensemble, data, backend, a.scoring.workers, options);
    os << "row_id,value\n";
    for (std::size_t r = 0; r < values.size(); ++r) os << r << "," << format_double(values[r]) << "\n";
  } else {
    const EnsembleModel model = ensemble_of(doc, a.model);
    // Schema errors surface with their row index before anything is printed.
    const auto values = score_batch(model, data, backend, a.scoring.workers, options);
    os << "row_id,leaf_index,value\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
      const Prediction p = score_member(model.member(0), data.row(r), backend, options);
      os << r << "," << p.leaf << "," << format_double(values[r]) << "\n";
    }
  }
  emit(a.out, os.str(), out);
  return kExitOk;
}

struct BenchArgs {
  std::string model;
  std::string data;
  std::string backends = "classic,matrix,bitwise";
  std::size_t reps = 5;
  std::string out;
  ScoringArgs scoring;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const ModelDocument doc = load_model(a.model);
  const EnsembleModel model = ensemble_of(doc, a.model);
  const Dataset data = load_dataset_csv(a.data, doc.schema);
  std::vector<Backend> backends;
  for (const auto& name : split_list(a.backends)) backends.push_back(parse_backend(name));
  const BenchReport report = run_bench(model, data, backends, a.reps, a.scoring.workers, scoring_options(a.scoring));
  emit(a.out, bench_report_json(report), out);
  if (!a.out.empty() && a.out != "-") {
    for (const auto& e : report.entries) {
      err << std::left << std::setw(11) << to_string(e.backend) << " median " << std::fixed << std::setprecision(4)
          << e.median_seconds << " s, " << std::setprecision(0) << e.rows_per_second << " rows/s ("
          << e.iteration_order << ")\n";
    }
    err << std::defaultfloat;
  }
  return kExitOk;
}

struct SynthArgs {
  std::uint64_t seed = 1;
  std::size_t trees = 500;
  std::size_t leaves = 64;
  std::size_t features = 10;
  std::size_t rows = 100000;
  std::string task = "regression";
  std::string model_out;
  std::string data_out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.leaves == 0 || a.features == 0) throw ConfigError("--leaves and --features must be >= 1");
  if (a.model_out.empty() || a.data_out.empty()) throw ConfigError("--model-out and --data-out are required");
  Rng rng(a.seed);
  const SchemaPtr schema = make_schema(a.features, 0, 0);
  RandomTreeParams params;
  Aggregation agg = Aggregation::kSum;
  if (a.task == "classification") {
    params.task = Task::kClassification;
    agg = Aggregation::kVote;
  } else if (a.task != "regression") {
    throw ConfigError("--task must be regression or classification");
  }
  std::vector<DecisionTree> trees;
  for (std::size_t k = 0; k < a.trees; ++k) trees.push_back(generate_random_tree(rng, a.leaves, schema, params));
  EnsembleModel model(schema, params.task, agg, std::move(trees));
  Dataset data;
  data.schema = schema;
  data.rows = DenseMatrix(a.rows, a.features);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const FeatureVector x = random_input(rng, *schema);
    std::copy(x.begin(), x.end(), data.rows.row(r).begin());
  }
  save_model(ModelDocument::of(std::move(model)), a.model_out);
  write_text_file(a.data_out, dump_dataset_csv(data));
  out << "wrote " << a.trees << " trees to " << a.model_out << " and " << a.rows << " rows to " << a.data_out << "\n";
  return kExitOk;
}

struct SelfcheckArgs {
  SelfcheckOptions options;
  std::string reproducer = "selfcheck-reproducer.arbo.json";
  std::string replay;
};

int cmd_selfcheck(const SelfcheckArgs& a, std::ostream& out) {
  SelfcheckResult r;
  if (!a.replay.empty()) {
    r = replay_reproducer(read_text_file(a.replay));
  } else {
    r = run_selfcheck(a.options);
  }
  if (r.passed) {
    out << "selfcheck: PASS (" << r.cases << " case(s), " << r.checks << " check(s))\n";
    return kExitOk;
  }
  const SelfcheckFailure& f = *r.failure;
  out << "selfcheck: FAIL in case " << f.case_index << ", " << f.check << ": " << f.detail << "\n";
  if (a.replay.empty()) {
    write_text_file(a.reproducer, reproducer_document(f, a.options));
    out << "reproducer written to " << a.reproducer << "\n";
  }
  return kExitDomain;
}

void add_scoring_flags(CLI::App* sub, ScoringArgs& s) {
  sub->add_option("--activation", s.activation, "binarized-relu | relu | scaled-relu[:alpha] | rectified-quadratic")
      ->capture_default_str();
  sub->add_option("--selector", s.selector, "soft backend selector: softmax | sparsemax")->capture_default_str();
  sub->add_option("--temperature", s.temperature, "softmax temperature")->capture_default_str();
  sub->add_option("--workers", s.workers, "scoring threads")->capture_default_str()->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"arbo: decision trees as matrix computations"};
  app.name("arbo");
  app.require_subcommand(1);

  CompileArgs compile_args;
  auto* compile_cmd = app.add_subcommand("compile", "tree document -> tuple document");
  compile_cmd->add_option("model", compile_args.model, "tree document")->required();
  compile_cmd->add_option("--ordering", compile_args.ordering, "column order: bfs | preorder")->capture_default_str();
  compile_cmd->add_option("-o,--out", compile_args.out, "output path (default stdout)");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check that a B matrix is a structure matrix");
  validate_cmd->add_option("model", validate_path, "tuple, matrix or tree document")->required();

  DecodeArgs decode_args;
  auto* decode_cmd = app.add_subcommand("decode", "recover the tree from a tuple, or the shape from a bare B");
  decode_cmd->add_option("model", decode_args.model, "tuple or matrix document")->required();
  decode_cmd->add_option("-o,--out", decode_args.out, "output path (default stdout)");

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "convert between tree, tuple, ternary and matrix documents");
  export_cmd->add_option("model", export_args.model, "tree or tuple document")->required();
  export_cmd->add_option("--to", export_args.to, "tree | tuple | ternary | matrix")->required();
  export_cmd->add_option("--ordering", export_args.ordering, "column order: bfs | preorder")->capture_default_str();
  export_cmd->add_option("-o,--out", export_args.out, "output path (default stdout)");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "score a CSV dataset");
  predict_cmd->add_option("--model", predict_args.model, "model document")->required();
  predict_cmd->add_option("--data", predict_args.data, "CSV with a header row")->required();
  predict_cmd->add_option("--backend", predict_args.scoring.backend,
                          "classic | matrix | bitwise | ternary | sumproduct | soft")
      ->capture_default_str();
  predict_cmd->add_option("-o,--out", predict_args.out, "output CSV (default stdout)");
  add_scoring_flags(predict_cmd, predict_args.scoring);

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "verify and time backends on a dataset");
  bench_cmd->add_option("--model", bench_args.model, "model document")->required();
  bench_cmd->add_option("--data", bench_args.data, "CSV with a header row")->required();
  bench_cmd->add_option("--backends", bench_args.backends, "comma-separated backends")->capture_default_str();
  bench_cmd->add_option("--reps", bench_args.reps, "timed repetitions per backend")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("-o,--out", bench_args.out, "report JSON path (default stdout)");
  add_scoring_flags(bench_cmd, bench_args.scoring);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate a random ensemble and dataset");
  synth_cmd->add_option("--seed", synth_args.seed, "random seed")->capture_default_str();
  synth_cmd->add_option("--trees", synth_args.trees, "number of trees")->capture_default_str();
  synth_cmd->add_option("--leaves", synth_args.leaves, "leaves per tree")->capture_default_str();
  synth_cmd->add_option("--features", synth_args.features, "numeric features")->capture_default_str();
  synth_cmd->add_option("--rows", synth_args.rows, "dataset rows")->capture_default_str();
  synth_cmd->add_option("--task", synth_args.task, "regression | classification")->capture_default_str();
  synth_cmd->add_option("--model-out", synth_args.model_out, "ensemble document path")->required();
  synth_cmd->add_option("--data-out", synth_args.data_out, "CSV path")->required();

  SelfcheckArgs selfcheck_args;
  auto* selfcheck_cmd = app.add_subcommand("selfcheck", "run the invariant suite on fuzzed trees");
  selfcheck_cmd->alias("fuzz-selfcheck");
  selfcheck_cmd->add_option("--seed", selfcheck_args.options.seed, "random seed")->capture_default_str();
  selfcheck_cmd->add_option("--count", selfcheck_args.options.count, "number of trees")->capture_default_str();
  selfcheck_cmd->add_option("--max-leaves", selfcheck_args.options.max_leaves, "largest tree")->capture_default_str();
  selfcheck_cmd->add_option("--inputs", selfcheck_args.options.inputs_per_tree, "inputs per tree")
      ->capture_default_str();
  selfcheck_cmd->add_flag("--inject-corruption", selfcheck_args.options.inject_corruption,
                          "flip one bit of every compiled B");
  selfcheck_cmd->add_option("--reproducer", selfcheck_args.reproducer, "where to write a failing case")
      ->capture_default_str();
  selfcheck_cmd->add_option("--replay", selfcheck_args.replay, "re-run the checks on a reproducer document");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Prints help (for --help on any subcommand) or the parse error.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (compile_cmd->parsed()) return cmd_compile(compile_args, out);
    if (validate_cmd->parsed()) return cmd_validate(validate_path, out);
    if (decode_cmd->parsed()) return cmd_decode(decode_args, out);
    if (export_cmd->parsed()) return cmd_export(export_args, out);
    if (predict_cmd->parsed()) return cmd_predict(predict_args, out);
    if (bench_cmd->parsed()) return cmd_bench(bench_args, out, err);
    if (synth_cmd->parsed()) return cmd_synth(synth_args, out);
    if (selfcheck_cmd->parsed()) return cmd_selfcheck(selfcheck_args, out);
  } catch (const InputError& e) {
    err << "arbo: input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "arbo: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "arbo: internal error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitInput;
}

}  // namespace arbo
