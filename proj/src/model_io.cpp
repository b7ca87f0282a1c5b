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


#include "arbo/model_io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "arbo/error.hpp"
#include "arbo/validator.hpp"

namespace arbo {

using nlohmann::json;

std::string to_string(PayloadKind k) {
  switch (k) {
    case PayloadKind::kTree:
      return "tree";
    case PayloadKind::kTuple:
      return "tuple";
    case PayloadKind::kTernary:
      return "ternary";
    case PayloadKind::kEnsemble:
      return "ensemble";
    case PayloadKind::kMatrix:
      return "matrix";
  }
  return "?";
}

ModelDocument ModelDocument::of(DecisionTree tree) {
  ModelDocument d;
  d.kind = PayloadKind::kTree;
  d.schema = tree.schema_ptr();
  d.task = tree.task();
  d.tree = std::make_shared<const DecisionTree>(std::move(tree));
  return d;
}

ModelDocument ModelDocument::of(TreeTuple tuple) {
  ModelDocument d;
  d.kind = PayloadKind::kTuple;
  d.schema = tuple.schema;
  d.task = tuple.task;
  d.tuple = std::make_shared<const TreeTuple>(std::move(tuple));
  return d;
}

ModelDocument ModelDocument::of(TernaryTuple ternary) {
  ModelDocument d;
  d.kind = PayloadKind::kTernary;
  d.schema = ternary.schema;
  d.task = ternary.task;
  d.ternary = std::make_shared<const TernaryTuple>(std::move(ternary));
  return d;
}

ModelDocument ModelDocument::of(EnsembleModel ensemble) {
  ModelDocument d;
  d.kind = PayloadKind::kEnsemble;
  d.schema = ensemble.schema_ptr();
  d.task = ensemble.task();
  d.ensemble = std::make_shared<const EnsembleModel>(std::move(ensemble));
  return d;
}

ModelDocument ModelDocument::of(BitMatrix bits) {
  ModelDocument d;
  d.kind = PayloadKind::kMatrix;
  d.schema = std::make_shared<const FeatureSchema>();
  d.matrix = std::move(bits);
  return d;
}

// ---------------------------------------------------------------------------
// Canonical writer

std::string format_double(double v) {
  if (!std::isfinite(v)) throw InputError("cannot serialise a non-finite number");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

bool is_scalar(const json& j) { return !j.is_array() && !j.is_object(); }

void write_scalar(std::ostream& os, const json& j) {
  if (j.is_number_float()) {
    os << format_double(j.get<double>());
  } else {
    os << j.dump();
  }
}

void write_canonical(std::ostream& os, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
      if (!first) os << ",\n";
      first = false;
      os << inner << json(it.key()).dump() << ": ";
      write_canonical(os, it.value(), indent + 1);
    }
    os << "\n" << pad << "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      os << "[]";
      return;
    }
    if (std::all_of(j.begin(), j.end(), is_scalar)) {
      os << "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ", ";
        write_scalar(os, j[i]);
      }
      os << "]";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) os << ",\n";
      os << inner;
      write_canonical(os, j[i], indent + 1);
    }
    os << "\n" << pad << "]";
  } else {
    write_scalar(os, j);
  }
}

std::string canonical(const json& j) {
  std::ostringstream os;
  write_canonical(os, j, 0);
  os << "\n";
  return os.str();
}

// Doubles always go in as floats so the writer applies one format.
json num(double v) { return json(v); }

json num_array(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json matrix_json(const DenseMatrix& m) {
  json a = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) a.push_back(num_array(m.row(r)));
  return a;
}

std::string task_name(Task t) { return t == Task::kRegression ? "regression" : "classification"; }

json schema_json(const FeatureSchema& s) {
  json feats = json::array();
  for (const auto& f : s.features()) {
    json o = {{"name", f.name}};
    if (f.type == FeatureType::kCategorical) {
      o["type"] = "categorical";
      o["vocabulary"] = f.vocabulary;
    } else {
      o["type"] = "numeric";
    }
    feats.push_back(std::move(o));
  }
  return json{{"features", std::move(feats)}};
}

json node_json(const DecisionTree& tree, NodeId id);

json leaf_json(const LeafModel& leaf) {
  if (const auto* c = std::get_if<ConstantLeaf>(&leaf)) return num(c->value);
  const auto& l = std::get<LinearLeaf>(leaf);
  return json{{"weights", num_array(l.weights)}, {"offset", num(l.offset)}};
}

json test_json(const TestFunction& test, const FeatureSchema& schema) {
  if (const auto* a = std::get_if<AxisTest>(&test)) {
    return json{{"kind", "axis"},
                {"feature", schema[static_cast<std::size_t>(a->feature)].name},
                {"threshold", num(a->threshold)}};
  }
  if (const auto* c = std::get_if<CategoricalTest>(&test)) {
    const auto& spec = schema[static_cast<std::size_t>(c->feature)];
    json cats = json::array();
    for (int id : c->categories) cats.push_back(spec.vocabulary[static_cast<std::size_t>(id)]);
    return json{{"kind", "categorical"}, {"feature", spec.name}, {"categories", std::move(cats)}};
  }
  if (const auto* o = std::get_if<ObliqueTest>(&test)) {
    return json{{"kind", "oblique"}, {"weights", num_array(o->weights)}, {"offset", num(o->offset)}};
  }
  const auto& k = std::get<ComposedTest>(test);
  return json{{"kind", "composed"}, {"threshold", num(k.threshold)}, {"inner", node_json(*k.inner, k.inner->root())}};
}

json node_json(const DecisionTree& tree, NodeId id) {
  const Node& n = tree.node(id);
  if (n.is_leaf) return json{{"leaf", leaf_json(n.leaf)}};
  return json{{"test", test_json(n.test, tree.schema())},
              {"left", node_json(tree, n.left)},
              {"right", node_json(tree, n.right)}};
}

json bank_json(const std::vector<BankedTest>& bank, const FeatureSchema& schema) {
  json a = json::array();
  for (const auto& b : bank) a.push_back(json{{"column", b.column}, {"test", test_json(b.test, schema)}});
  return a;
}

json values_json(const std::vector<LeafModel>& values) {
  json a = json::array();
  for (const auto& v : values) a.push_back(leaf_json(v));
  return a;
}

json payload_json(const ModelDocument& doc) {
  const FeatureSchema& schema = *doc.schema;
  switch (doc.kind) {
    case PayloadKind::kTree:
      return json{{"kind", "tree"}, {"root", node_json(*doc.tree, doc.tree->root())}};
    case PayloadKind::kTuple: {
      const TreeTuple& t = *doc.tuple;
      return json{{"kind", "tuple"},
                  {"ordering", to_string(t.ordering)},
                  {"S", matrix_json(t.selection)},
                  {"t", num_array(t.thresholds)},
                  {"B", t.bits.to_strings()},
                  {"v", values_json(t.values)},
                  {"bank", bank_json(t.test_bank, schema)}};
    }
    case PayloadKind::kTernary: {
      const TernaryTuple& t = *doc.ternary;
      json pattern = json::array();
      for (std::size_t i = 0; i < t.n_leaves(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < t.n_internal(); ++j) row.push_back(static_cast<int>(t.at(i, j)));
        pattern.push_back(std::move(row));
      }
      return json{{"kind", "ternary"},
                  {"pattern", std::move(pattern)},
                  {"augmented_selection", matrix_json(t.augmented_selection)},
                  {"v", values_json(t.values)},
                  {"bank", bank_json(t.test_bank, schema)}};
    }
    case PayloadKind::kEnsemble: {
      const EnsembleModel& e = *doc.ensemble;
      json trees = json::array();
      for (std::size_t k = 0; k < e.size(); ++k) {
        const DecisionTree& tr = *e.member(k).tree;
        trees.push_back(node_json(tr, tr.root()));
      }
      return json{{"kind", "ensemble"},
                  {"aggregation", to_string(e.aggregation())},
                  {"weights", num_array(e.weights())},
                  {"trees", std::move(trees)}};
    }
    case PayloadKind::kMatrix:
      return json{{"kind", "matrix"}, {"B", doc.matrix->to_strings()}};
  }
  throw InputError("unknown payload kind");
}

}  // namespace

std::string dump_model(const ModelDocument& doc) {
  if (!doc.schema) throw InputError("document has no schema");
  json root = {{"format", kFormatName},
               {"format_version", kFormatVersion},
               {"schema", schema_json(*doc.schema)},
               {"task", task_name(doc.task)},
               {"payload", payload_json(doc)}};
  return canonical(root);
}

// ---------------------------------------------------------------------------
// Reader

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw MalformedDocumentError(where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) malformed(where, std::string("missing '") + key + "'");
  return *it;
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) malformed(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) malformed(where, "number is not finite");
  return v;
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) malformed(where, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) malformed(where, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& where) {
  if (!j.is_array()) malformed(where, "expected an array");
  return j;
}

std::vector<double> double_array(const json& j, const std::string& where) {
  std::vector<double> out;
  for (std::size_t i = 0; i < as_array(j, where).size(); ++i) {
    out.push_back(as_double(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

DenseMatrix dense_matrix(const json& j, std::size_t cols, const std::string& where) {
  const json& rows = as_array(j, where);
  DenseMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string w = where + "[" + std::to_string(r) + "]";
    const auto row = double_array(rows[r], w);
    if (row.size() != cols) malformed(w, "expected " + std::to_string(cols) + " entries");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

BitMatrix bit_matrix(const json& j, const std::string& where) {
  std::vector<std::string> rows;
  for (std::size_t r = 0; r < as_array(j, where).size(); ++r) {
    rows.push_back(as_string(j[r], where + "[" + std::to_string(r) + "]"));
  }
  try {
    return BitMatrix::from_strings(rows);
  } catch (const InputError& e) {
    malformed(where, e.what());
  }
}

FeatureSchema parse_schema(const json& j) {
  const json& feats = as_array(field(j, "features", "schema"), "schema.features");
  std::vector<FeatureSpec> specs;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const std::string w = "schema.features[" + std::to_string(i) + "]";
    FeatureSpec f;
    f.name = as_string(field(feats[i], "name", w), w + ".name");
    const std::string type = as_string(field(feats[i], "type", w), w + ".type");
    if (type == "categorical") {
      f.type = FeatureType::kCategorical;
      const json& vocab = as_array(field(feats[i], "vocabulary", w), w + ".vocabulary");
      for (std::size_t k = 0; k < vocab.size(); ++k) {
        f.vocabulary.push_back(as_string(vocab[k], w + ".vocabulary[" + std::to_string(k) + "]"));
      }
    } else if (type != "numeric") {
      malformed(w + ".type", "expected 'numeric' or 'categorical', got '" + type + "'");
    }
    specs.push_back(std::move(f));
  }
  return FeatureSchema(std::move(specs));
}

Task parse_task(const json& j) {
  const std::string t = as_string(j, "task");
  if (t == "regression") return Task::kRegression;
  if (t == "classification") return Task::kClassification;
  malformed("task", "expected 'regression' or 'classification', got '" + t + "'");
}

int feature_index(const FeatureSchema& schema, const std::string& name, const std::string& where) {
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].name == name) return static_cast<int>(j);
  }
  throw InputError(where + ": unknown feature '" + name + "'");
}

class TreeReader {
 public:
  TreeReader(SchemaPtr schema, Task task) : schema_(std::move(schema)), task_(task) {}

  DecisionTree read(const json& root, const std::string& where) {
    DecisionTree::Builder b(schema_, task_);
    const NodeId r = node(b, root, where);
    return std::move(b).build(r);
  }

  TestFunction test(const json& j, const std::string& where) {
    const std::string kind = as_string(field(j, "kind", where), where + ".kind");
    const FeatureSchema& s = *schema_;
    if (kind == "axis") {
      return AxisTest{feature_index(s, as_string(field(j, "feature", where), where + ".feature"), where),
                      as_double(field(j, "threshold", where), where + ".threshold")};
    }
    if (kind == "categorical") {
      CategoricalTest c;
      c.feature = feature_index(s, as_string(field(j, "feature", where), where + ".feature"), where);
      const auto& vocab = s[static_cast<std::size_t>(c.feature)].vocabulary;
      const json& cats = as_array(field(j, "categories", where), where + ".categories");
      for (std::size_t i = 0; i < cats.size(); ++i) {
        const std::string name = as_string(cats[i], where + ".categories[" + std::to_string(i) + "]");
        const auto it = std::find(vocab.begin(), vocab.end(), name);
        if (it == vocab.end()) throw InputError(where + ": unknown category '" + name + "'");
        c.categories.push_back(static_cast<int>(it - vocab.begin()));
      }
      std::sort(c.categories.begin(), c.categories.end());
      c.categories.erase(std::unique(c.categories.begin(), c.categories.end()), c.categories.end());
      return c;
    }
    if (kind == "oblique") {
      return ObliqueTest{double_array(field(j, "weights", where), where + ".weights"),
                         as_double(field(j, "offset", where), where + ".offset")};
    }
    if (kind == "composed") {
      TreeReader inner(schema_, Task::kRegression);
      ComposedTest k;
      k.inner = std::make_shared<const DecisionTree>(inner.read(field(j, "inner", where), where + ".inner"));
      k.threshold = as_double(field(j, "threshold", where), where + ".threshold");
      return k;
    }
    malformed(where + ".kind", "unknown test kind '" + kind + "'");
  }

  static LeafModel leaf(const json& j, const std::string& where) {
    if (j.is_number()) return ConstantLeaf{as_double(j, where)};
    return LinearLeaf{double_array(field(j, "weights", where), where + ".weights"),
                      as_double(field(j, "offset", where), where + ".offset")};
  }

 private:
  NodeId node(DecisionTree::Builder& b, const json& j, const std::string& where) {
    if (!j.is_object()) malformed(where, "expected a node object");
    if (j.contains("leaf")) return b.add_leaf(leaf(j["leaf"], where + ".leaf"));
    TestFunction t = test(field(j, "test", where), where + ".test");
    const NodeId l = node(b, field(j, "left", where), where + ".left");
    const NodeId r = node(b, field(j, "right", where), where + ".right");
    return b.add_internal(std::move(t), l, r);
  }

  SchemaPtr schema_;
  Task task_;
};

std::vector<LeafModel> parse_values(const json& j, const std::string& where) {
  std::vector<LeafModel> out;
  for (std::size_t i = 0; i < as_array(j, where).size(); ++i) {
    out.push_back(TreeReader::leaf(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<BankedTest> parse_bank(const json& j, TreeReader& reader, std::size_t columns, const std::string& where) {
  std::vector<BankedTest> out;
  for (std::size_t i = 0; i < as_array(j, where).size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    BankedTest b;
    b.column = as_int(field(j[i], "column", w), w + ".column");
    if (b.column < 0 || static_cast<std::size_t>(b.column) >= columns) malformed(w + ".column", "out of range");
    b.test = reader.test(field(j[i], "test", w), w + ".test");
    if (std::holds_alternative<AxisTest>(b.test) || std::holds_alternative<ObliqueTest>(b.test)) {
      malformed(w + ".test", "only categorical and composed tests are banked");
    }
    if (const auto* k = std::get_if<ComposedTest>(&b.test); k && k->inner->n_internal() > 0) {
      b.inner = std::make_shared<const TreeTuple>(compile(*k->inner));
    }
    for (const auto& prev : out) {
      if (prev.column == b.column) malformed(w + ".column", "column banked twice");
    }
    out.push_back(std::move(b));
  }
  return out;
}

void check_leaves(const std::vector<LeafModel>& values, Task task, std::size_t n, const std::string& where) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    if (const auto* l = std::get_if<LinearLeaf>(&values[i])) {
      if (task != Task::kRegression) throw InputError(w + ": linear leaves need a regression task");
      if (l->weights.size() != n) throw InputError(w + ": linear leaf weight count differs from the schema");
    } else if (task == Task::kClassification) {
      const double c = std::get<ConstantLeaf>(values[i]).value;
      if (c < 0 || std::floor(c) != c) throw InputError(w + ": class labels must be non-negative integers");
    }
  }
}

TreeTuple parse_tuple(const json& p, const SchemaPtr& schema, Task task, const LoadOptions& options) {
  TreeTuple t;
  t.schema = schema;
  t.task = task;
  const std::string ordering = as_string(field(p, "ordering", "payload"), "payload.ordering");
  try {
    t.ordering = parse_ordering(ordering);
  } catch (const InputError& e) {
    malformed("payload.ordering", e.what());
  }
  t.bits = bit_matrix(field(p, "B", "payload"), "payload.B");
  t.thresholds = double_array(field(p, "t", "payload"), "payload.t");
  t.selection = dense_matrix(field(p, "S", "payload"), schema->size(), "payload.S");
  t.values = parse_values(field(p, "v", "payload"), "payload.v");
  const std::size_t L = t.bits.rows();
  const std::size_t nl = t.bits.cols();
  if (L < 2 || nl + 1 != L) {
    malformed("payload.B", "expected L x (L-1) with L >= 2, got " + std::to_string(L) + " x " + std::to_string(nl));
  }
  if (t.selection.rows() != nl) malformed("payload.S", "expected " + std::to_string(nl) + " rows");
  if (t.thresholds.size() != nl) malformed("payload.t", "expected " + std::to_string(nl) + " entries");
  if (t.values.size() != L) malformed("payload.v", "expected " + std::to_string(L) + " entries");
  check_leaves(t.values, task, schema->size(), "payload.v");
  TreeReader reader(schema, task);
  t.test_bank = parse_bank(p.contains("bank") ? p["bank"] : json::array(), reader, nl, "payload.bank");

  if (options.validate) {
    const ValidationReport report = check_four_rules(t.bits);
    if (!report.valid) {
      const auto& v = report.violations.front();
      throw ValidatorFailureError("B is not a structure matrix: rule " + std::to_string(v.rule) + ": " + v.message);
    }
  }
  try {
    const DecodedStructure d = decode_structure(t.bits);
    t.internal_order.assign(d.column_node.begin(), d.column_node.end());
    t.leaf_order.assign(d.row_node.begin(), d.row_node.end());
  } catch (const InvalidStructureError&) {
    // Left empty; only reachable with validation off.
  }
  t.index();
  return t;
}

TernaryTuple parse_ternary(const json& p, const SchemaPtr& schema, Task task) {
  TernaryTuple t;
  t.schema = schema;
  t.task = task;
  const json& pattern = as_array(field(p, "pattern", "payload"), "payload.pattern");
  t.values = parse_values(field(p, "v", "payload"), "payload.v");
  check_leaves(t.values, task, schema->size(), "payload.v");
  const std::size_t L = pattern.size();
  if (L < 2) malformed("payload.pattern", "expected at least 2 rows");
  if (t.values.size() != L) malformed("payload.v", "expected " + std::to_string(L) + " entries");
  const std::size_t nl = L - 1;
  t.pattern.assign(L * nl, 0);
  t.row_norm.assign(L, 0);
  for (std::size_t i = 0; i < L; ++i) {
    const std::string w = "payload.pattern[" + std::to_string(i) + "]";
    if (as_array(pattern[i], w).size() != nl) malformed(w, "expected " + std::to_string(nl) + " entries");
    for (std::size_t j = 0; j < nl; ++j) {
      const int e = as_int(pattern[i][j], w);
      if (e < -1 || e > 1) malformed(w, "entries must be -1, 0 or 1");
      t.pattern[i * nl + j] = static_cast<std::int8_t>(e);
      t.row_norm[i] += std::abs(e);
    }
    if (t.row_norm[i] == 0) malformed(w, "pattern row is all zeros");
  }
  t.augmented_selection =
      dense_matrix(field(p, "augmented_selection", "payload"), schema->size() + 1, "payload.augmented_selection");
  if (t.augmented_selection.rows() != nl) malformed("payload.augmented_selection", "expected " + std::to_string(nl) + " rows");
  TreeReader reader(schema, task);
  t.test_bank = parse_bank(p.contains("bank") ? p["bank"] : json::array(), reader, nl, "payload.bank");
  return t;
}

}  // namespace

ModelDocument parse_model(const std::string& text, const LoadOptions& options) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedDocumentError(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) malformed("document", "expected a JSON object");
  if (as_string(field(root, "format", "document"), "format") != kFormatName) {
    malformed("format", std::string("expected '") + kFormatName + "'");
  }
  const std::string version = as_string(field(root, "format_version", "document"), "format_version");
  if (version != kFormatVersion) {
    throw UnknownVersionError("unknown format_version '" + version + "' (supported: " + kFormatVersion + ")");
  }
  ModelDocument doc;
  doc.schema = std::make_shared<const FeatureSchema>(parse_schema(field(root, "schema", "document")));
  doc.task = parse_task(field(root, "task", "document"));
  const json& p = field(root, "payload", "document");
  const std::string kind = as_string(field(p, "kind", "payload"), "payload.kind");
  if (kind == "tree") {
    doc.kind = PayloadKind::kTree;
    TreeReader reader(doc.schema, doc.task);
    doc.tree = std::make_shared<const DecisionTree>(reader.read(field(p, "root", "payload"), "payload.root"));
  } else if (kind == "tuple") {
    doc.kind = PayloadKind::kTuple;
    doc.tuple = std::make_shared<const TreeTuple>(parse_tuple(p, doc.schema, doc.task, options));
  } else if (kind == "ternary") {
    doc.kind = PayloadKind::kTernary;
    doc.ternary = std::make_shared<const TernaryTuple>(parse_ternary(p, doc.schema, doc.task));
  } else if (kind == "ensemble") {
    doc.kind = PayloadKind::kEnsemble;
    const Aggregation agg = parse_aggregation(as_string(field(p, "aggregation", "payload"), "payload.aggregation"));
    const json& trees = as_array(field(p, "trees", "payload"), "payload.trees");
    std::vector<DecisionTree> parsed;
    TreeReader reader(doc.schema, doc.task);
    for (std::size_t k = 0; k < trees.size(); ++k) {
      parsed.push_back(reader.read(trees[k], "payload.trees[" + std::to_string(k) + "]"));
    }
    std::vector<double> weights;
    if (p.contains("weights")) weights = double_array(p["weights"], "payload.weights");
    doc.ensemble = std::make_shared<const EnsembleModel>(doc.schema, doc.task, agg, std::move(parsed), weights);
  } else if (kind == "matrix") {
    doc.kind = PayloadKind::kMatrix;
    doc.matrix = bit_matrix(field(p, "B", "payload"), "payload.B");
  } else {
    malformed("payload.kind", "unknown payload kind '" + kind + "'");
  }
  return doc;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path + ": read failed");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

void save_model(const ModelDocument& doc, const std::string& path) { write_text_file(path, dump_model(doc)); }

ModelDocument load_model(const std::string& path, const LoadOptions& options) {
  const std::string text = read_text_file(path);
  try {
    return parse_model(text, options);
  } catch (const MalformedDocumentError& e) {
    throw MalformedDocumentError(path + ": " + e.what());
  } catch (const UnknownVersionError& e) {
    throw UnknownVersionError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& feature) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw RowError(row, "feature '" + feature + "': '" + cell + "' is not a finite number");
  }
  return v;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text, const SchemaPtr& schema) {
  if (!schema) throw InputError("dataset: missing schema");
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw InputError("dataset: missing header row");
  const auto header = split_csv_line(lines[0]);
  std::vector<std::string> names;
  for (const auto& f : schema->features()) names.push_back(f.name);
  if (header != names) {
    std::string expect;
    for (const auto& n : names) expect += (expect.empty() ? "" : ",") + n;
    throw InputError("dataset: header '" + lines[0] + "' does not match schema '" + expect + "'");
  }
  const std::size_t n = schema->size();
  Dataset d;
  d.schema = schema;
  d.rows = DenseMatrix(lines.size() - 1, n);
  for (std::size_t r = 0; r + 1 < lines.size(); ++r) {
    const auto cells = split_csv_line(lines[r + 1]);
    if (cells.size() != n) {
      throw RowError(r, "expected " + std::to_string(n) + " cells, got " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const FeatureSpec& f = (*schema)[j];
      if (f.type == FeatureType::kCategorical) {
        const auto it = std::find(f.vocabulary.begin(), f.vocabulary.end(), cells[j]);
        if (it == f.vocabulary.end()) {
          throw RowError(r, "feature '" + f.name + "': unknown category '" + cells[j] + "'");
        }
        d.rows(r, j) = static_cast<double>(it - f.vocabulary.begin());
      } else {
        d.rows(r, j) = parse_number(cells[j], r, f.name);
      }
    }
  }
  return d;
}

Dataset load_dataset_csv(const std::string& path, const SchemaPtr& schema) {
  return parse_dataset_csv(read_text_file(path), schema);
}

std::string dump_dataset_csv(const Dataset& data) {
  std::ostringstream os;
  const FeatureSchema& s = *data.schema;
  for (std::size_t j = 0; j < s.size(); ++j) os << (j ? "," : "") << s[j].name;
  os << "\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j) os << ",";
      const double v = data.rows(r, j);
      if (s.is_categorical(j)) {
        os << s[j].vocabulary.at(static_cast<std::size_t>(v));
      } else {
        os << format_double(v);
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string canonical_json(const std::string& json_text) {
  try {
    return canonical(json::parse(json_text));
  } catch (const json::parse_error& e) {
    throw MalformedDocumentError(std::string("not valid JSON: ") + e.what());
  }
}

EnsembleModel as_ensemble(const ModelDocument& doc) {
  switch (doc.kind) {
    case PayloadKind::kEnsemble:
      return *doc.ensemble;
    case PayloadKind::kTree:
      return EnsembleModel(doc.schema, doc.task, Aggregation::kSum, {*doc.tree});
    case PayloadKind::kTuple:
      return EnsembleModel(doc.schema, doc.task, Aggregation::kSum, {to_tree(*doc.tuple)})
          .with_member_tuple(0, *doc.tuple);
    default:
      throw InputError("expected a tree, tuple or ensemble document, got " + to_string(doc.kind));
  }
}

std::string bench_report_json(const BenchReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back(json{{"backend", to_string(e.backend)},
                           {"trees", e.trees},
                           {"leaves", e.max_leaves},
                           {"batch_size", e.batch_size},
                           {"repetitions", e.repetitions},
                           {"median_seconds", num(e.median_seconds)},
                           {"rows_per_second", num(e.rows_per_second)},
                           {"iteration_order", e.iteration_order}});
  }
  json root = {{"verified", true},
               {"verified_rows", report.verified_rows},
               {"workers", report.workers},
               {"environment", report.environment},
               {"backends", std::move(entries)}};
  return canonical(root);
}

}  // namespace arbo
