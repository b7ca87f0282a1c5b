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


// The *.arbo.json container and CSV datasets.
//
// Every document is one JSON object:
//   {"format": "arbo-model", "format_version": "1.0",
//    "schema": {"features": [...]}, "task": "regression" | "classification",
//    "payload": {"kind": "tree" | "tuple" | "ternary" | "ensemble" | "matrix", ...}}
// See docs/model-format.md for the payload layouts.

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "arbo/ensemble.hpp"
#include "arbo/matrix.hpp"
#include "arbo/tensorizer.hpp"
#include "arbo/tree.hpp"

namespace arbo {

inline constexpr const char* kFormatName = "arbo-model";
inline constexpr const char* kFormatVersion = "1.0";

enum class PayloadKind { kTree, kTuple, kTernary, kEnsemble, kMatrix };

std::string to_string(PayloadKind k);

// Exactly one payload pointer is set, matching `kind`.
struct ModelDocument {
  PayloadKind kind = PayloadKind::kTree;
  SchemaPtr schema;
  Task task = Task::kRegression;
  TreePtr tree;
  TuplePtr tuple;
  std::shared_ptr<const TernaryTuple> ternary;
  std::shared_ptr<const EnsembleModel> ensemble;
  std::optional<BitMatrix> matrix;  // bare B, for validate / decode

  static ModelDocument of(DecisionTree tree);
  static ModelDocument of(TreeTuple tuple);
  static ModelDocument of(TernaryTuple ternary);
  static ModelDocument of(EnsembleModel ensemble);
  static ModelDocument of(BitMatrix bits);
};

struct LoadOptions {
  // Run the four-rules check on tuple payloads and throw
  // ValidatorFailureError when it fails.
  bool validate = true;
};

// Canonical text: sorted keys, two-space indent, floats with 17 significant
// digits, trailing newline. Two dumps of equal documents are byte-identical.
std::string dump_model(const ModelDocument& doc);

// Throws MalformedDocumentError, UnknownVersionError, ValidatorFailureError
// (tuple payloads, when enabled), or InputError for schema problems.
ModelDocument parse_model(const std::string& text, const LoadOptions& options = {});

// Scoring view of a tree, tuple or ensemble document. A single tree or
// tuple becomes a one-member sum ensemble; a tuple keeps its own B.
// Throws InputError for other payloads.
EnsembleModel as_ensemble(const ModelDocument& doc);

// Throws IoError naming the path.
void save_model(const ModelDocument& doc, const std::string& path);
ModelDocument load_model(const std::string& path, const LoadOptions& options = {});

// Header row must list the schema's feature names in order. Numbers use '.'
// regardless of locale; categorical cells hold vocabulary names. Row errors
// carry the 0-based data row index.
Dataset parse_dataset_csv(const std::string& text, const SchemaPtr& schema);
Dataset load_dataset_csv(const std::string& path, const SchemaPtr& schema);
std::string dump_dataset_csv(const Dataset& data);

std::string bench_report_json(const BenchReport& report);

// Re-renders any JSON text in the canonical layout used by dump_model.
std::string canonical_json(const std::string& json_text);

// Locale-independent 17-significant-digit rendering used by every writer.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace arbo
