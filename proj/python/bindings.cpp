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


// Python bindings: load, compile, validate and score models from numpy.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "arbo/cli.hpp"
#include "arbo/ensemble.hpp"
#include "arbo/error.hpp"
#include "arbo/inference.hpp"
#include "arbo/model_io.hpp"
#include "arbo/selfcheck.hpp"
#include "arbo/tensorizer.hpp"
#include "arbo/validator.hpp"

namespace py = pybind11;
using namespace arbo;

namespace {

using Rows = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dataset to_dataset(const ModelDocument& doc, const Rows& rows) {
  if (rows.ndim() != 2) throw InputError("rows must be a 2-d array");
  const auto n = static_cast<std::size_t>(rows.shape(0));
  const auto f = static_cast<std::size_t>(rows.shape(1));
  Dataset d{doc.schema, DenseMatrix(n, f)};
  const double* src = rows.data();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < f; ++c) d.rows(r, c) = src[r * f + c];
  }
  return d;
}

ScoringOptions scoring(const std::string& activation, const std::string& selector, double temperature) {
  ScoringOptions o;
  o.activation = Activation::from_name(activation);
  if (selector == "softmax") {
    o.selector = SoftSelector::softmax(temperature);
  } else if (selector == "sparsemax") {
    o.selector = SoftSelector::sparsemax();
  } else {
    throw ConfigError("unknown selector '" + selector + "' (softmax|sparsemax)");
  }
  return o;
}

py::array_t<double> predict(const ModelDocument& doc, const Rows& rows, const std::string& backend,
                            std::size_t workers, const std::string& activation, const std::string& selector,
                            double temperature) {
  const Dataset data = to_dataset(doc, rows);
  std::vector<double> values;
  if (doc.kind == PayloadKind::kTernary) {
    if (parse_backend(backend) != Backend::kTernary) throw ConfigError("ternary documents support only 'ternary'");
    for (std::size_t r = 0; r < data.size(); ++r) {
      try {
        doc.schema->check(data.row(r));
      } catch (const InputError& e) {
        throw RowError(r, e.what());
      }
      values.push_back(predict_ternary(*doc.ternary, data.row(r)).value);
    }
  } else {
    const EnsembleModel model = as_ensemble(doc);
    py::gil_scoped_release release;
    values = score_batch(model, data, parse_backend(backend), workers, scoring(activation, selector, temperature));
  }
  return py::array_t<double>(static_cast<py::ssize_t>(values.size()), values.data());
}

py::array_t<int> predict_leaves(const ModelDocument& doc, const Rows& rows, const std::string& backend) {
  if (doc.kind != PayloadKind::kTree && doc.kind != PayloadKind::kTuple) {
    throw InputError("leaf indices need a tree or tuple document");
  }
  const Dataset data = to_dataset(doc, rows);
  const EnsembleModel model = as_ensemble(doc);
  const Backend b = parse_backend(backend);
  std::vector<int> leaves(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    try {
      leaves[r] = score_member(model.member(0), data.row(r), b).leaf;
    } catch (const RowError&) {
      throw;
    } catch (const InputError& e) {
      throw RowError(r, e.what());
    }
  }
  return py::array_t<int>(static_cast<py::ssize_t>(leaves.size()), leaves.data());
}

BitMatrix matrix_of(const ModelDocument& doc) {
  if (doc.kind == PayloadKind::kMatrix) return *doc.matrix;
  if (doc.kind == PayloadKind::kTuple) return doc.tuple->bits;
  if (doc.kind == PayloadKind::kTree) return compile(*doc.tree).bits;
  throw InputError("expected a tree, tuple or matrix document, got " + to_string(doc.kind));
}

py::dict validate(const ModelDocument& doc) {
  const BitMatrix b = matrix_of(doc);
  const ValidationReport r = check_four_rules(b);
  py::list violations;
  for (const auto& v : r.violations) {
    py::dict d;
    d["rule"] = v.rule;
    d["columns"] = v.columns;
    d["rows"] = v.rows;
    d["message"] = v.message;
    violations.append(d);
  }
  py::dict out;
  out["valid"] = r.valid;
  out["violations"] = violations;
  out["rank"] = r.rank;
  out["complement_rank"] = rank_exact(b.complement());
  out["augmented_det_nonzero"] = r.augmented_det_nonzero;
  out["no_complement_pairs"] = check_complement_pairs(b);
  return out;
}

}  // namespace

PYBIND11_MODULE(_arbo, m) {
  m.doc() = "Decision trees as matrix computations";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto input = py::register_exception<InputError>(m, "InputError", error.ptr());
  auto domain = py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", input.ptr());
  py::register_exception<MalformedDocumentError>(m, "MalformedDocumentError", input.ptr());
  py::register_exception<UnknownVersionError>(m, "UnknownVersionError", input.ptr());
  py::register_exception<RowError>(m, "RowError", input.ptr());
  py::register_exception<ValidatorFailureError>(m, "ValidatorFailureError", domain.ptr());
  py::register_exception<BackendDisagreementError>(m, "BackendDisagreementError", domain.ptr());
  py::register_exception<DegenerateTreeError>(m, "DegenerateTreeError", domain.ptr());

  py::class_<ModelDocument>(m, "Model")
      .def_property_readonly("kind", [](const ModelDocument& d) { return to_string(d.kind); })
      .def_property_readonly("task", [](const ModelDocument& d) {
        return d.task == Task::kRegression ? "regression" : "classification";
      })
      .def_property_readonly("feature_names",
                             [](const ModelDocument& d) {
                               std::vector<std::string> names;
                               if (!d.schema) return names;
                               for (const auto& f : d.schema->features()) names.push_back(f.name);
                               return names;
                             })
      .def("dumps", &dump_model)
      .def("save", &save_model, py::arg("path"))
      .def("__repr__", [](const ModelDocument& d) { return "<arbo.Model kind=" + to_string(d.kind) + ">"; });

  m.def("load_model", [](const std::string& path, bool validate) { return load_model(path, LoadOptions{validate}); },
        py::arg("path"), py::arg("validate") = true);
  m.def("loads", [](const std::string& text, bool validate) { return parse_model(text, LoadOptions{validate}); },
        py::arg("text"), py::arg("validate") = true);

  m.def(
      "compile",
      [](const ModelDocument& doc, const std::string& ordering) {
        if (doc.kind != PayloadKind::kTree) throw InputError("compile needs a tree document");
        return ModelDocument::of(compile(*doc.tree, parse_ordering(ordering)));
      },
      py::arg("model"), py::arg("ordering") = "bfs");
  m.def(
      "decode",
      [](const ModelDocument& doc) {
        if (doc.kind != PayloadKind::kTuple) throw InputError("decode needs a tuple document");
        return ModelDocument::of(to_tree(*doc.tuple));
      },
      py::arg("model"));
  m.def(
      "ternary",
      [](const ModelDocument& doc) {
        if (doc.kind == PayloadKind::kTree) return ModelDocument::of(ternary_form(compile(*doc.tree)));
        if (doc.kind == PayloadKind::kTuple) return ModelDocument::of(ternary_form(*doc.tuple));
        throw InputError("ternary form needs a tree or tuple document");
      },
      py::arg("model"));
  m.def("validate", &validate, py::arg("model"));

  m.def("predict", &predict, py::arg("model"), py::arg("rows"), py::arg("backend") = "matrix",
        py::arg("workers") = 1, py::arg("activation") = "binarized-relu", py::arg("selector") = "softmax",
        py::arg("temperature") = 1.0);
  m.def("predict_leaves", &predict_leaves, py::arg("model"), py::arg("rows"), py::arg("backend") = "matrix");

  m.def(
      "weighted_sparsemax",
      [](const std::vector<double>& z, std::optional<std::vector<double>> w) {
        return weighted_sparsemax(z, w ? *w : harmonic_weights(z.size()));
      },
      py::arg("z"), py::arg("w") = py::none());

  m.def(
      "selfcheck",
      [](std::uint64_t seed, std::size_t count, std::size_t max_leaves, std::size_t inputs) {
        SelfcheckOptions o;
        o.seed = seed;
        o.count = count;
        o.max_leaves = max_leaves;
        o.inputs_per_tree = inputs;
        const SelfcheckResult r = run_selfcheck(o);
        py::dict out;
        out["passed"] = r.passed;
        out["cases"] = r.cases;
        out["checks"] = r.checks;
        if (r.failure) {
          out["check"] = r.failure->check;
          out["detail"] = r.failure->detail;
        }
        return out;
      },
      py::arg("seed") = 1, py::arg("count") = 100, py::arg("max_leaves") = 16, py::arg("inputs") = 20);

  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        py::print(out.str(), py::arg("end") = "");
        if (!err.str().empty()) {
          py::print(err.str(), py::arg("end") = "", py::arg("file") = py::module_::import("sys").attr("stderr"));
        }
        return code;
      },
      py::arg("args"));
}
