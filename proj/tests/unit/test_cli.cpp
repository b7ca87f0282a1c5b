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

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "arbo/cli.hpp"
#include "arbo/model_io.hpp"
#include "fixtures.hpp"

using namespace arbo;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "arbo_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("compile output is the golden tuple") {
  const Run r = run({"compile", fixture::path("fig1_tree.arbo.json")});
  CHECK(r.code == kExitOk);
  CHECK(r.out == read_text_file(fixture::path("fig1_tuple.arbo.json")));

  const fs::path out = scratch("pre.arbo.json");
  CHECK(run({"compile", fixture::path("fig1_tree.arbo.json"), "--ordering", "preorder", "-o", out.string()}).code ==
        kExitOk);
  CHECK(load_model(out.string()).tuple->ordering == InternalOrdering::kPreorder);
}

TEST_CASE("validate") {
  const Run ok = run({"validate", fixture::path("fig1_tuple.arbo.json")});
  CHECK(ok.code == kExitOk);
  const auto j = nlohmann::json::parse(ok.out);
  CHECK(j["valid"] == true);
  CHECK(j["rank"] == 5);
  CHECK(j["augmented_det_nonzero"] == true);

  for (const char* name : {"counterexample_matrix.arbo.json", "counterexample_tuple.arbo.json"}) {
    const Run bad = run({"validate", fixture::path(name)});
    CHECK(bad.code == kExitDomain);
    const auto v = nlohmann::json::parse(bad.out);
    CHECK(v["valid"] == false);
    REQUIRE(v["violations"].size() >= 1);
    CHECK(v["violations"][0]["rule"].get<int>() >= 1);
  }
  CHECK(run({"validate", "/nonexistent.arbo.json"}).code == kExitInput);
}

TEST_CASE("decode and export") {
  const Run d = run({"decode", fixture::path("fig1_tuple.arbo.json")});
  CHECK(d.code == kExitOk);
  CHECK(d.out == read_text_file(fixture::path("fig1_tree.arbo.json")));

  const fs::path bare = scratch("fig1_matrix.arbo.json");
  write_text_file(bare.string(), dump_model(ModelDocument::of(compile(fixture::fig1_tree()).bits)));
  const Run m = run({"decode", bare.string()});
  CHECK(m.code == kExitOk);
  CHECK(m.out.find("(((L,(L,L)),L),(L,L))") != std::string::npos);

  const Run bad = run({"decode", fixture::path("counterexample_matrix.arbo.json")});
  CHECK(bad.code == kExitDomain);

  const Run t = run({"export", fixture::path("fig1_tree.arbo.json"), "--to", "ternary"});
  CHECK(t.code == kExitOk);
  CHECK(t.out == read_text_file(fixture::path("fig1_ternary.arbo.json")));
  const Run mx = run({"export", fixture::path("fig1_tree.arbo.json"), "--to", "matrix"});
  CHECK(mx.code == kExitOk);
  CHECK(parse_model(mx.out).kind == PayloadKind::kMatrix);
  CHECK(run({"export", fixture::path("fig1_tree.arbo.json"), "--to", "onnx"}).code == kExitInput);
}

TEST_CASE("predict on every backend") {
  for (const char* backend : {"classic", "matrix", "bitwise", "ternary"}) {
    const Run r = run({"predict", "--model", fixture::path("fig1_tuple.arbo.json"), "--data",
                       fixture::path("fig1_inputs.csv"), "--backend", backend});
    CHECK(r.code == kExitOk);
    CHECK(r.out == "row_id,leaf_index,value\n0,4,5\n1,0,1\n");
  }
  const Run sp = run({"predict", "--model", fixture::path("fig1_tree.arbo.json"), "--data",
                      fixture::path("fig1_inputs.csv"), "--backend", "sumproduct"});
  CHECK(sp.code == kExitOk);
  CHECK(sp.out.rfind("row_id,leaf_index,value\n0,-1,5\n", 0) == 0);

  const Run soft = run({"predict", "--model", fixture::path("fig1_tuple.arbo.json"), "--data",
                        fixture::path("fig1_inputs.csv"), "--backend", "soft", "--temperature", "0.5"});
  CHECK(soft.code == kExitOk);

  CHECK(run({"predict", "--model", fixture::path("fig1_tuple.arbo.json"), "--data", fixture::path("fig1_inputs.csv"),
             "--backend", "gpu"})
            .code == kExitInput);
  CHECK(run({"predict", "--model", fixture::path("fig1_tuple.arbo.json")}).code == kExitInput);

  const fs::path csv = scratch("bad.csv");
  write_text_file(csv.string(), "f1,f2,f3,f4\n1,2,3,4\n1,2,oops,4\n");
  const Run rowerr = run({"predict", "--model", fixture::path("fig1_tuple.arbo.json"), "--data", csv.string()});
  CHECK(rowerr.code == kExitInput);
  CHECK(rowerr.err.find("row 1") != std::string::npos);
}

TEST_CASE("synth, predict and bench on an ensemble") {
  const fs::path model = scratch("ens.arbo.json");
  const fs::path data = scratch("ens.csv");
  const Run s = run({"synth", "--seed", "5", "--trees", "10", "--leaves", "8", "--features", "3", "--rows", "200",
                     "--model-out", model.string(), "--data-out", data.string()});
  REQUIRE(s.code == kExitOk);
  const Run p = run({"predict", "--model", model.string(), "--data", data.string(), "--workers", "3"});
  CHECK(p.code == kExitOk);
  CHECK(p.out.rfind("row_id,value\n", 0) == 0);
  CHECK(std::count(p.out.begin(), p.out.end(), '\n') == 201);

  const Run b = run({"bench", "--model", model.string(), "--data", data.string(), "--reps", "2"});
  CHECK(b.code == kExitOk);
  const auto j = nlohmann::json::parse(b.out);
  CHECK(j["backends"].size() == 3);
  CHECK(run({"bench", "--model", model.string(), "--data", data.string(), "--backends", "soft"}).code == kExitInput);
}

TEST_CASE("selfcheck passes, catches injected corruption and replays") {
  const Run ok = run({"selfcheck", "--seed", "3", "--count", "20"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("PASS") != std::string::npos);

  const fs::path repro = scratch("repro.arbo.json");
  const Run bad =
      run({"fuzz-selfcheck", "--seed", "3", "--count", "20", "--inject-corruption", "--reproducer", repro.string()});
  CHECK(bad.code == kExitDomain);
  CHECK(bad.out.find("FAIL") != std::string::npos);
  REQUIRE(fs::exists(repro));
  const Run replay = run({"selfcheck", "--replay", repro.string()});
  CHECK(replay.code == kExitDomain);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitInput);
  CHECK(run({"frobnicate"}).code == kExitInput);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"compile"}).code == kExitInput);
}
