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


// Fuzzed invariant suite behind `arbo selfcheck`: validator lemmas,
// structure round-trip and backend equivalence on seeded random trees.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arbo/tensorizer.hpp"
#include "arbo/tree.hpp"

namespace arbo {

struct SelfcheckOptions {
  std::uint64_t seed = 1;
  std::size_t count = 100;
  std::size_t max_leaves = 16;
  std::size_t inputs_per_tree = 20;
  // Flip one random bit of every compiled B before checking.
  bool inject_corruption = false;
};

struct SelfcheckFailure {
  std::size_t case_index = 0;
  std::string check;  // validator-lemmas | round-trip | backend-equivalence
  std::string detail;
  TreeTuple tuple;                     // possibly corrupted
  std::vector<FeatureVector> inputs;   // inputs that trigger the failure
};

struct SelfcheckResult {
  bool passed = true;
  std::size_t cases = 0;
  std::size_t checks = 0;
  std::optional<SelfcheckFailure> failure;
};

// Stops at the first failure. Failing trees are shrunk greedily (subtrees
// collapsed while the same check keeps failing) and inputs cut to one.
SelfcheckResult run_selfcheck(const SelfcheckOptions& options);

// Checks that need only the tuple: lemmas on B, BFS round-trip, and backend
// agreement with classic traversal of to_tree(tuple) on the given inputs.
// Returns the first failure, if any.
std::optional<SelfcheckFailure> check_tuple(const TreeTuple& tuple, const std::vector<FeatureVector>& inputs);

// A tuple model document (validation off on load) with a "selfcheck" block
// carrying the check name, detail, seed and failing inputs.
std::string reproducer_document(const SelfcheckFailure& failure, const SelfcheckOptions& options);

// Loads a reproducer and runs check_tuple on it.
SelfcheckResult replay_reproducer(const std::string& text);

}  // namespace arbo
