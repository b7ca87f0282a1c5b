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

// Structure-matrix validation and exact-arithmetic lemma checks.
//
// Rule ids used in reports:
//   1  root: the subtree root holds the most 0s among the columns ruling out
//      the subtree's leftmost leaf, and does not rule out the whole subtree;
//   2  a left-leaf parent holds exactly one 0 (every column has a 0);
//   3  left descendants keep the 1s set by their ancestors;
//   4  right descendants keep their 0s inside the parent's 1 block.

#pragma once

#include <string>
#include <vector>

#include "arbo/matrix.hpp"

namespace arbo {

struct RuleViolation {
  int rule = 0;
  std::vector<int> columns;
  std::vector<int> rows;
  std::string message;
};

struct ValidationReport {
  bool valid = false;
  std::vector<RuleViolation> violations;
  int rank = 0;
  bool augmented_det_nonzero = false;
};

// Decides whether B is a structure matrix by reconstructing the tree from it.
// Column order is not constrained. Throws InputError for non-L x (L-1)
// shapes (L >= 2); entries are binary by construction of BitMatrix.
ValidationReport check_four_rules(const BitMatrix& bits);

// True iff no two columns b, c satisfy b + c = 1.
bool check_complement_pairs(const BitMatrix& bits);

// Rank over the rationals by fraction-free (Bareiss) elimination on
// arbitrary-precision integers.
int rank_exact(const BitMatrix& bits);
int rank_exact(const std::vector<std::vector<long>>& matrix);

// Exact determinant of a square integer matrix, as a decimal string.
std::string determinant_exact(const std::vector<std::vector<long>>& matrix);

// det [B | 1] != 0. Throws InputError unless B is L x (L-1).
bool augmented_invertible(const BitMatrix& bits);

}  // namespace arbo
