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

#include "arbo/validator.hpp"

#include <gmpxx.h>

#include <utility>

#include "arbo/error.hpp"
#include "arbo/tensorizer.hpp"

namespace arbo {

namespace {

using BigMatrix = std::vector<std::vector<mpz_class>>;

BigMatrix to_big(const BitMatrix& b) {
  BigMatrix m(b.rows(), std::vector<mpz_class>(b.cols()));
  for (std::size_t r = 0; r < b.rows(); ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) m[r][c] = b(r, c);
  }
  return m;
}

BigMatrix to_big(const std::vector<std::vector<long>>& a) {
  BigMatrix m(a.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r].size() != a.front().size()) throw InputError("ragged integer matrix");
    m[r].assign(a[r].begin(), a[r].end());
  }
  return m;
}

struct Elimination {
  int rank = 0;
  int sign = 1;
  mpz_class last_pivot = 1;
};

// Bareiss elimination in place. Every entry after step k is a (k+1)-minor of
// the input, so the division by the previous pivot is exact.
Elimination bareiss(BigMatrix& m) {
  Elimination e;
  const std::size_t rows = m.size();
  const std::size_t cols = rows == 0 ? 0 : m[0].size();
  mpz_class prev = 1;
  std::size_t r = 0;
  mpz_class t;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    if (p != r) {
      std::swap(m[p], m[r]);
      e.sign = -e.sign;
    }
    const mpz_class& pivot = m[r][c];
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t k = c + 1; k < cols; ++k) {
        t = pivot * m[i][k];
        t -= m[i][c] * m[r][k];
        mpz_divexact(m[i][k].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      m[i][c] = 0;
    }
    prev = pivot;
    ++r;
  }
  e.rank = static_cast<int>(r);
  e.last_pivot = prev;
  return e;
}

}  // namespace

ValidationReport check_four_rules(const BitMatrix& bits) {
  if (bits.rows() < 2 || bits.cols() + 1 != bits.rows()) {
    throw InputError("structure matrix must be L x (L-1) with L >= 2, got " + std::to_string(bits.rows()) +
                     " x " + std::to_string(bits.cols()));
  }
  ValidationReport report;
  try {
    decode_structure(bits);
  } catch (const InvalidStructureError& e) {
    report.violations.push_back({e.rule(), e.columns(), e.rows(), e.message()});
  }
  report.valid = report.violations.empty();
  report.rank = rank_exact(bits);
  report.augmented_det_nonzero = augmented_invertible(bits);
  return report;
}

bool check_complement_pairs(const BitMatrix& bits) {
  for (std::size_t a = 0; a < bits.cols(); ++a) {
    for (std::size_t b = a + 1; b < bits.cols(); ++b) {
      bool pair = true;
      for (std::size_t r = 0; r < bits.rows() && pair; ++r) pair = bits(r, a) + bits(r, b) == 1;
      if (pair) return false;
    }
  }
  return true;
}

int rank_exact(const BitMatrix& bits) {
  BigMatrix m = to_big(bits);
  return bareiss(m).rank;
}

int rank_exact(const std::vector<std::vector<long>>& matrix) {
  if (matrix.empty()) return 0;
  BigMatrix m = to_big(matrix);
  return bareiss(m).rank;
}

std::string determinant_exact(const std::vector<std::vector<long>>& matrix) {
  for (const auto& row : matrix) {
    if (row.size() != matrix.size()) throw InputError("determinant needs a square matrix");
  }
  if (matrix.empty()) return "1";
  BigMatrix m = to_big(matrix);
  const Elimination e = bareiss(m);
  if (e.rank < static_cast<int>(matrix.size())) return "0";
  const mpz_class det = e.sign * e.last_pivot;
  return det.get_str();
}

bool augmented_invertible(const BitMatrix& bits) {
  if (bits.rows() == 0 || bits.cols() + 1 != bits.rows()) {
    throw InputError("augmented matrix needs B of shape L x (L-1), got " + std::to_string(bits.rows()) + " x " +
                     std::to_string(bits.cols()));
  }
  BigMatrix m = to_big(bits);
  for (auto& row : m) row.emplace_back(1);
  return bareiss(m).rank == static_cast<int>(bits.rows());
}

}  // namespace arbo
