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

#include "arbo/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "arbo/error.hpp"

namespace arbo {

// ---------------------------------------------------------------------------
// Activations

Activation Activation::scaled_relu(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("scaled-relu needs alpha > 0, got " + std::to_string(alpha));
  }
  return Activation(Kind::kScaledRelu, "scaled-relu:" + std::to_string(alpha), alpha);
}

Activation Activation::custom(std::string name, std::function<double(double)> fn) {
  if (!fn) throw ConfigError("custom activation '" + name + "' has no function");
  // Probe grid: zero, both signs over many magnitudes, plus a few odd points.
  std::vector<double> grid{0.0, -0.0, 0.5, -0.5, 1.0, -1.0, 3.0, -3.0};
  for (int e = -12; e <= 12; ++e) {
    grid.push_back(std::ldexp(1.0, e));
    grid.push_back(-std::ldexp(1.0, e));
    grid.push_back(std::ldexp(1.7, e));
  }
  for (double z : grid) {
    const double v = fn(z);
    const bool ok = z > 0.0 ? v > 0.0 : v == 0.0;
    if (!ok) {
      throw ConfigError("activation '" + name + "' is not positivity-augmented: f(" + std::to_string(z) +
                        ") = " + std::to_string(v));
    }
  }
  Activation a(Kind::kCustom, std::move(name));
  a.fn_ = std::move(fn);
  return a;
}

Activation Activation::from_name(const std::string& name) {
  if (name == "binarized-relu" || name == "step") return binarized_relu();
  if (name == "relu") return relu();
  if (name == "rectified-quadratic") return rectified_quadratic();
  if (name == "scaled-relu") return scaled_relu(1.0);
  if (name.rfind("scaled-relu:", 0) == 0) {
    const std::string arg = name.substr(12);
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size()) throw ConfigError("bad scaled-relu parameter '" + arg + "'");
    return scaled_relu(alpha);
  }
  throw ConfigError("unknown activation '" + name + "'");
}

// ---------------------------------------------------------------------------
// Phases

int first_argmax(std::span<const double> scores) {
  if (scores.empty()) throw InputError("first_argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<int>(best);
}

double evaluate_test_function(const TestFunction& test, std::span<const double> x) { return test_margin(test, x); }

double TreeTuple::margin(std::size_t column, std::span<const double> x) const {
  if (const int s = bank_slot_[column]; s >= 0) {
    const BankedTest& b = test_bank[static_cast<std::size_t>(s)];
    if (b.inner) {
      const auto& c = std::get<ComposedTest>(b.test);
      return predict_matrix(*b.inner, x).value - c.threshold;
    }
    return test_margin(b.test, x);
  }
  if (const int f = one_hot_[column]; f >= 0) return x[static_cast<std::size_t>(f)] - thresholds[column];
  const auto row = selection.row(column);
  double s = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) s += row[k] * x[k];
  return s - thresholds[column];
}

std::vector<double> test_margins(const TreeTuple& tuple, std::span<const double> x) {
  std::vector<double> m(tuple.n_internal());
  for (std::size_t j = 0; j < m.size(); ++j) m[j] = tuple.margin(j, x);
  return m;
}

std::vector<double> test_phase(const TreeTuple& tuple, std::span<const double> x, const Activation& activation) {
  if (tuple.schema) tuple.schema->check(x);
  std::vector<double> h = test_margins(tuple, x);
  for (double& v : h) v = activation(v);
  return h;
}

std::vector<double> traversal_phase(const BitMatrix& bits, std::span<const double> h) {
  if (h.size() != bits.cols()) {
    throw InputError("traversal: h has " + std::to_string(h.size()) + " entries, B has " +
                     std::to_string(bits.cols()) + " columns");
  }
  std::vector<double> b(bits.rows(), 0.0);
  for (std::size_t j = 0; j < bits.cols(); ++j) {
    if (h[j] == 0.0) continue;
    for (std::size_t i = 0; i < bits.rows(); ++i) {
      if (bits(i, j)) b[i] += h[j];
    }
  }
  return b;
}

std::vector<double> traversal_phase(const DenseMatrix& m, std::span<const double> h) {
  if (h.size() != m.cols()) {
    throw InputError("traversal: h has " + std::to_string(h.size()) + " entries, B has " +
                     std::to_string(m.cols()) + " columns");
  }
  std::vector<double> b(m.rows(), 0.0);
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (h[j] == 0.0) continue;
    for (std::size_t i = 0; i < m.rows(); ++i) b[i] += m(i, j) * h[j];
  }
  return b;
}

namespace {

Prediction finish(const std::vector<LeafModel>& values, int leaf, std::span<const double> x) {
  return {leaf, leaf_value(values[static_cast<std::size_t>(leaf)], x)};
}

}  // namespace

Prediction predict_matrix(const TreeTuple& tuple, std::span<const double> x, const Activation& activation) {
  const auto h = test_phase(tuple, x, activation);
  const auto b = traversal_phase(tuple.bits, h);
  return finish(tuple.values, first_argmax(b), x);
}

// ---------------------------------------------------------------------------
// Bitwise

BitwiseTree::BitwiseTree(TuplePtr tuple) : tuple_(std::move(tuple)) {
  const BitMatrix& b = tuple_->bits;
  words_ = (b.rows() + 63) / 64;
  masks_.assign(b.cols() * words_, 0);
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t r = 0; r < b.rows(); ++r) {
      if (b(r, c)) masks_[c * words_ + r / 64] |= std::uint64_t{1} << (r % 64);
    }
  }
}

namespace {

std::vector<std::uint64_t> all_ones(std::size_t leaves, std::size_t words) {
  std::vector<std::uint64_t> m(words, ~std::uint64_t{0});
  if (const std::size_t tail = leaves % 64; tail != 0) m.back() = (std::uint64_t{1} << tail) - 1;
  return m;
}

int lowest_set(std::span<const std::uint64_t> m) {
  for (std::size_t w = 0; w < m.size(); ++w) {
    if (m[w] != 0) return static_cast<int>(w * 64) + std::countr_zero(m[w]);
  }
  return -1;
}

}  // namespace

int BitwiseTree::exit_leaf(std::span<const double> x) const {
  const TreeTuple& t = *tuple_;
  const std::size_t nl = t.n_internal();
  if (words_ == 1) {
    const std::size_t leaves = t.n_leaves();
    std::uint64_t acc = leaves == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << leaves) - 1;
    if (t.axis_only()) {
      const int* feature = t.one_hot_feature().data();
      const double* threshold = t.thresholds.data();
      // Branch-free: the comparison outcome is data dependent.
      for (std::size_t j = 0; j < nl; ++j) {
        const std::uint64_t is_false = -static_cast<std::uint64_t>(x[static_cast<std::size_t>(feature[j])] > threshold[j]);
        acc &= masks_[j] | ~is_false;
      }
    } else {
      for (std::size_t j = 0; j < nl; ++j) {
        if (t.margin(j, x) > 0.0) acc &= masks_[j];
      }
    }
    return acc == 0 ? -1 : std::countr_zero(acc);
  }
  std::vector<std::uint64_t> acc = all_ones(t.n_leaves(), words_);
  for (std::size_t j = 0; j < nl; ++j) {
    if (!(t.margin(j, x) > 0.0)) continue;
    const auto m = mask(j);
    for (std::size_t w = 0; w < words_; ++w) acc[w] &= m[w];
  }
  return lowest_set(acc);
}

int leftmost_of_and(const BitMatrix& bits, std::span<const int> false_columns) {
  const std::size_t words = (bits.rows() + 63) / 64;
  std::vector<std::uint64_t> acc = all_ones(bits.rows(), words);
  for (int c : false_columns) {
    std::vector<std::uint64_t> m(words, 0);
    for (std::size_t r = 0; r < bits.rows(); ++r) {
      if (bits(r, static_cast<std::size_t>(c))) m[r / 64] |= std::uint64_t{1} << (r % 64);
    }
    for (std::size_t w = 0; w < words; ++w) acc[w] &= m[w];
  }
  return lowest_set(acc);
}

Prediction predict_bitwise(const TreeTuple& tuple, std::span<const double> x) {
  if (tuple.schema) tuple.schema->check(x);
  // Non-owning handle; the tree does not outlive this call.
  const BitwiseTree tree(TuplePtr(std::shared_ptr<void>{}, &tuple));
  const int leaf = tree.exit_leaf(x);
  if (leaf < 0) throw DomainError("bitwise traversal: AND of false-node bitvectors is empty");
  return finish(tuple.values, leaf, x);
}

// ---------------------------------------------------------------------------
// Ternary

namespace {

double ternary_margin(const TernaryTuple& t, std::size_t column, std::span<const double> x) {
  for (const auto& b : t.test_bank) {
    if (static_cast<std::size_t>(b.column) != column) continue;
    if (b.inner) return predict_matrix(*b.inner, x).value - std::get<ComposedTest>(b.test).threshold;
    return test_margin(b.test, x);
  }
  // Augmented row [S_j | t_j] against (x, -1).
  const auto row = t.augmented_selection.row(column);
  const std::size_t n = row.size() - 1;
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += row[k] * x[k];
  return s + row[n] * -1.0;
}

}  // namespace

std::vector<double> ternary_scores(const TernaryTuple& ternary, std::span<const double> x) {
  if (ternary.schema) ternary.schema->check(x);
  const std::size_t nl = ternary.n_internal();
  std::vector<int> sgn(nl);
  for (std::size_t j = 0; j < nl; ++j) sgn[j] = ternary_margin(ternary, j, x) > 0.0 ? 1 : -1;
  std::vector<double> scores(ternary.n_leaves());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    // Integer dot product first so the matching row lands on exactly 1.
    int dot = 0;
    for (std::size_t j = 0; j < nl; ++j) dot += ternary.at(i, j) * sgn[j];
    scores[i] = static_cast<double>(dot) / static_cast<double>(ternary.row_norm[i]);
  }
  return scores;
}

Prediction predict_ternary(const TernaryTuple& ternary, std::span<const double> x) {
  const auto scores = ternary_scores(ternary, x);
  return finish(ternary.values, first_argmax(scores), x);
}

TernaryKernel::TernaryKernel(std::shared_ptr<const TernaryTuple> ternary) : ternary_(std::move(ternary)) {
  const TernaryTuple& t = *ternary_;
  const std::size_t nl = t.n_internal();
  feature_.assign(nl, -1);
  threshold_.assign(nl, 0.0);
  std::vector<bool> banked(nl, false);
  for (const auto& b : t.test_bank) banked[static_cast<std::size_t>(b.column)] = true;
  for (std::size_t j = 0; j < nl; ++j) {
    const auto row = t.augmented_selection.row(j);
    const std::size_t n = row.size() - 1;
    threshold_[j] = row[n];
    if (banked[j]) continue;
    int hot = -1;
    for (std::size_t k = 0; k < n; ++k) {
      if (row[k] == 0.0) continue;
      if (row[k] != 1.0 || hot >= 0) {
        hot = -2;
        break;
      }
      hot = static_cast<int>(k);
    }
    if (hot >= 0) feature_[j] = hot;
  }
  row_start_.push_back(0);
  for (std::size_t i = 0; i < t.n_leaves(); ++i) {
    for (std::size_t j = 0; j < nl; ++j) {
      if (const int v = t.at(i, j); v != 0) {
        entry_column_.push_back(static_cast<int>(j));
        entry_sign_.push_back(v);
      }
    }
    row_start_.push_back(static_cast<int>(entry_column_.size()));
  }
}

int TernaryKernel::exit_leaf(std::span<const double> x, std::vector<int>& sign_scratch) const {
  const TernaryTuple& t = *ternary_;
  const std::size_t nl = t.n_internal();
  sign_scratch.resize(nl);
  int* sgn = sign_scratch.data();
  for (std::size_t j = 0; j < nl; ++j) {
    const double margin = feature_[j] >= 0 ? x[static_cast<std::size_t>(feature_[j])] - threshold_[j]
                                           : ternary_margin(t, j, x);
    sgn[j] = margin > 0.0 ? 1 : -1;
  }
  double best = 0.0;
  int arg = 0;
  for (std::size_t i = 0; i < t.n_leaves(); ++i) {
    int dot = 0;
    for (int e = row_start_[i]; e < row_start_[i + 1]; ++e) {
      dot += entry_sign_[static_cast<std::size_t>(e)] * sgn[entry_column_[static_cast<std::size_t>(e)]];
    }
    const double score = static_cast<double>(dot) / static_cast<double>(t.row_norm[i]);
    if (i == 0 || score > best) {
      best = score;
      arg = static_cast<int>(i);
    }
  }
  return arg;
}

// ---------------------------------------------------------------------------
// Sum-product

double predict_sum_product(const SumProductForm& form, std::span<const double> x) {
  double total = 0.0;
  for (const auto& term : form.terms) {
    double prod = 1.0;
    for (const auto& f : term.factors) {
      const double z = f.sense * (x[static_cast<std::size_t>(f.feature)] - f.threshold);
      prod *= z > 0.0 ? 1.0 : 0.0;
    }
    total += term.coefficient * prod;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Soft selectors

std::vector<double> softmax_select(std::span<const double> scores, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("softmax temperature must be > 0");
  if (scores.empty()) throw InputError("softmax of an empty vector");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((scores[i] - top) / temperature);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> harmonic_weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / static_cast<double>(i + 1);
  return w;
}

std::vector<double> weighted_sparsemax(std::span<const double> z, std::span<const double> w) {
  if (z.empty()) throw InputError("weighted sparsemax of an empty vector");
  if (w.size() != z.size()) throw ConfigError("weighted sparsemax: weight count differs from input size");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) throw ConfigError("weighted sparsemax: weights must be positive");
    if (i > 0 && !(w[i] < w[i - 1])) throw ConfigError("weighted sparsemax: weights must be strictly decreasing");
  }
  const std::size_t n = z.size();
  // KKT: p_i = max(0, z_i - lambda / (2 w_i)); the sum is non-increasing in
  // lambda, so bisect for sum == 1.
  auto mass = [&](double lambda, std::vector<double>* p) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::max(0.0, z[i] - lambda / (2.0 * w[i]));
      if (p) (*p)[i] = v;
      s += v;
    }
    return s;
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, 2.0 * w[i] * (z[i] - 1.0));
    hi = std::max(hi, 2.0 * w[i] * z[i]);
  }
  std::vector<double> p(n);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = mass(mid, nullptr);
    if (std::abs(s - 1.0) <= 1e-12) {
      lo = hi = mid;
      break;
    }
    if (mid <= lo || mid >= hi) break;
    if (s > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double lambda = 0.5 * (lo + hi);
  mass(lambda, &p);

  // Closed form on the identified support removes the bisection residue.
  double zs = 0.0, inv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) {
      zs += z[i];
      inv += 1.0 / (2.0 * w[i]);
    }
  }
  if (inv > 0.0) {
    const double exact = (zs - 1.0) / inv;
    std::vector<double> q(n);
    mass(exact, &q);
    bool same_support = true;
    for (std::size_t i = 0; i < n; ++i) same_support = same_support && ((q[i] > 0.0) == (p[i] > 0.0));
    if (same_support) p = std::move(q);
  }
  return p;
}

std::vector<double> SoftSelector::select(std::span<const double> scores) const {
  if (kind == Kind::kSoftmax) return softmax_select(scores, temperature);
  if (weights.empty()) {
    const auto w = harmonic_weights(scores.size());
    return weighted_sparsemax(scores, w);
  }
  return weighted_sparsemax(scores, weights);
}

double predict_soft(const TreeTuple& tuple, std::span<const double> x, const SoftSelector& selector,
                    const Activation& activation) {
  if (tuple.task != Task::kRegression) {
    throw UnsupportedFormError("soft prediction needs numeric leaves (regression)");
  }
  const auto h = test_phase(tuple, x, activation);
  const auto b = traversal_phase(tuple.bits, h);
  const auto e = selector.select(b);
  double out = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] != 0.0) out += e[i] * leaf_value(tuple.values[i], x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generalised B

GeneralizedB GeneralizedB::from_bits(const BitMatrix& bits) {
  GeneralizedB g;
  g.entries = DenseMatrix(bits.rows(), bits.cols());
  for (std::size_t r = 0; r < bits.rows(); ++r) {
    for (std::size_t c = 0; c < bits.cols(); ++c) g.entries(r, c) = bits(r, c);
  }
  g.provenance = Provenance::kBitvector;
  return g;
}

GeneralizedB GeneralizedB::make(DenseMatrix entries, Provenance provenance, const BitMatrix& base) {
  if (entries.rows() != base.rows() || entries.cols() != base.cols()) {
    throw InputError("generalized B must have the shape of the bitvector matrix");
  }
  for (std::size_t c = 0; c < base.cols(); ++c) {
    double positive = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t r = 0; r < base.rows(); ++r) {
      const double v = entries(r, c);
      const bool one = base(r, c) != 0;
      bool ok = true;
      switch (provenance) {
        case Provenance::kBitvector:
          ok = v == (one ? 1.0 : 0.0);
          break;
        case Provenance::kPositiveScaled:
        case Provenance::kZeroNegated:
          if (one) {
            ok = v > 0.0 && (std::isnan(positive) || v == positive);
            positive = v;
          } else {
            ok = provenance == Provenance::kPositiveScaled ? v == 0.0 : v < 0.0;
          }
          break;
        case Provenance::kFree:
          ok = std::isfinite(v);
          break;
      }
      if (!ok) {
        throw InputError("generalized B entry (" + std::to_string(r) + ", " + std::to_string(c) +
                         ") breaks its provenance invariant");
      }
    }
  }
  return {std::move(entries), provenance};
}

GeneralizedB apply_generalized_B(const TreeTuple& tuple, const PositiveScale& transform) {
  if (transform.alpha.size() != tuple.n_internal()) {
    throw ConfigError("positive scaling needs one factor per internal node");
  }
  for (double a : transform.alpha) {
    if (!(a > 0.0)) throw ConfigError("positive scaling factors must be > 0");
  }
  DenseMatrix e(tuple.bits.rows(), tuple.bits.cols());
  for (std::size_t r = 0; r < e.rows(); ++r) {
    for (std::size_t c = 0; c < e.cols(); ++c) e(r, c) = tuple.bits(r, c) ? transform.alpha[c] : 0.0;
  }
  return {std::move(e), GeneralizedB::Provenance::kPositiveScaled};
}

GeneralizedB apply_generalized_B(const TreeTuple& tuple, const ZeroNegate& transform) {
  if (!(transform.value < 0.0)) throw ConfigError("zero substitute must be < 0");
  DenseMatrix e(tuple.bits.rows(), tuple.bits.cols());
  for (std::size_t r = 0; r < e.rows(); ++r) {
    for (std::size_t c = 0; c < e.cols(); ++c) e(r, c) = tuple.bits(r, c) ? 1.0 : transform.value;
  }
  return {std::move(e), GeneralizedB::Provenance::kZeroNegated};
}

Prediction predict_matrix(const TreeTuple& tuple, const GeneralizedB& b, std::span<const double> x,
                          const Activation& activation) {
  if (b.entries.rows() != tuple.n_leaves() || b.entries.cols() != tuple.n_internal()) {
    throw InputError("generalized B shape does not match the tuple");
  }
  const auto h = test_phase(tuple, x, activation);
  const auto scores = traversal_phase(b.entries, h);
  return finish(tuple.values, first_argmax(scores), x);
}

}  // namespace arbo
