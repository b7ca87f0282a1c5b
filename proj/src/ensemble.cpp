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


#include "arbo/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>
#include <thread>

#include "arbo/error.hpp"

namespace arbo {

std::string to_string(Backend b) {
  switch (b) {
    case Backend::kClassic:
      return "classic";
    case Backend::kMatrix:
      return "matrix";
    case Backend::kBitwise:
      return "bitwise";
    case Backend::kTernary:
      return "ternary";
    case Backend::kSumProduct:
      return "sumproduct";
    case Backend::kSoft:
      return "soft";
  }
  return "?";
}

Backend parse_backend(const std::string& name) {
  for (Backend b : {Backend::kClassic, Backend::kMatrix, Backend::kBitwise, Backend::kTernary,
                    Backend::kSumProduct, Backend::kSoft}) {
    if (to_string(b) == name) return b;
  }
  if (name == "sum-product") return Backend::kSumProduct;
  throw ConfigError("unknown backend '" + name + "' (classic|matrix|bitwise|ternary|sumproduct|soft)");
}

std::string to_string(Aggregation a) { return a == Aggregation::kSum ? "sum" : "vote"; }

Aggregation parse_aggregation(const std::string& name) {
  if (name == "sum") return Aggregation::kSum;
  if (name == "vote" || name == "majority-vote") return Aggregation::kVote;
  throw ConfigError("unknown aggregation '" + name + "' (sum|vote)");
}

// ---------------------------------------------------------------------------
// Model

void EnsembleModel::finish_member(EnsembleMember& m) {
  m.ternary.reset();
  m.ternary_kernel.reset();
  m.bitwise.reset();
  m.dense_bits.clear();
  m.packed_rows.clear();
  m.packed_words = 0;
  if (!m.tuple) return;
  const TreeTuple& t = *m.tuple;
  try {
    m.ternary = std::make_shared<const TernaryTuple>(ternary_form(t));
    m.ternary_kernel = std::make_shared<const TernaryKernel>(m.ternary);
  } catch (const InvalidStructureError&) {
    // Only reachable through with_member_tuple; the ternary backend reports it.
  }
  m.bitwise = std::make_shared<const BitwiseTree>(m.tuple);
  const std::size_t L = t.n_leaves();
  m.dense_bits.assign(L * t.n_internal(), 0.0);
  for (std::size_t j = 0; j < t.n_internal(); ++j) {
    for (std::size_t i = 0; i < L; ++i) m.dense_bits[j * L + i] = t.bits(i, j) ? 1.0 : 0.0;
  }
  m.packed_words = (t.n_internal() + 63) / 64;
  m.packed_rows.assign(L * m.packed_words, 0);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < t.n_internal(); ++j) {
      if (t.bits(i, j)) m.packed_rows[i * m.packed_words + j / 64] |= std::uint64_t{1} << (j % 64);
    }
  }
}

EnsembleModel::EnsembleModel(SchemaPtr schema, Task task, Aggregation aggregation, std::vector<DecisionTree> trees,
                             std::vector<double> weights)
    : schema_(std::move(schema)), task_(task), aggregation_(aggregation), weights_(std::move(weights)) {
  if (!schema_) throw InputError("ensemble: missing feature schema");
  if (weights_.empty()) weights_.assign(trees.size(), 1.0);
  if (weights_.size() != trees.size()) {
    throw InputError("ensemble: " + std::to_string(weights_.size()) + " weights for " +
                     std::to_string(trees.size()) + " trees");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw InputError("ensemble: tree weights must be finite");
  }
  if (aggregation_ == Aggregation::kVote && task_ != Task::kClassification) {
    throw InputError("ensemble: vote aggregation needs classification trees");
  }
  members_.reserve(trees.size());
  for (std::size_t k = 0; k < trees.size(); ++k) {
    DecisionTree& tree = trees[k];
    if (!(tree.schema() == *schema_)) throw InputError("ensemble: tree " + std::to_string(k) + " has another schema");
    if (tree.task() != task_) throw InputError("ensemble: tree " + std::to_string(k) + " mixes leaf types");
    EnsembleMember m;
    m.tree = std::make_shared<const DecisionTree>(std::move(tree));
    if (m.tree->n_internal() > 0) m.tuple = std::make_shared<const TreeTuple>(compile(*m.tree));
    m.compact = CompactTree::from(*m.tree);
    try {
      m.sum_product = sum_product_form(*m.tree);
    } catch (const UnsupportedFormError&) {
    }
    finish_member(m);
    if (task_ == Task::kClassification) {
      for (NodeId leaf : m.tree->leaves()) {
        const double c = std::get<ConstantLeaf>(m.tree->node(leaf).leaf).value;
        n_classes_ = std::max(n_classes_, static_cast<int>(c) + 1);
      }
    }
    members_.push_back(std::move(m));
  }
}

EnsembleModel EnsembleModel::with_member_tuple(std::size_t k, TreeTuple tuple) const {
  if (k >= members_.size() || !members_[k].tuple) {
    throw InputError("ensemble: member " + std::to_string(k) + " has no tuple to replace");
  }
  const TreeTuple& old = *members_[k].tuple;
  if (tuple.n_leaves() != old.n_leaves() || tuple.n_internal() != old.n_internal() ||
      tuple.bits.rows() != old.bits.rows() || tuple.bits.cols() != old.bits.cols()) {
    throw InputError("ensemble: replacement tuple has other dimensions");
  }
  EnsembleModel copy = *this;
  tuple.index();
  EnsembleMember& m = copy.members_[k];
  m.tuple = std::make_shared<const TreeTuple>(std::move(tuple));
  finish_member(m);
  return copy;
}

std::size_t EnsembleModel::max_leaves() const {
  std::size_t out = 0;
  for (const auto& m : members_) out = std::max(out, m.tree->n_leaves());
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

struct Scratch {
  std::vector<double> scores;
  std::vector<std::uint64_t> h;
  std::vector<int> signs;
};

#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define ARBO_POPCOUNT_CLONES __attribute__((target_clones("popcnt", "default")))
#else
#define ARBO_POPCOUNT_CLONES
#endif

// first_argmax of popcount(row_i AND h) over bit-packed rows. Scores and the
// reversed row index share one key so the maximum is taken without
// data-dependent branches.
ARBO_POPCOUNT_CLONES int packed_first_argmax(const std::uint64_t* rows, std::size_t L, std::size_t words,
                                             const std::uint64_t* h) {
  if (L <= 0xffff) {
    std::uint64_t best = 0;
    for (std::size_t i = 0; i < L; ++i) {
      std::uint64_t count = 0;
      for (std::size_t w = 0; w < words; ++w) count += static_cast<std::uint64_t>(std::popcount(rows[i * words + w] & h[w]));
      const std::uint64_t key = (count << 16) | (0xffff - i);
      best = best > key ? best : key;
    }
    return static_cast<int>(0xffff - (best & 0xffff));
  }
  std::uint64_t top = 0;
  int arg = 0;
  for (std::size_t i = 0; i < L; ++i) {
    std::uint64_t count = 0;
    for (std::size_t w = 0; w < words; ++w) count += static_cast<std::uint64_t>(std::popcount(rows[i * words + w] & h[w]));
    if (i == 0 || count > top) {
      top = count;
      arg = static_cast<int>(i);
    }
  }
  return arg;
}

// Matrix backend without schema checks or allocation per call.
int matrix_leaf(const EnsembleMember& m, std::span<const double> x, const Activation& act, Scratch& scratch) {
  const TreeTuple& t = *m.tuple;
  const std::size_t L = t.n_leaves();
  const std::size_t nl = t.n_internal();
  if (act.kind() == Activation::Kind::kBinarizedRelu) {
    if (m.packed_words == 1 && t.axis_only()) {
      const int* feature = t.one_hot_feature().data();
      const double* threshold = t.thresholds.data();
      std::uint64_t h = 0;
      for (std::size_t j = 0; j < nl; ++j) {
        h |= static_cast<std::uint64_t>(x[static_cast<std::size_t>(feature[j])] > threshold[j]) << j;
      }
      return packed_first_argmax(m.packed_rows.data(), L, 1, &h);
    }
    scratch.h.assign(m.packed_words, 0);
    std::uint64_t* h = scratch.h.data();
    if (t.axis_only()) {
      const int* feature = t.one_hot_feature().data();
      const double* threshold = t.thresholds.data();
      for (std::size_t j = 0; j < nl; ++j) {
        h[j / 64] |= static_cast<std::uint64_t>(x[static_cast<std::size_t>(feature[j])] > threshold[j]) << (j % 64);
      }
    } else {
      for (std::size_t j = 0; j < nl; ++j) h[j / 64] |= static_cast<std::uint64_t>(t.margin(j, x) > 0.0) << (j % 64);
    }
    return packed_first_argmax(m.packed_rows.data(), L, m.packed_words, h);
  }
  scratch.scores.assign(L, 0.0);
  double* acc = scratch.scores.data();
  for (std::size_t j = 0; j < nl; ++j) {
    const double h = act(t.margin(j, x));
    if (h == 0.0) continue;
    const double* col = m.dense_bits.data() + j * L;
    for (std::size_t i = 0; i < L; ++i) acc[i] += h * col[i];
  }
  return first_argmax(scratch.scores);
}

double constant_member(const EnsembleMember& m, std::span<const double> x) {
  return leaf_value(m.tree->node(m.tree->root()).leaf, x);
}

Prediction unchecked_member(const EnsembleMember& m, std::span<const double> x, Backend backend,
                            const ScoringOptions& options, Scratch& scratch) {
  if (!m.tuple) {
    return {0, constant_member(m, x)};
  }
  const TreeTuple& t = *m.tuple;
  switch (backend) {
    case Backend::kClassic: {
      const int leaf = m.compact ? m.compact->leaf(x) : classic_leaf(*m.tree, x);
      return {leaf, leaf_value(m.tree->node(m.tree->leaves()[static_cast<std::size_t>(leaf)]).leaf, x)};
    }
    case Backend::kMatrix: {
      const int leaf = matrix_leaf(m, x, options.activation, scratch);
      return {leaf, leaf_value(t.values[static_cast<std::size_t>(leaf)], x)};
    }
    case Backend::kBitwise: {
      const int leaf = m.bitwise->exit_leaf(x);
      if (leaf < 0) throw DomainError("bitwise traversal: AND of false-node bitvectors is empty");
      return {leaf, leaf_value(t.values[static_cast<std::size_t>(leaf)], x)};
    }
    case Backend::kTernary:
      if (!m.ternary) throw DomainError("ternary form unavailable: B is not a structure matrix");
    {
      const int leaf = m.ternary_kernel->exit_leaf(x, scratch.signs);
      return {leaf, leaf_value(m.ternary->values[static_cast<std::size_t>(leaf)], x)};
    }
    case Backend::kSumProduct:
      if (!m.sum_product) {
        throw UnsupportedFormError("sum-product form needs axis-aligned regression trees with constant leaves");
      }
      return {-1, predict_sum_product(*m.sum_product, x)};
    case Backend::kSoft:
      return {-1, predict_soft(t, x, options.selector, options.activation)};
  }
  throw ConfigError("unknown backend");
}

void check_backend(const EnsembleModel& model, Backend backend) {
  if (model.aggregation() == Aggregation::kVote && (backend == Backend::kSoft || backend == Backend::kSumProduct)) {
    throw UnsupportedFormError(to_string(backend) + " backend does not produce class labels");
  }
}

int class_of(double v) { return static_cast<int>(v); }

double plurality(const std::vector<int>& counts) {
  if (counts.empty()) throw DomainError("vote over an empty ensemble");
  return static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

double score_row(const EnsembleModel& model, std::span<const double> x, Backend backend,
                 const ScoringOptions& options, Scratch& scratch, std::vector<int>& votes) {
  if (model.aggregation() == Aggregation::kSum) {
    double total = 0.0;
    for (std::size_t k = 0; k < model.size(); ++k) {
      total += model.weights()[k] * unchecked_member(model.member(k), x, backend, options, scratch).value;
    }
    return total;
  }
  votes.assign(static_cast<std::size_t>(model.n_classes()), 0);
  for (std::size_t k = 0; k < model.size(); ++k) {
    ++votes[static_cast<std::size_t>(class_of(unchecked_member(model.member(k), x, backend, options, scratch).value))];
  }
  return plurality(votes);
}

// Per-tree loop over a row range: every tree sweeps the whole range before
// the next one starts. Accumulation order per row is still tree 0..K-1, so
// sums are bit-identical to the per-row loop.
void score_range_per_tree(const EnsembleModel& model, const Dataset& data, std::size_t lo, std::size_t hi,
                          Backend backend, const ScoringOptions& options, double* out) {
  Scratch scratch;
  const std::size_t n = hi - lo;
  if (model.aggregation() == Aggregation::kSum) {
    std::fill(out + lo, out + hi, 0.0);
    for (std::size_t k = 0; k < model.size(); ++k) {
      const double w = model.weights()[k];
      const EnsembleMember& m = model.member(k);
      for (std::size_t r = lo; r < hi; ++r) {
        out[r] += w * unchecked_member(m, data.row(r), backend, options, scratch).value;
      }
    }
    return;
  }
  const auto nc = static_cast<std::size_t>(model.n_classes());
  std::vector<int> votes(n * nc, 0);
  for (std::size_t k = 0; k < model.size(); ++k) {
    const EnsembleMember& m = model.member(k);
    for (std::size_t r = lo; r < hi; ++r) {
      const int c = class_of(unchecked_member(m, data.row(r), backend, options, scratch).value);
      ++votes[(r - lo) * nc + static_cast<std::size_t>(c)];
    }
  }
  for (std::size_t r = lo; r < hi; ++r) {
    const std::vector<int> row(votes.begin() + static_cast<std::ptrdiff_t>((r - lo) * nc),
                               votes.begin() + static_cast<std::ptrdiff_t>((r - lo + 1) * nc));
    out[r] = plurality(row);
  }
}

// Interleaved: all trees per row.
void score_range_per_row(const EnsembleModel& model, const Dataset& data, std::size_t lo, std::size_t hi,
                         Backend backend, const ScoringOptions& options, double* out) {
  Scratch scratch;
  std::vector<int> votes;
  for (std::size_t r = lo; r < hi; ++r) out[r] = score_row(model, data.row(r), backend, options, scratch, votes);
}

std::string iteration_order(Backend backend) {
  return backend == Backend::kMatrix ? "per-tree" : "interleaved";
}

}  // namespace

Prediction score_member(const EnsembleMember& member, std::span<const double> x, Backend backend,
                        const ScoringOptions& options) {
  member.tree->schema().check(x);
  Scratch scratch;
  return unchecked_member(member, x, backend, options, scratch);
}

double score_ensemble(const EnsembleModel& model, std::span<const double> x, Backend backend,
                      const ScoringOptions& options) {
  check_backend(model, backend);
  if (model.schema_ptr()) model.schema().check(x);
  Scratch scratch;
  std::vector<int> votes;
  return score_row(model, x, backend, options, scratch, votes);
}

std::vector<double> score_batch(const EnsembleModel& model, const Dataset& data, Backend backend,
                                std::size_t workers, const ScoringOptions& options) {
  check_backend(model, backend);
  const std::size_t n = data.size();
  if (n > 0 && data.rows.cols() != model.schema().size()) {
    throw RowError(0, "expected " + std::to_string(model.schema().size()) + " features, got " +
                          std::to_string(data.rows.cols()));
  }
  for (std::size_t r = 0; r < n; ++r) {
    try {
      model.schema().check(data.row(r));
    } catch (const RowError&) {
      throw;
    } catch (const InputError& e) {
      throw RowError(r, e.what());
    }
  }
  std::vector<double> out(n, 0.0);
  workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(1, n)));
  const auto run = backend == Backend::kMatrix ? score_range_per_tree : score_range_per_row;
  if (workers == 1) {
    run(model, data, 0, n, backend, options, out.data());
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(n, w * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      try {
        run(model, data, lo, hi, backend, options, out.data());
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bench

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

std::string environment_note(std::size_t workers) {
  std::ostringstream os;
#if defined(__clang__)
  os << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  os << "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
  os << "unknown compiler";
#endif
#ifdef NDEBUG
  os << ", optimized build";
#else
  os << ", debug build";
#endif
  os << ", " << std::thread::hardware_concurrency() << " hardware threads, " << workers << " worker(s)";
  return os.str();
}

constexpr std::size_t kLeafCheckRows = 1000;
constexpr std::size_t kDiffSample = 5;

void verify_backend(const EnsembleModel& model, const Dataset& data, Backend backend, std::size_t workers,
                    const ScoringOptions& options, const std::vector<double>& reference) {
  const std::string name = to_string(backend);
  std::vector<double> got;
  try {
    got = score_batch(model, data, backend, workers, options);
  } catch (const BackendDisagreementError&) {
    throw;
  } catch (const DomainError& e) {
    throw BackendDisagreementError("backend " + name + " failed during verification: " + e.what());
  }
  std::ostringstream diff;
  std::size_t bad = 0;
  for (std::size_t r = 0; r < reference.size(); ++r) {
    if (same_bits(reference[r], got[r])) continue;
    if (bad < kDiffSample) diff << "\n  row " << r << ": classic " << reference[r] << ", " << name << " " << got[r];
    ++bad;
  }
  // Leaf-level check on a prefix: equal sums can hide swapped leaves.
  Scratch scratch;
  const std::size_t rows = std::min(data.size(), kLeafCheckRows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < model.size(); ++k) {
      const EnsembleMember& m = model.member(k);
      const int expect = unchecked_member(m, data.row(r), Backend::kClassic, options, scratch).leaf;
      int leaf = -1;
      try {
        leaf = unchecked_member(m, data.row(r), backend, options, scratch).leaf;
      } catch (const DomainError&) {
        leaf = -2;
      }
      if (leaf == -1 || leaf == expect) continue;
      if (bad < kDiffSample) {
        diff << "\n  row " << r << ", tree " << k << ": classic leaf " << expect << ", " << name << " leaf " << leaf;
      }
      ++bad;
    }
  }
  if (bad > 0) {
    throw BackendDisagreementError("backend " + name + " disagrees with classic traversal on " +
                                   std::to_string(bad) + " check(s):" + diff.str());
  }
}

}  // namespace

BenchReport run_bench(const EnsembleModel& model, const Dataset& data, const std::vector<Backend>& backends,
                      std::size_t repetitions, std::size_t workers, const ScoringOptions& options) {
  if (repetitions == 0) throw ConfigError("bench needs at least one repetition");
  if (backends.empty()) throw ConfigError("bench needs at least one backend");
  for (Backend b : backends) {
    if (b == Backend::kSoft) throw ConfigError("soft backend cannot be verified against classic traversal");
  }
  workers = std::max<std::size_t>(1, workers);

  // Verification doubles as warm-up. Nothing is timed until every backend
  // has passed.
  const std::vector<double> reference = score_batch(model, data, Backend::kClassic, workers, options);
  for (Backend b : backends) {
    if (b != Backend::kClassic) verify_backend(model, data, b, workers, options, reference);
  }

  BenchReport report;
  report.workers = workers;
  report.verified_rows = data.size();
  report.environment = environment_note(workers);
  for (Backend b : backends) {
    std::vector<double> seconds;
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto out = score_batch(model, data, b, workers, options);
      const auto t1 = std::chrono::steady_clock::now();
      seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(seconds.begin(), seconds.end());
    const std::size_t mid = seconds.size() / 2;
    const double median = seconds.size() % 2 == 1 ? seconds[mid] : 0.5 * (seconds[mid - 1] + seconds[mid]);
    BenchEntry e;
    e.backend = b;
    e.trees = model.size();
    e.max_leaves = model.max_leaves();
    e.batch_size = data.size();
    e.repetitions = repetitions;
    e.median_seconds = median;
    e.rows_per_second = median > 0.0 ? static_cast<double>(data.size()) / median : 0.0;
    e.iteration_order = iteration_order(b);
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace arbo
