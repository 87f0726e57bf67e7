// Copyright 2026 The grsvnet Authors.
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

#include "grsv/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "grsv/error.hpp"

namespace grsv {

// ---- batch plumbing -------------------------------------------------------

void LabeledBatch::validate() const {
  require(x.cols() == static_cast<Index>(y.size()), "LabeledBatch: column count != label count");
  require(ids.size() == y.size(), "LabeledBatch: id count != label count");
  for (int label : y)
    if (label < 1 || label > classes)
      throw ContractError("LabeledBatch: label " + std::to_string(label) + " outside 1.." +
                          std::to_string(classes));
}

std::vector<Index> LabeledBatch::class_counts() const {
  std::vector<Index> counts(static_cast<size_t>(classes), 0);
  for (int label : y) ++counts[static_cast<size_t>(label - 1)];
  return counts;
}

LabeledBatch LabeledBatch::select(std::span<const Index> columns) const {
  LabeledBatch out;
  out.classes = classes;
  out.x.resize(x.rows(), static_cast<Index>(columns.size()));
  out.y.reserve(columns.size());
  out.ids.reserve(columns.size());
  for (size_t k = 0; k < columns.size(); ++k) {
    const Index j = columns[k];
    require(j >= 0 && j < size(), "LabeledBatch::select: column out of range");
    out.x.col(static_cast<Index>(k)) = x.col(j);
    out.y.push_back(y[static_cast<size_t>(j)]);
    out.ids.push_back(ids[static_cast<size_t>(j)]);
  }
  return out;
}

void check_batch_split(const BatchSplit& split) {
  if (split.geometry.classes != split.validation.classes || split.geometry.classes < 1)
    throw ConfigError("batch split: halves disagree on the class count");
  split.geometry.validate();
  split.validation.validate();
  const auto g = split.geometry.class_counts();
  const auto v = split.validation.class_counts();
  for (size_t c = 0; c < g.size(); ++c) {
    if (g[c] < 1 || v[c] < 1)
      throw ConfigError("batch split: class " + std::to_string(c + 1) +
                        " missing from the geometry or validation half");
  }
}

BatchSplit make_batch_split(LabeledBatch geometry, LabeledBatch validation) {
  BatchSplit s{std::move(geometry), std::move(validation)};
  check_batch_split(s);
  return s;
}

std::vector<Matrix> group_by_class(const Matrix& z, std::span<const int> labels, int classes) {
  require(static_cast<Index>(labels.size()) == z.cols(), "group_by_class: one label per column");
  std::vector<Index> counts(static_cast<size_t>(classes), 0);
  for (int y : labels) {
    require(y >= 1 && y <= classes, "group_by_class: label out of range");
    ++counts[static_cast<size_t>(y - 1)];
  }
  std::vector<Matrix> groups;
  for (Index n : counts) groups.emplace_back(z.rows(), n);
  std::vector<Index> fill(static_cast<size_t>(classes), 0);
  for (Index j = 0; j < z.cols(); ++j) {
    const auto c = static_cast<size_t>(labels[static_cast<size_t>(j)] - 1);
    groups[c].col(fill[c]++) = z.col(j);
  }
  return groups;
}

// ---- generators -----------------------------------------------------------

void DatasetSpec::validate() const {
  if (classes < 1) throw ConfigError("dataset: K must be at least 1");
  if (test_fraction < 0.0 || test_fraction >= 1.0)
    throw ConfigError("dataset: test_fraction must lie in [0, 1)");
  if (kind == DatasetKind::kCsv) {
    if (path.empty()) throw ConfigError("dataset: kind = \"csv\" requires a path");
    return;
  }
  if (per_class < 1) throw ConfigError("dataset: per_class must be at least 1");
  if (dim < 1) throw ConfigError("dataset: dim must be at least 1");
  if (!(amplification > 0.0)) throw ConfigError("dataset: amplification must be positive");
  if (kind == DatasetKind::kSubspaceGaussian && classes > dim)
    throw ConfigError("dataset: subspace_gaussian needs K <= dim");
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

namespace {

enum Stream : std::uint64_t {
  kStreamSamples = 1,
  kStreamLabels = 2,
  kStreamShuffle = 3,
  kStreamTestSplit = 4,
  kStreamEpoch = 5,
};

std::vector<std::vector<Index>> members_by_class(const LabeledBatch& b) {
  std::vector<std::vector<Index>> m(static_cast<size_t>(b.classes));
  for (Index j = 0; j < b.size(); ++j) m[static_cast<size_t>(b.y[static_cast<size_t>(j)] - 1)].push_back(j);
  return m;
}

}  // namespace

Dataset generate(const DatasetSpec& spec) {
  spec.validate();
  LabeledBatch all;
  all.classes = spec.classes;
  if (spec.kind == DatasetKind::kCsv) {
    std::ifstream in(spec.path);
    if (!in) throw IoError("dataset: cannot open '" + spec.path + "'");
    all = read_dataset_csv(in, spec.classes);
  } else {
    const Index n = spec.per_class * spec.classes;
    auto rng = seeded_engine(spec.seed, kStreamSamples);
    std::normal_distribution<double> normal(0.0, 1.0);
    all.x.resize(spec.dim, n);
    all.y.resize(static_cast<size_t>(n));
    all.ids.resize(static_cast<size_t>(n));
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < spec.dim; ++i) all.x(i, j) = normal(rng);
    std::iota(all.ids.begin(), all.ids.end(), Index{0});
    if (spec.kind == DatasetKind::kSubspaceGaussian) {
      for (Index j = 0; j < n; ++j) {
        const int c = static_cast<int>(j / spec.per_class) + 1;
        all.y[static_cast<size_t>(j)] = c;
        all.x(c - 1, j) *= spec.amplification;
      }
    } else {
      auto label_rng = seeded_engine(spec.seed, kStreamLabels);
      std::uniform_int_distribution<int> pick(1, spec.classes);
      for (auto& y : all.y) y = pick(label_rng);
    }
  }
  if (spec.label_mode == LabelMode::kShuffled) {
    auto rng = seeded_engine(spec.seed, kStreamShuffle);
    std::shuffle(all.y.begin(), all.y.end(), rng);
  }
  all.validate();

  Dataset out;
  if (spec.test_fraction == 0.0) {
    out.train = std::move(all);
    out.test.classes = spec.classes;
    out.test.x.resize(out.train.x.rows(), 0);
    return out;
  }
  auto rng = seeded_engine(spec.seed, kStreamTestSplit);
  std::vector<bool> is_test(static_cast<size_t>(all.size()), false);
  for (auto members : members_by_class(all)) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<size_t>(
        std::llround(spec.test_fraction * static_cast<double>(members.size())));
    for (size_t k = 0; k < n_test; ++k) is_test[static_cast<size_t>(members[k])] = true;
  }
  std::vector<Index> train_cols, test_cols;
  for (Index j = 0; j < all.size(); ++j) (is_test[static_cast<size_t>(j)] ? test_cols : train_cols).push_back(j);
  out.train = all.select(train_cols);
  out.test = all.select(test_cols);
  return out;
}

BatchSplit stratified_split(const LabeledBatch& batch, double g_fraction, std::uint64_t seed) {
  if (!(g_fraction > 0.0 && g_fraction < 1.0))
    throw ConfigError("stratified_split: g_fraction must lie in (0, 1)");
  batch.validate();
  auto rng = seeded_engine(seed, kStreamShuffle);
  std::vector<Index> geometry, validation;
  int c = 1;
  for (auto members : members_by_class(batch)) {
    if (members.size() < 2)
      throw ConfigError("stratified_split: class " + std::to_string(c) + " has " +
                        std::to_string(members.size()) + " sample(s); need at least 2");
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = static_cast<long long>(members.size());
    const long long n_g = std::clamp<long long>(
        std::llround(g_fraction * static_cast<double>(n)), 1, n - 1);
    geometry.insert(geometry.end(), members.begin(), members.begin() + n_g);
    validation.insert(validation.end(), members.begin() + n_g, members.end());
    ++c;
  }
  std::sort(geometry.begin(), geometry.end());
  std::sort(validation.begin(), validation.end());
  return make_batch_split(batch.select(geometry), batch.select(validation));
}

EpochPlan epoch_batches(const LabeledBatch& train, Index batch_size, double g_fraction,
                        std::uint64_t seed, int epoch_index) {
  require(batch_size >= 1 && batch_size <= train.size(), "epoch_batches: batch_size must lie in 1..N");
  auto rng = seeded_engine(seed ^ (static_cast<std::uint64_t>(epoch_index) * 0x9E3779B97F4A7C15ULL),
                           kStreamEpoch);
  // Interleave the shuffled classes by fractional position so every
  // contiguous chunk holds each class in proportion.
  struct Slot {
    double key;
    int rank;
    Index column;
  };
  std::vector<Slot> slots;
  auto members = members_by_class(train);
  std::vector<int> class_rank(members.size());
  std::iota(class_rank.begin(), class_rank.end(), 0);
  std::shuffle(class_rank.begin(), class_rank.end(), rng);
  for (size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    std::shuffle(m.begin(), m.end(), rng);
    for (size_t k = 0; k < m.size(); ++k)
      slots.push_back({(static_cast<double>(k) + 0.5) / static_cast<double>(m.size()), class_rank[c], m[k]});
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return a.key != b.key ? a.key < b.key : a.rank < b.rank;
  });

  EpochPlan plan;
  std::uniform_int_distribution<std::uint64_t> seeds;
  for (size_t start = 0; start < slots.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(slots.size(), start + static_cast<size_t>(batch_size));
    std::vector<Index> cols;
    for (size_t k = start; k < end; ++k) cols.push_back(slots[k].column);
    std::sort(cols.begin(), cols.end());
    LabeledBatch chunk = train.select(cols);
    const std::uint64_t split_seed = seeds(rng);
    const auto counts = chunk.class_counts();
    const bool ok = std::all_of(counts.begin(), counts.end(), [](Index n) { return n >= 2; });
    if (!ok) {
      plan.dropped.insert(plan.dropped.end(), chunk.ids.begin(), chunk.ids.end());
      continue;
    }
    plan.batches.push_back(stratified_split(chunk, g_fraction, split_seed));
  }
  std::shuffle(plan.batches.begin(), plan.batches.end(), rng);
  return plan;
}

// ---- CSV -------------------------------------------------------------------

void write_dataset_csv(std::ostream& os, const LabeledBatch& batch) {
  batch.validate();
  os << "sample_id,label";
  for (Index i = 0; i < batch.x.rows(); ++i) os << ",x_" << i;
  os << '\n';
  char buf[32];
  for (Index j = 0; j < batch.size(); ++j) {
    os << batch.ids[static_cast<size_t>(j)] << ',' << batch.y[static_cast<size_t>(j)];
    for (Index i = 0; i < batch.x.rows(); ++i) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, batch.x(i, j));
      os << ',';
      os.write(buf, end - buf);
    }
    os << '\n';
  }
  if (!os) throw IoError("write_dataset_csv: write failed");
}

LabeledBatch read_dataset_csv(std::istream& is, int classes) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("dataset csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) header.push_back(f);
  }
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label")
    throw IoError("dataset csv: header must start with sample_id,label,x_0");
  const size_t dim = header.size() - 2;
  for (size_t i = 0; i < dim; ++i)
    if (header[i + 2] != "x_" + std::to_string(i))
      throw IoError("dataset csv: unexpected column '" + header[i + 2] + "'");

  std::vector<double> values;
  LabeledBatch b;
  size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != header.size())
      throw IoError("dataset csv: line " + std::to_string(line_no) + " has " +
                    std::to_string(fields.size()) + " fields, expected " + std::to_string(header.size()));
    auto parse = [&](const std::string& f, auto& out) {
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
      if (ec != std::errc() || p != f.data() + f.size())
        throw IoError("dataset csv: line " + std::to_string(line_no) + ": bad value '" + f + "'");
    };
    Index id = 0;
    int label = 0;
    parse(fields[0], id);
    parse(fields[1], label);
    b.ids.push_back(id);
    b.y.push_back(label);
    for (size_t i = 0; i < dim; ++i) {
      double v = 0.0;
      parse(fields[i + 2], v);
      values.push_back(v);
    }
  }
  const auto n = static_cast<Index>(b.y.size());
  b.x = Eigen::Map<const Matrix>(values.data(), static_cast<Index>(dim), n);
  int max_label = 0;
  for (int y : b.y) max_label = std::max(max_label, y);
  b.classes = classes > 0 ? classes : max_label;
  try {
    b.validate();
  } catch (const ContractError& e) {
    throw IoError(std::string("dataset csv: ") + e.what());
  }
  if (!b.x.allFinite()) throw IoError("dataset csv: non-finite feature value");
  return b;
}

}  // namespace grsv
