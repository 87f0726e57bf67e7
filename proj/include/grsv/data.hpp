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

#ifndef GRSV_DATA_HPP_
#define GRSV_DATA_HPP_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "grsv/batch.hpp"

namespace grsv {

enum class DatasetKind { kSubspaceGaussian, kGaussianNoise, kCsv };
enum class LabelMode { kTrue, kShuffled };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kSubspaceGaussian;
  int classes = 3;          // K
  Index per_class = 500;
  Index dim = 10;
  double amplification = 50.0;
  LabelMode label_mode = LabelMode::kTrue;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
  std::string path;         // kCsv only

  /// Throws ConfigError on an invalid description.
  void validate() const;
};

struct Dataset {
  LabeledBatch train;
  LabeledBatch test;  // empty when test_fraction == 0
};

/// Deterministic engine for (seed, stream); distinct streams are independent.
std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream);

/// kSubspaceGaussian: class c is N(0, I) with coordinate c scaled by
/// amplification. kGaussianNoise: isotropic unit normals with uniformly drawn
/// labels. kCsv: loads spec.path. Shuffled mode permutes the label vector.
/// A per-class test_fraction of the samples goes to the test set.
Dataset generate(const DatasetSpec& spec);

/// Per class, round(g_fraction * n_c) samples (clamped to [1, n_c - 1]) go to
/// the geometry half. Throws ConfigError if a class of the task has fewer than
/// two samples in the batch.
BatchSplit stratified_split(const LabeledBatch& batch, double g_fraction, std::uint64_t seed);

struct EpochPlan {
  std::vector<BatchSplit> batches;
  std::vector<Index> dropped;  // sample ids left out of this epoch
};

/// Class-stratified shuffled batches covering every sample once. A batch in
/// which some class has fewer than two samples is dropped and its ids are
/// reported in `dropped`.
EpochPlan epoch_batches(const LabeledBatch& train, Index batch_size, double g_fraction,
                        std::uint64_t seed, int epoch_index);

/// CSV with header "sample_id,label,x_0,...,x_{d-1}".
void write_dataset_csv(std::ostream& os, const LabeledBatch& batch);
/// classes == 0 infers K from the largest label.
LabeledBatch read_dataset_csv(std::istream& is, int classes = 0);

}  // namespace grsv

#endif  // GRSV_DATA_HPP_
