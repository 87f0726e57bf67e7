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

#ifndef GRSV_BATCH_HPP_
#define GRSV_BATCH_HPP_

#include <span>
#include <vector>

#include "grsv/linalg.hpp"

namespace grsv {

/// Samples as columns of x with labels in 1..classes. ids are the sample ids
/// within the originating dataset.
struct LabeledBatch {
  Matrix x;
  std::vector<int> y;
  std::vector<Index> ids;
  int classes = 0;

  Index size() const { return static_cast<Index>(y.size()); }
  /// Throws ContractError unless columns, labels and ids agree and every label
  /// lies in 1..classes.
  void validate() const;
  std::vector<Index> class_counts() const;  // index c-1 holds class c
  LabeledBatch select(std::span<const Index> columns) const;
};

/// Geometry and validation halves of one training batch. Construct through
/// make_batch_split, which enforces that every class of the task is present
/// in the validation half and has at least one geometry sample.
struct BatchSplit {
  LabeledBatch geometry;
  LabeledBatch validation;
};

BatchSplit make_batch_split(LabeledBatch geometry, LabeledBatch validation);

/// Throws ConfigError when the split violates the invariant above.
void check_batch_split(const BatchSplit& split);

/// Columns of z grouped by label; entry c-1 holds class c (possibly empty).
std::vector<Matrix> group_by_class(const Matrix& z, std::span<const int> labels, int classes);

}  // namespace grsv

#endif  // GRSV_BATCH_HPP_
