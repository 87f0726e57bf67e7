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

#ifndef GRSV_CLASSIFIER_HPP_
#define GRSV_CLASSIFIER_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>

#include "grsv/loss.hpp"
#include "grsv/subspace.hpp"

namespace grsv {

/// One orthonormal_basis per class. Throws ConfigError when a class has no
/// samples.
SubspaceSet fit(std::span<const Matrix> features_by_class, double ratio = kDefaultBasisRatio);

/// Same, fitting each class on a random `portion` in (0, 1] of its columns
/// (at least one column per class).
SubspaceSet fit_portion(std::span<const Matrix> features_by_class, double ratio, double portion,
                        std::uint64_t seed);

struct Prediction {
  int label = 1;
  PredictedDistribution distribution;
};

/// Argmax of predict_distribution; ties go to the smallest class id.
Prediction predict(const SubspaceSet& set, const Vector& z, double eps = kDefaultEps);

/// Labels for every column of z.
std::vector<int> predict_labels(const SubspaceSet& set, const Matrix& z, double eps = kDefaultEps,
                                int* flagged = nullptr);

/// Fraction of columns whose predicted label matches.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// CSV export: header "class_id,column_index,u_0,...,u_{d-1}", one row per
/// basis column.
void write_subspaces_csv(std::ostream& os, const SubspaceSet& set);

}  // namespace grsv

#endif  // GRSV_CLASSIFIER_HPP_
