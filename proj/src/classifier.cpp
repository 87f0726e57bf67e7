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

#include "grsv/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "grsv/error.hpp"

namespace grsv {

SubspaceSet fit(std::span<const Matrix> features_by_class, double ratio) {
  if (features_by_class.empty()) throw ConfigError("fit: no classes");
  SubspaceSet set;
  set.feature_dim = features_by_class.front().rows();
  int class_id = 1;
  for (const Matrix& z_c : features_by_class) {
    if (z_c.cols() == 0)
      throw ConfigError("fit: class " + std::to_string(class_id) + " has no samples");
    require(z_c.rows() == set.feature_dim, "fit: classes disagree on feature dimension");
    set.bases.push_back(orthonormal_basis(z_c, ratio, class_id));
    set.built_from.push_back(z_c.cols());
    ++class_id;
  }
  return set;
}

SubspaceSet fit_portion(std::span<const Matrix> features_by_class, double ratio, double portion,
                        std::uint64_t seed) {
  require(portion > 0.0 && portion <= 1.0, "fit_portion: portion must lie in (0, 1]");
  if (portion == 1.0) return fit(features_by_class, ratio);
  std::mt19937_64 rng(seed);
  std::vector<Matrix> sampled;
  for (const Matrix& z_c : features_by_class) {
    if (z_c.cols() == 0) {
      sampled.push_back(z_c);
      continue;
    }
    std::vector<Index> cols(static_cast<size_t>(z_c.cols()));
    std::iota(cols.begin(), cols.end(), Index{0});
    std::shuffle(cols.begin(), cols.end(), rng);
    const auto take = std::max<Index>(
        1, static_cast<Index>(std::llround(portion * static_cast<double>(z_c.cols()))));
    cols.resize(static_cast<size_t>(take));
    std::sort(cols.begin(), cols.end());
    Matrix s(z_c.rows(), take);
    for (Index k = 0; k < take; ++k) s.col(k) = z_c.col(cols[static_cast<size_t>(k)]);
    sampled.push_back(std::move(s));
  }
  return fit(sampled, ratio);
}

Prediction predict(const SubspaceSet& set, const Vector& z, double eps) {
  Prediction p;
  p.distribution = predict_distribution(z, set, eps);
  Index best = 0;
  for (Index c = 1; c < p.distribution.probs.size(); ++c)
    if (p.distribution.probs(c) > p.distribution.probs(best)) best = c;
  p.label = static_cast<int>(best) + 1;
  return p;
}

std::vector<int> predict_labels(const SubspaceSet& set, const Matrix& z, double eps, int* flagged) {
  std::vector<int> labels(static_cast<size_t>(z.cols()));
  int n_flagged = 0;
  for (Index j = 0; j < z.cols(); ++j) {
    const Prediction p = predict(set, z.col(j), eps);
    labels[static_cast<size_t>(j)] = p.label;
    n_flagged += p.distribution.flagged_uniform ? 1 : 0;
  }
  if (flagged) *flagged = n_flagged;
  return labels;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  require(predicted.size() == truth.size(), "accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

void write_subspaces_csv(std::ostream& os, const SubspaceSet& set) {
  os << "class_id,column_index";
  for (Index i = 0; i < set.feature_dim; ++i) os << ",u_" << i;
  os << '\n';
  char buf[32];
  for (const SubspaceBasis& b : set.bases) {
    for (Index k = 0; k < b.rank(); ++k) {
      os << b.class_id << ',' << k;
      for (Index i = 0; i < b.feature_dim(); ++i) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, b.u(i, k));
        os << ',';
        os.write(buf, end - buf);
      }
      os << '\n';
    }
  }
  if (!os) throw IoError("write_subspaces_csv: write failed");
}

}  // namespace grsv
