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

#include <doctest.h>

#include <random>
#include <sstream>

#include "grsv/classifier.hpp"
#include "grsv/error.hpp"

using namespace grsv;

namespace {

// n samples of class c in span{e_c, e_{c+K}} of R^(2K+extra), plus noise.
Matrix class_samples(std::mt19937_64& rng, int c, int K, Index dim, Index n, double noise) {
  std::normal_distribution<double> g;
  Matrix z(dim, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < dim; ++i) z(i, j) = noise * g(rng);
    z(c - 1, j) += 3.0 * g(rng);
    z(c - 1 + K, j) += 2.0 * g(rng);
  }
  return z;
}

}  // namespace

TEST_CASE("fit on orthogonal fixture recovers every training label") {
  std::mt19937_64 rng(1);
  std::vector<Matrix> by_class;
  for (int c = 1; c <= 3; ++c) by_class.push_back(class_samples(rng, c, 3, 7, 5, 0.0));
  const SubspaceSet set = fit(by_class);
  CHECK(set.class_count() == 3);
  CHECK(set.feature_dim == 7);
  for (int c = 1; c <= 3; ++c) {
    CHECK(set.basis(c).class_id == c);
    CHECK(set.basis(c).rank() == 2);
    CHECK(set.built_from[static_cast<size_t>(c - 1)] == 5);
    const Matrix& z = by_class[static_cast<size_t>(c - 1)];
    for (Index j = 0; j < z.cols(); ++j) CHECK(predict(set, z.col(j)).label == c);
  }
}

TEST_CASE("single sample per class gives that normalized feature") {
  std::vector<Matrix> by_class;
  Vector a(3), b(3);
  a << 3, 4, 0;
  b << 0, 0, -2;
  by_class.push_back(a);
  by_class.push_back(b);
  const SubspaceSet set = fit(by_class);
  REQUIRE(set.basis(1).rank() == 1);
  REQUIRE(set.basis(2).rank() == 1);
  // sign is fixed by the convention: first nonzero entry nonnegative
  CHECK((set.basis(1).u.col(0) - a / 5.0).norm() <= 1e-14);
  CHECK((set.basis(2).u.col(0) + b / 2.0).norm() <= 1e-14);
}

TEST_CASE("fit rejects empty classes") {
  std::vector<Matrix> by_class{Matrix::Ones(3, 2), Matrix(3, 0)};
  CHECK_THROWS_AS(fit(by_class), ConfigError);
  CHECK_THROWS_AS(fit(std::vector<Matrix>{}), ConfigError);
}

TEST_CASE("half and full fits agree on a well-separated task") {
  std::mt19937_64 rng(2);
  std::vector<Matrix> train;
  Matrix test(10, 0);
  for (int c = 1; c <= 3; ++c) {
    train.push_back(class_samples(rng, c, 3, 10, 200, 0.05));
    const Matrix t = class_samples(rng, c, 3, 10, 100, 0.05);
    test = hconcat(test, t);
  }
  const SubspaceSet full = fit_portion(train, kDefaultBasisRatio, 1.0, 3);
  const SubspaceSet half = fit_portion(train, kDefaultBasisRatio, 0.5, 3);
  CHECK(half.built_from[0] == 100);
  const auto a = predict_labels(full, test), b = predict_labels(half, test);
  int same = 0;
  for (size_t j = 0; j < a.size(); ++j) same += a[j] == b[j] ? 1 : 0;
  CHECK(static_cast<double>(same) / static_cast<double>(a.size()) >= 0.99);
  CHECK_THROWS_AS(fit_portion(train, 0.1, 0.0, 1), ContractError);
}

TEST_CASE("predict examples") {
  std::mt19937_64 rng(3);
  std::vector<Matrix> by_class;
  for (int c = 1; c <= 3; ++c) by_class.push_back(class_samples(rng, c, 3, 6, 4, 0.0));
  const SubspaceSet set = fit(by_class);

  Vector z = Vector::Zero(6);
  z(1) = 0.7;
  z(4) = -0.2;
  CHECK(predict(set, z).label == 2);

  const Prediction zero = predict(set, Vector::Zero(6));
  CHECK(zero.label == 1);
  CHECK(zero.distribution.flagged_uniform);

  // exact tie between classes 2 and 3 goes to 2
  SubspaceSet axes;
  axes.feature_dim = 3;
  for (int c = 1; c <= 3; ++c) axes.bases.push_back({c, Matrix::Identity(3, 3).col(c - 1)});
  Vector tie(3);
  tie << 0.0, 1.0, 1.0;
  CHECK(predict(axes, tie).label == 2);

  int flagged = -1;
  Matrix batch = Matrix::Zero(6, 2);
  batch(2, 0) = 1.0;
  const auto labels = predict_labels(set, batch, kDefaultEps, &flagged);
  CHECK(labels == std::vector<int>{3, 1});
  CHECK(flagged == 1);
}

TEST_CASE("prediction is invariant to positive rescaling") {
  std::mt19937_64 rng(4);
  std::vector<Matrix> by_class;
  for (int c = 1; c <= 3; ++c) by_class.push_back(class_samples(rng, c, 3, 8, 20, 0.3));
  const SubspaceSet set = fit(by_class);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    Vector z(8);
    for (Index i = 0; i < 8; ++i) z(i) = g(rng);
    for (double alpha : {1e-3, 0.5, 40.0}) CHECK(predict(set, alpha * z).label == predict(set, z).label);
  }
}

TEST_CASE("accuracy") {
  const std::vector<int> p{1, 2, 3, 1}, t{1, 2, 1, 1};
  CHECK(accuracy(p, t) == 0.75);
  CHECK_THROWS_AS(accuracy(p, std::vector<int>{1}), ContractError);
}

TEST_CASE("subspace csv export") {
  SubspaceSet set;
  set.feature_dim = 2;
  set.bases.push_back({1, Matrix::Identity(2, 1)});
  set.bases.push_back({2, Matrix(2, 0)});
  Matrix u(2, 2);
  u << 0, 1, 1, 0;
  set.bases.push_back({3, u});
  std::ostringstream os;
  write_subspaces_csv(os, set);
  CHECK(os.str() ==
        "class_id,column_index,u_0,u_1\n"
        "1,0,1,0\n"
        "3,0,0,1\n"
        "3,1,1,0\n");
}
