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

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "grsv/data.hpp"
#include "grsv/error.hpp"

using namespace grsv;

namespace {

DatasetSpec toy(LabelMode mode = LabelMode::kTrue) {
  DatasetSpec s;
  s.label_mode = mode;
  s.seed = 11;
  return s;
}

LabeledBatch balanced(int classes, Index per_class) {
  LabeledBatch b;
  b.classes = classes;
  b.x = Matrix::Zero(2, classes * per_class);
  for (Index j = 0; j < b.x.cols(); ++j) {
    b.y.push_back(static_cast<int>(j % classes) + 1);
    b.ids.push_back(j);
    b.x(0, j) = static_cast<double>(j);
  }
  return b;
}

double sample_std(const Eigen::Ref<const Vector>& v) {
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("subspace gaussian per-coordinate spread") {
  const Dataset d = generate(toy());
  CHECK(d.train.size() == 1500);
  CHECK(d.test.size() == 0);
  CHECK(d.train.class_counts() == std::vector<Index>{500, 500, 500});
  std::vector<Index> cols;
  for (Index j = 0; j < d.train.size(); ++j)
    if (d.train.y[static_cast<size_t>(j)] == 1) cols.push_back(j);
  const Matrix x1 = d.train.select(cols).x;
  for (Index i = 0; i < 10; ++i) {
    const double s = sample_std(x1.row(i).transpose());
    if (i == 0) {
      CHECK(s >= 40.0);
      CHECK(s <= 60.0);
    } else {
      CHECK(s >= 0.8);
      CHECK(s <= 1.25);
    }
  }
}

TEST_CASE("shuffled labels are a seeded permutation") {
  const Dataset a = generate(toy(LabelMode::kShuffled));
  const Dataset b = generate(toy(LabelMode::kShuffled));
  const Dataset t = generate(toy());
  CHECK(a.train.y == b.train.y);
  CHECK(a.train.x == t.train.x);
  CHECK(a.train.y != t.train.y);
  CHECK(a.train.class_counts() == t.train.class_counts());
  DatasetSpec other = toy(LabelMode::kShuffled);
  other.seed = 12;
  CHECK(generate(other).train.y != a.train.y);
}

TEST_CASE("gaussian noise labels are uniform") {
  DatasetSpec s = toy();
  s.kind = DatasetKind::kGaussianNoise;
  s.classes = 10;
  s.per_class = 300;
  const Dataset d = generate(s);
  const double n = 3000.0, p = 0.1;
  const double sd = std::sqrt(n * p * (1 - p));
  for (Index c : d.train.class_counts()) CHECK(std::abs(static_cast<double>(c) - n * p) <= 3.0 * sd);
  CHECK(std::abs(sample_std(d.train.x.row(0).transpose()) - 1.0) < 0.1);
}

TEST_CASE("dataset validation") {
  DatasetSpec s = toy();
  s.classes = 11;
  CHECK_THROWS_AS(generate(s), ConfigError);
  s = toy();
  s.test_fraction = 1.0;
  CHECK_THROWS_AS(generate(s), ConfigError);
  s = toy();
  s.amplification = 0.0;
  CHECK_THROWS_AS(generate(s), ConfigError);
  s = toy();
  s.kind = DatasetKind::kCsv;
  CHECK_THROWS_AS(generate(s), ConfigError);
}

TEST_CASE("per-class test split") {
  DatasetSpec s = toy();
  s.test_fraction = 0.2;
  const Dataset d = generate(s);
  CHECK(d.test.class_counts() == std::vector<Index>{100, 100, 100});
  CHECK(d.train.class_counts() == std::vector<Index>{400, 400, 400});
  std::set<Index> ids(d.train.ids.begin(), d.train.ids.end());
  for (Index id : d.test.ids) CHECK(ids.insert(id).second);
  CHECK(ids.size() == 1500);
}

TEST_CASE("stratified split examples") {
  const LabeledBatch b = balanced(10, 20);
  const BatchSplit s = stratified_split(b, 0.5, 3);
  CHECK(s.geometry.size() == 100);
  CHECK(s.validation.size() == 100);
  CHECK(s.geometry.class_counts() == std::vector<Index>(10, 10));
  CHECK(s.validation.class_counts() == std::vector<Index>(10, 10));
  const BatchSplit again = stratified_split(b, 0.5, 3);
  CHECK(again.geometry.ids == s.geometry.ids);

  const LabeledBatch two = balanced(3, 2);
  const BatchSplit t = stratified_split(two, 0.9, 1);
  CHECK(t.geometry.class_counts() == std::vector<Index>{1, 1, 1});
  CHECK(t.validation.class_counts() == std::vector<Index>{1, 1, 1});

  LabeledBatch short_class = balanced(3, 3);
  short_class.y[0] = 2;  // class 1 left with 2 samples, still fine
  CHECK_NOTHROW(stratified_split(short_class, 0.5, 1));
  short_class.y[3] = 2;  // class 1 now has a single sample
  CHECK_THROWS_AS(stratified_split(short_class, 0.5, 1), ConfigError);
}

TEST_CASE("stratified split proportions") {
  LabeledBatch b = balanced(3, 7);
  for (double g : {0.2, 0.5, 0.7}) {
    const BatchSplit s = stratified_split(b, g, 5);
    for (Index n : s.geometry.class_counts()) CHECK(std::abs(static_cast<double>(n) - g * 7.0) <= 1.0);
  }
}

TEST_CASE("epoch batches cover the training set") {
  const Dataset d = generate(toy(LabelMode::kShuffled));
  const EpochPlan p = epoch_batches(d.train, 150, 0.5, 4, 0);
  CHECK(p.batches.size() == 10);
  CHECK(p.dropped.empty());
  std::multiset<Index> seen;
  for (const auto& s : p.batches) {
    CHECK(s.geometry.size() + s.validation.size() == 150);
    for (Index c : s.geometry.class_counts()) CHECK(c >= 1);
    for (Index c : s.validation.class_counts()) CHECK(c >= 1);
    seen.insert(s.geometry.ids.begin(), s.geometry.ids.end());
    seen.insert(s.validation.ids.begin(), s.validation.ids.end());
  }
  CHECK(seen.size() == 1500);
  CHECK(std::set<Index>(seen.begin(), seen.end()).size() == 1500);

  const EpochPlan same = epoch_batches(d.train, 150, 0.5, 4, 0);
  const EpochPlan next = epoch_batches(d.train, 150, 0.5, 4, 1);
  bool identical = true, differs = false;
  for (size_t k = 0; k < p.batches.size(); ++k) {
    identical = identical && same.batches[k].geometry.ids == p.batches[k].geometry.ids;
    differs = differs || next.batches[k].geometry.ids != p.batches[k].geometry.ids;
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("epoch batches drop a tail that cannot be split") {
  const LabeledBatch b = balanced(3, 5);  // 15 samples
  const EpochPlan p = epoch_batches(b, 6, 0.5, 1, 0);
  // chunks of 6, 6 and a tail of 3 (one per class)
  CHECK(p.batches.size() == 2);
  CHECK(p.dropped.size() == 3);
  std::set<Index> all(p.dropped.begin(), p.dropped.end());
  for (const auto& s : p.batches) {
    all.insert(s.geometry.ids.begin(), s.geometry.ids.end());
    all.insert(s.validation.ids.begin(), s.validation.ids.end());
  }
  CHECK(all.size() == 15);
}

TEST_CASE("dataset csv round trip") {
  DatasetSpec s = toy();
  s.per_class = 4;
  const Dataset d = generate(s);
  std::stringstream ss;
  write_dataset_csv(ss, d.train);
  const std::string text = ss.str();
  CHECK(text.rfind("sample_id,label,x_0,x_1,", 0) == 0);
  const LabeledBatch back = read_dataset_csv(ss);
  CHECK(back.x == d.train.x);
  CHECK(back.y == d.train.y);
  CHECK(back.ids == d.train.ids);
  CHECK(back.classes == 3);
}

TEST_CASE("dataset csv rejects malformed input") {
  std::stringstream empty("");
  CHECK_THROWS_AS(read_dataset_csv(empty), IoError);
  std::stringstream header("id,label,x_0\n0,1,2\n");
  CHECK_THROWS_AS(read_dataset_csv(header), IoError);
  std::stringstream fields("sample_id,label,x_0,x_1\n0,1,2\n");
  CHECK_THROWS_AS(read_dataset_csv(fields), IoError);
  std::stringstream number("sample_id,label,x_0\n0,1,abc\n");
  CHECK_THROWS_AS(read_dataset_csv(number), IoError);
  std::stringstream label("sample_id,label,x_0\n0,0,1.5\n");
  CHECK_THROWS_AS(read_dataset_csv(label), IoError);
  std::stringstream crlf("sample_id,label,x_0\r\n0,2,1.5\r\n");
  CHECK(read_dataset_csv(crlf).x(0, 0) == 1.5);
}
