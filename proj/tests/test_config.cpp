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

#include <string>

#include "grsv/config.hpp"
#include "grsv/error.hpp"

using namespace grsv;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty config keeps defaults") {
  const TrainConfig c = parse_config("");
  CHECK(c.mode == Mode::kOleGrsvnet);
  CHECK(c.hidden_dims == std::vector<Index>{128, 128, 128});
  CHECK(c.lambda == 5.0);
  CHECK(c.epochs == 2000);
  CHECK(c.batch_size == 150);
  CHECK(c.g_fraction == 0.5);
  CHECK(c.dataset.classes == 3);
  CHECK(c.dataset.per_class == 500);
  CHECK(c.dataset.amplification == 50.0);
  CHECK(c.learning_rate() == 0.01);
}

TEST_CASE("every field parses") {
  const TrainConfig c = parse_config(R"(
# comment line
mode = "softmax_wd"   # trailing comment
hidden_dims = [64, 32]
lambda = 2.5
ole_weight = 0.25
weight_decay = 1e-3
lr = 0.05
momentum = 0.8
epochs = 12
batch_size = 30
g_fraction = 0.4
eps = 1e-7
ratio = 0.2
trunc = 1e-5
seed = 9

[lr_by_mode]
ole_grsvnet = 1e-4

[dataset]
kind = "gaussian_noise"
K = 4
per_class = 20
dim = 6
amplification = 10
label_mode = "shuffled"
seed = 3
test_fraction = 0.25
)");
  CHECK(c.mode == Mode::kSoftmaxWd);
  CHECK(c.hidden_dims == std::vector<Index>{64, 32});
  CHECK(c.lambda == 2.5);
  CHECK(c.ole_weight == 0.25);
  CHECK(c.weight_decay == 1e-3);
  CHECK(c.lr == 0.05);
  CHECK(c.momentum == 0.8);
  CHECK(c.epochs == 12);
  CHECK(c.batch_size == 30);
  CHECK(c.g_fraction == 0.4);
  CHECK(c.eps == 1e-7);
  CHECK(c.ratio == 0.2);
  CHECK(c.trunc == 1e-5);
  CHECK(c.seed == 9);
  CHECK(c.learning_rate() == 0.05);
  TrainConfig g = c;
  g.mode = Mode::kOleGrsvnet;
  CHECK(g.learning_rate() == 1e-4);
  CHECK(c.dataset.kind == DatasetKind::kGaussianNoise);
  CHECK(c.dataset.classes == 4);
  CHECK(c.dataset.per_class == 20);
  CHECK(c.dataset.dim == 6);
  CHECK(c.dataset.amplification == 10.0);
  CHECK(c.dataset.label_mode == LabelMode::kShuffled);
  CHECK(c.dataset.seed == 3);
  CHECK(c.dataset.test_fraction == 0.25);
}

TEST_CASE("format and parse round trip") {
  TrainConfig c;
  c.mode = Mode::kSoftmaxOle;
  c.hidden_dims = {5, 7};
  c.lr = 0.003;
  c.lr_by_mode[Mode::kOleGrsvnet] = 2e-4;
  c.dataset.test_fraction = 0.2;
  c.dataset.kind = DatasetKind::kGaussianNoise;
  c.seed = 42;
  const TrainConfig back = parse_config(format_config(c));
  CHECK(format_config(back) == format_config(c));
  CHECK(back.lr_by_mode == c.lr_by_mode);
  CHECK(back.hidden_dims == c.hidden_dims);
}

TEST_CASE("config errors name the line") {
  CHECK(error_of("lr = 0.1\nfoo = 1\n") == "config line 2: unknown key 'foo'");
  CHECK(error_of("lr = 0.1\nlr = 0.2\n").find("line 2: duplicate key 'lr'") != std::string::npos);
  CHECK(error_of("mode = \"svm\"\n").find("line 1") != std::string::npos);
  CHECK(error_of("epochs = 1.5\n").find("nonnegative integer") != std::string::npos);
  CHECK(error_of("lambda = \"five\"\n").find("must be a number") != std::string::npos);
  CHECK(error_of("[training]\n").find("unknown table") != std::string::npos);
  CHECK(error_of("[dataset]\nmode = \"softmax\"\n").find("unknown key 'dataset.mode'") != std::string::npos);
  CHECK(error_of("[lr_by_mode]\nsvm = 1\n").find("unknown key") != std::string::npos);
  CHECK(error_of("lr = \n").find("missing value") != std::string::npos);
  CHECK(error_of("lr 0.1\n").find("expected key = value") != std::string::npos);
  CHECK(error_of("hidden_dims = [1, 2\n").find("unterminated") != std::string::npos);
  CHECK(error_of("hidden_dims = [0]\n").find("positive") != std::string::npos);
}

TEST_CASE("mode specific fields must be positive") {
  CHECK_THROWS_AS(parse_config("lambda = 0\n"), ConfigError);
  CHECK_NOTHROW(parse_config("mode = \"softmax\"\nlambda = 0\n"));
  CHECK_THROWS_AS(parse_config("mode = \"softmax_wd\"\nweight_decay = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mode = \"softmax_ole\"\nole_weight = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("lr = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[lr_by_mode]\nsoftmax = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("momentum = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("g_fraction = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[dataset]\nK = 11\n"), ConfigError);
}

TEST_CASE("modes and network dims") {
  for (Mode m : {Mode::kSoftmax, Mode::kSoftmaxWd, Mode::kSoftmaxOle, Mode::kOleGrsvnet})
    CHECK(parse_mode(mode_name(m)) == m);
  CHECK_THROWS_AS(parse_mode("softmax+ole"), ConfigError);
  TrainConfig c;
  c.hidden_dims = {128, 64};
  c.mode = Mode::kSoftmax;
  CHECK(c.network_dims(10) == std::vector<Index>{10, 128, 64, 3});
  c.mode = Mode::kOleGrsvnet;
  CHECK(c.network_dims(10) == std::vector<Index>{10, 128, 64, 64});
}

TEST_CASE("load_config surfaces io errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), IoError);
}
