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

#ifndef GRSV_CONFIG_HPP_
#define GRSV_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "grsv/data.hpp"

namespace grsv {

enum class Mode { kSoftmax, kSoftmaxWd, kSoftmaxOle, kOleGrsvnet };

std::string_view mode_name(Mode mode);
/// Accepts softmax, softmax_wd, softmax_ole, ole_grsvnet.
Mode parse_mode(std::string_view name);
inline bool uses_softmax_head(Mode m) { return m != Mode::kOleGrsvnet; }

struct TrainConfig {
  DatasetSpec dataset;
  std::vector<Index> hidden_dims{128, 128, 128};
  Mode mode = Mode::kOleGrsvnet;
  double lambda = 5.0;
  double ole_weight = 0.5;      // softmax_ole only
  double weight_decay = 1e-4;   // softmax_wd only
  double lr = 0.01;
  // Optional per-mode learning rates; a mode without an entry uses lr.
  std::map<Mode, double> lr_by_mode;
  double momentum = 0.9;
  int epochs = 2000;
  Index batch_size = 150;
  double g_fraction = 0.5;
  double eps = 1e-6;
  double ratio = 0.1;
  double trunc = 1e-6;
  std::uint64_t seed = 0;

  double learning_rate() const;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// Layer sizes: input, hidden..., then K logits for the softmax modes or a
  /// linear feature layer as wide as the last hidden layer for ole_grsvnet.
  std::vector<Index> network_dims(Index input_dim) const;
};

/// Parses "key = value" lines plus [dataset] and [lr_by_mode] tables. Values are numbers,
/// "strings", true/false or [arrays]. '#' starts a comment. Unknown or
/// repeated keys are errors; omitted keys keep their defaults.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::string& path);

/// Inverse of parse_config.
std::string format_config(const TrainConfig& config);

}  // namespace grsv

#endif  // GRSV_CONFIG_HPP_
