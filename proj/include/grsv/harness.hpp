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

#ifndef GRSV_HARNESS_HPP_
#define GRSV_HARNESS_HPP_

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grsv/config.hpp"
#include "grsv/data.hpp"
#include "grsv/net.hpp"
#include "grsv/subspace.hpp"

namespace grsv {

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;  // absent without a test set
  double l_g = 0.0;    // batch mean of the geometric (OLE) term, 0 when unused
  double l_v = 0.0;    // batch mean of the validation / softmax cross entropy
  double total = 0.0;  // batch mean of the optimized loss
  int degenerate_flags = 0;
  double seconds = 0.0;
};

struct RunOptions {
  // Wall-clock timings make the metrics file run-dependent, so they are off
  // unless requested; the seconds column is then 0.
  bool wall_clock = false;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct ExperimentResult {
  TrainConfig config;
  MlpParams params;
  std::optional<SubspaceSet> subspaces;  // ole_grsvnet: fit on all training features
  std::vector<EpochMetrics> metrics;
  Dataset data;
};

/// Trains one network according to config. Throws NumericalError naming the
/// epoch and batch on a numerical failure.
ExperimentResult run_experiment(const TrainConfig& config, const RunOptions& options = {});

/// Same, on an already materialized dataset.
ExperimentResult run_experiment(const TrainConfig& config, Dataset data,
                                const RunOptions& options = {});

/// Header epoch,train_acc,test_acc,l_g,l_v,total,degenerate_flags,seconds;
/// test_acc is empty without a test set. LF line endings.
void write_metrics_csv(std::ostream& os, std::span<const EpochMetrics> metrics);

/// Features used for classification and export: the network output for
/// ole_grsvnet, the last hidden activations for the softmax modes.
Matrix extract_features(const MlpParams& params, Mode mode, const Matrix& x);

/// Predicted labels for x: subspace classifier for ole_grsvnet (requires
/// subspaces), logit argmax otherwise. Ties go to the smallest label.
std::vector<int> predict_with(const MlpParams& params, Mode mode, const SubspaceSet* subspaces,
                              const Matrix& x, double eps, int* flagged = nullptr);

struct ModeOutcome {
  Mode mode = Mode::kSoftmax;
  bool ok = false;
  std::string error;
  std::vector<EpochMetrics> metrics;

  double final_train_accuracy() const { return metrics.empty() ? 0.0 : metrics.back().train_accuracy; }
  std::optional<double> final_test_accuracy() const {
    return metrics.empty() ? std::nullopt : metrics.back().test_accuracy;
  }
};

struct CompareReport {
  std::vector<ModeOutcome> outcomes;
};

/// Runs base with each mode on the same dataset and seed. A failing mode is
/// recorded and the others continue. When out_dir is non-empty, writes
/// metrics_<mode>.csv per mode and summary.csv there.
CompareReport compare_modes(const TrainConfig& base, std::span<const Mode> modes,
                            const std::string& out_dir = {}, const RunOptions& options = {},
                            bool parallel = false);

/// Header mode,status,final_train_acc,final_test_acc.
void write_summary_csv(std::ostream& os, const CompareReport& report);

struct PrincipalComponents {
  Matrix scores;          // N x 3 projections of the centered features
  Vector variances;       // per component
  double explained = 0.0; // fraction of total variance in the 3 components
};

/// Top-3 principal components of the columns of z by subspace (block power)
/// iteration on the centered scatter matrix, finished with a Rayleigh-Ritz
/// rotation so the score columns are orthogonal.
PrincipalComponents principal_components(const Matrix& z, int components = 3);

struct FeatureExport {
  Matrix features;  // F x N
  PrincipalComponents pca;
};

/// Writes "sample_id,label,f_0..f_{F-1},pc_1,pc_2,pc_3" rows.
FeatureExport export_features(const MlpParams& params, Mode mode, const LabeledBatch& batch,
                              const std::string& path);
void write_features_csv(std::ostream& os, const LabeledBatch& batch, const FeatureExport& fx);

// Artifacts of one run into a directory: metrics.csv, checkpoint.txt,
// config.toml, train.csv, test.csv (when non-empty) and subspaces.csv for
// ole_grsvnet.
void write_run_directory(const ExperimentResult& result, const std::string& dir);

}  // namespace grsv

#endif  // GRSV_HARNESS_HPP_
