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

#include "grsv/harness.hpp"

#include <chrono>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <string>

#include "grsv/classifier.hpp"
#include "grsv/error.hpp"
#include "grsv/loss.hpp"

namespace grsv {
namespace {

constexpr double kGeometricFloor = -1e-8;

std::uint64_t init_seed(const TrainConfig& c) { return c.seed * 2 + 1; }
std::uint64_t batch_seed(const TrainConfig& c) { return c.seed * 2 + 2; }

int argmax_smallest(const Eigen::Ref<const Vector>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return static_cast<int>(best) + 1;
}

struct BatchOutcome {
  MlpParams grads;
  double l_g = 0.0;
  double l_v = 0.0;
  double total = 0.0;
  int degenerate = 0;
};

BatchOutcome grsvnet_batch(const TrainConfig& c, const MlpParams& params, const BatchSplit& split) {
  const ForwardResult fg = forward(params, split.geometry.x);
  const ForwardResult fv = forward(params, split.validation.x);
  const GrsvLoss loss =
      grsvnet_loss(split, fg.features, fv.features, {c.lambda, c.eps, c.ratio, c.trunc});
  if (loss.loss.geometric < kGeometricFloor)
    throw NumericalError("OLE loss negative (" + std::to_string(loss.loss.geometric) + ")");
  BatchOutcome out;
  out.grads = backward(params, fg.cache, loss.grad_g);
  out.grads += backward(params, fv.cache, loss.grad_v);
  out.l_g = loss.loss.geometric;
  out.l_v = loss.loss.validation;
  out.total = loss.loss.total;
  out.degenerate = loss.degenerate;
  return out;
}

BatchOutcome softmax_batch(const TrainConfig& c, const MlpParams& params, const BatchSplit& split) {
  const Matrix x = hconcat(split.geometry.x, split.validation.x);
  std::vector<int> y = split.geometry.y;
  y.insert(y.end(), split.validation.y.begin(), split.validation.y.end());
  const ForwardResult f = forward(params, x);
  const LossAndGrad xent = softmax_xent(f.features, y);
  BatchOutcome out;
  out.l_v = xent.value;
  out.total = xent.value;
  if (c.mode == Mode::kSoftmaxOle) {
    LossAndGrad ole = ole_loss(f.penultimate(), y, c.trunc);
    if (ole.value < kGeometricFloor)
      throw NumericalError("OLE loss negative (" + std::to_string(ole.value) + ")");
    out.l_g = ole.value;
    out.total += c.ole_weight * ole.value;
    ole.grad *= c.ole_weight;
    out.grads = backward(params, f.cache, xent.grad, &ole.grad);
  } else {
    out.grads = backward(params, f.cache, xent.grad);
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void open_for_write(std::ofstream& f, const std::string& path) {
  f.open(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
}

}  // namespace

Matrix extract_features(const MlpParams& params, Mode mode, const Matrix& x) {
  ForwardResult f = forward(params, x);
  if (mode == Mode::kOleGrsvnet) return std::move(f.features);
  return f.cache.inputs.back();
}

std::vector<int> predict_with(const MlpParams& params, Mode mode, const SubspaceSet* subspaces,
                              const Matrix& x, double eps, int* flagged) {
  if (flagged) *flagged = 0;
  if (x.cols() == 0) return {};
  const Matrix out = forward(params, x).features;
  if (mode == Mode::kOleGrsvnet) {
    require(subspaces != nullptr, "predict_with: ole_grsvnet needs a subspace set");
    return predict_labels(*subspaces, out, eps, flagged);
  }
  std::vector<int> labels(static_cast<size_t>(out.cols()));
  for (Index j = 0; j < out.cols(); ++j) labels[static_cast<size_t>(j)] = argmax_smallest(out.col(j));
  return labels;
}

ExperimentResult run_experiment(const TrainConfig& config, const RunOptions& options) {
  config.validate();
  return run_experiment(config, generate(config.dataset), options);
}

ExperimentResult run_experiment(const TrainConfig& config, Dataset data, const RunOptions& options) {
  config.validate();
  data.train.validate();
  if (data.train.classes != config.dataset.classes)
    throw ConfigError("dataset has " + std::to_string(data.train.classes) + " classes, config K = " +
                      std::to_string(config.dataset.classes));
  if (config.batch_size > data.train.size())
    throw ConfigError("batch_size exceeds the number of training samples");

  ExperimentResult r;
  r.config = config;
  r.data = std::move(data);
  const LabeledBatch& train = r.data.train;
  const LabeledBatch& test = r.data.test;
  const auto dims = config.network_dims(train.x.rows());
  r.params = xavier_init(dims, init_seed(config));
  const double wd = config.mode == Mode::kSoftmaxWd ? config.weight_decay : 0.0;
  OptimizerState opt = make_optimizer(r.params, config.learning_rate(), config.momentum, wd);
  const bool grsvnet = config.mode == Mode::kOleGrsvnet;

  using Clock = std::chrono::steady_clock;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = Clock::now();
    opt.learning_rate = scheduled_learning_rate(config.learning_rate(), epoch, config.epochs);
    const EpochPlan plan =
        epoch_batches(train, config.batch_size, config.g_fraction, batch_seed(config), epoch);
    if (plan.batches.empty())
      throw ConfigError("no batch of this epoch holds two samples of every class");

    EpochMetrics m;
    m.epoch = epoch + 1;
    for (size_t b = 0; b < plan.batches.size(); ++b) {
      BatchOutcome out;
      try {
        out = grsvnet ? grsvnet_batch(config, r.params, plan.batches[b])
                      : softmax_batch(config, r.params, plan.batches[b]);
        sgd_step(r.params, out.grads, opt);
        if (!r.params.all_finite()) throw NumericalError("non-finite parameters after update");
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(b) +
                             ": " + e.what());
      }
      m.l_g += out.l_g;
      m.l_v += out.l_v;
      m.total += out.total;
      m.degenerate_flags += out.degenerate;
    }
    const auto n_batches = static_cast<double>(plan.batches.size());
    m.l_g /= n_batches;
    m.l_v /= n_batches;
    m.total /= n_batches;

    if (grsvnet) {
      try {
        const Matrix z = forward(r.params, train.x).features;
        r.subspaces = fit(group_by_class(z, train.y, train.classes), config.ratio);
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch + 1) + " subspace refit: " + e.what());
      }
    }
    const SubspaceSet* set = r.subspaces ? &*r.subspaces : nullptr;
    m.train_accuracy = accuracy(predict_with(r.params, config.mode, set, train.x, config.eps), train.y);
    if (test.size() > 0)
      m.test_accuracy = accuracy(predict_with(r.params, config.mode, set, test.x, config.eps), test.y);
    if (options.wall_clock)
      m.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (options.on_epoch) options.on_epoch(m);
    r.metrics.push_back(m);
  }
  return r;
}

void write_metrics_csv(std::ostream& os, std::span<const EpochMetrics> metrics) {
  os << "epoch,train_acc,test_acc,l_g,l_v,total,degenerate_flags,seconds\n";
  for (const auto& m : metrics) {
    os << m.epoch << ',' << format_number(m.train_accuracy) << ','
       << (m.test_accuracy ? format_number(*m.test_accuracy) : std::string()) << ','
       << format_number(m.l_g) << ',' << format_number(m.l_v) << ',' << format_number(m.total)
       << ',' << m.degenerate_flags << ',' << format_number(m.seconds) << '\n';
  }
  if (!os) throw IoError("write_metrics_csv: write failed");
}

CompareReport compare_modes(const TrainConfig& base, std::span<const Mode> modes,
                            const std::string& out_dir, const RunOptions& options, bool parallel) {
  base.dataset.validate();
  const Dataset data = generate(base.dataset);
  auto run_one = [&](Mode mode) {
    ModeOutcome o;
    o.mode = mode;
    try {
      TrainConfig c = base;
      c.mode = mode;
      ExperimentResult r = run_experiment(c, data, options);
      o.metrics = std::move(r.metrics);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    return o;
  };

  CompareReport report;
  if (parallel) {
    std::vector<std::future<ModeOutcome>> jobs;
    for (Mode m : modes) jobs.push_back(std::async(std::launch::async, run_one, m));
    for (auto& j : jobs) report.outcomes.push_back(j.get());
  } else {
    for (Mode m : modes) report.outcomes.push_back(run_one(m));
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const auto& o : report.outcomes) {
      if (!o.ok) continue;
      std::ofstream f;
      open_for_write(f, out_dir + "/metrics_" + std::string(mode_name(o.mode)) + ".csv");
      write_metrics_csv(f, o.metrics);
    }
    std::ofstream f;
    open_for_write(f, out_dir + "/summary.csv");
    write_summary_csv(f, report);
  }
  return report;
}

void write_summary_csv(std::ostream& os, const CompareReport& report) {
  os << "mode,status,final_train_acc,final_test_acc\n";
  for (const auto& o : report.outcomes) {
    os << mode_name(o.mode) << ',' << (o.ok ? "ok" : "failed") << ',';
    if (o.ok) {
      os << format_number(o.final_train_accuracy()) << ',';
      if (auto t = o.final_test_accuracy()) os << format_number(*t);
    } else {
      os << ',';
    }
    os << '\n';
  }
}

PrincipalComponents principal_components(const Matrix& z, int components) {
  require(components >= 1, "principal_components: need at least one component");
  PrincipalComponents pc;
  const Index n = z.cols();
  pc.scores = Matrix::Zero(n, components);
  pc.variances = Vector::Zero(components);
  if (n == 0) return pc;
  const Matrix centered = z.colwise() - z.rowwise().mean();
  const Matrix scatter = centered * centered.transpose();
  const double trace = scatter.trace();
  const Index k = std::min<Index>(components, z.rows());

  // Deterministic start: columns of a fixed pseudo-random matrix.
  auto rng = seeded_engine(0x5eed, 0);
  std::normal_distribution<double> normal;
  Matrix block(z.rows(), k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < z.rows(); ++i) block(i, j) = normal(rng);
  Matrix basis = Eigen::HouseholderQR<Matrix>(block).householderQ() * Matrix::Identity(z.rows(), k);
  for (int iter = 0; iter < 1000; ++iter) {
    const Matrix next_raw = scatter * basis;
    if (next_raw.norm() == 0.0) break;
    Matrix next = Eigen::HouseholderQR<Matrix>(next_raw).householderQ() * Matrix::Identity(z.rows(), k);
    // Converged when the spanned subspace stops moving.
    const double move = (next - basis * (basis.transpose() * next)).norm();
    basis = std::move(next);
    if (move < 1e-13) break;
  }
  // Rayleigh-Ritz: rotate within the block so the scores are orthogonal.
  const Matrix h = basis.transpose() * scatter * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  Matrix rot = eig.eigenvectors().rowwise().reverse();
  const Matrix directions = basis * rot;
  pc.scores.leftCols(k) = centered.transpose() * directions;
  double captured = 0.0;
  for (Index j = 0; j < k; ++j) {
    pc.variances(j) = pc.scores.col(j).squaredNorm() / static_cast<double>(n);
    captured += pc.scores.col(j).squaredNorm();
  }
  pc.explained = trace > 0.0 ? captured / trace : 1.0;
  return pc;
}

void write_features_csv(std::ostream& os, const LabeledBatch& batch, const FeatureExport& fx) {
  os << "sample_id,label";
  for (Index i = 0; i < fx.features.rows(); ++i) os << ",f_" << i;
  for (Index k = 0; k < fx.pca.scores.cols(); ++k) os << ",pc_" << k + 1;
  os << '\n';
  for (Index j = 0; j < batch.size(); ++j) {
    os << batch.ids[static_cast<size_t>(j)] << ',' << batch.y[static_cast<size_t>(j)];
    for (Index i = 0; i < fx.features.rows(); ++i) os << ',' << format_number(fx.features(i, j));
    for (Index k = 0; k < fx.pca.scores.cols(); ++k) os << ',' << format_number(fx.pca.scores(j, k));
    os << '\n';
  }
  if (!os) throw IoError("write_features_csv: write failed");
}

FeatureExport export_features(const MlpParams& params, Mode mode, const LabeledBatch& batch,
                              const std::string& path) {
  FeatureExport fx;
  fx.features = extract_features(params, mode, batch.x);
  fx.pca = principal_components(fx.features, 3);
  std::ofstream f;
  open_for_write(f, path);
  write_features_csv(f, batch, fx);
  return fx;
}

void write_run_directory(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream f;
  open_for_write(f, dir + "/metrics.csv");
  write_metrics_csv(f, result.metrics);
  f.close();
  open_for_write(f, dir + "/checkpoint.txt");
  write_checkpoint(f, result.params, std::string(mode_name(result.config.mode)));
  f.close();
  open_for_write(f, dir + "/config.toml");
  f << format_config(result.config);
  f.close();
  open_for_write(f, dir + "/train.csv");
  write_dataset_csv(f, result.data.train);
  f.close();
  if (result.data.test.size() > 0) {
    open_for_write(f, dir + "/test.csv");
    write_dataset_csv(f, result.data.test);
    f.close();
  }
  if (result.subspaces) {
    open_for_write(f, dir + "/subspaces.csv");
    write_subspaces_csv(f, *result.subspaces);
  }
}

}  // namespace grsv
