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

#include "grsvnet/grsvnet.h"

#include <filesystem>
#include <fstream>
#include <limits>
#include <new>
#include <string>
#include <string_view>
#include <vector>

#include "grsv/checks.hpp"
#include "grsv/config.hpp"
#include "grsv/data.hpp"
#include "grsv/error.hpp"
#include "grsv/harness.hpp"
#include "grsv/linalg.hpp"
#include "grsv/loss.hpp"
#include "grsv/net.hpp"

struct grsv_config {
  grsv::TrainConfig value;
};

struct grsv_run {
  grsv::ExperimentResult value;
};

namespace {

thread_local std::string g_last_error;

grsv_status fail(grsv_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into status codes.
template <typename F>
grsv_status guarded(F&& body) {
  try {
    body();
    return GRSV_OK;
  } catch (const grsv::Error& e) {
    switch (e.kind()) {
      case grsv::ErrorKind::kContract: return fail(GRSV_ERR_INVALID_ARGUMENT, e.what());
      case grsv::ErrorKind::kConfiguration: return fail(GRSV_ERR_CONFIG, e.what());
      case grsv::ErrorKind::kNumerical: return fail(GRSV_ERR_NUMERICAL, e.what());
      case grsv::ErrorKind::kIo: return fail(GRSV_ERR_IO, e.what());
    }
    return fail(GRSV_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GRSV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GRSV_ERR_INTERNAL, e.what());
  }
}

#define GRSV_REQUIRE_ARG(cond, what) \
  if (!(cond)) return fail(GRSV_ERR_INVALID_ARGUMENT, what)

grsv_epoch_metrics to_c(const grsv::EpochMetrics& m) {
  grsv_epoch_metrics out{};
  out.epoch = m.epoch;
  out.train_accuracy = m.train_accuracy;
  out.test_accuracy = m.test_accuracy.value_or(std::numeric_limits<double>::quiet_NaN());
  out.l_g = m.l_g;
  out.l_v = m.l_v;
  out.total = m.total;
  out.degenerate_flags = m.degenerate_flags;
  out.seconds = m.seconds;
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw grsv::IoError("cannot write " + path);
  return os;
}

grsv::Matrix from_row_major(const double* data, size_t rows, size_t cols) {
  grsv::Matrix m(static_cast<grsv::Index>(rows), static_cast<grsv::Index>(cols));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j)
      m(static_cast<grsv::Index>(i), static_cast<grsv::Index>(j)) = data[i * cols + j];
  return m;
}

}  // namespace

extern "C" {

const char* grsv_version(void) { return "0.1.0"; }

const char* grsv_last_error(void) { return g_last_error.c_str(); }

const char* grsv_status_name(grsv_status status) {
  switch (status) {
    case GRSV_OK: return "ok";
    case GRSV_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GRSV_ERR_CONFIG: return "configuration error";
    case GRSV_ERR_NUMERICAL: return "numerical error";
    case GRSV_ERR_IO: return "i/o error";
    case GRSV_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

grsv_status grsv_config_load(const char* path, grsv_config** out) {
  GRSV_REQUIRE_ARG(path && out, "path and out must not be null");
  *out = nullptr;
  return guarded([&] { *out = new grsv_config{grsv::load_config(path)}; });
}

grsv_status grsv_config_parse(const char* text, grsv_config** out) {
  GRSV_REQUIRE_ARG(text && out, "text and out must not be null");
  *out = nullptr;
  return guarded([&] { *out = new grsv_config{grsv::parse_config(text)}; });
}

grsv_status grsv_config_set_mode(grsv_config* config, const char* mode) {
  GRSV_REQUIRE_ARG(config && mode, "config and mode must not be null");
  return guarded([&] { config->value.mode = grsv::parse_mode(mode); });
}

grsv_status grsv_config_set_epochs(grsv_config* config, int32_t epochs) {
  GRSV_REQUIRE_ARG(config, "config must not be null");
  return guarded([&] {
    grsv::TrainConfig next = config->value;
    next.epochs = epochs;
    next.validate();
    config->value = next;
  });
}

grsv_status grsv_config_mode(const grsv_config* config, const char** mode) {
  GRSV_REQUIRE_ARG(config && mode, "config and mode must not be null");
  // mode_name views static storage
  *mode = grsv::mode_name(config->value.mode).data();
  return GRSV_OK;
}

void grsv_config_free(grsv_config* config) { delete config; }

grsv_status grsv_run_experiment(const grsv_config* config, int32_t wall_clock,
                                grsv_epoch_callback on_epoch, void* user, grsv_run** out) {
  GRSV_REQUIRE_ARG(config && out, "config and out must not be null");
  *out = nullptr;
  return guarded([&] {
    grsv::RunOptions options;
    options.wall_clock = wall_clock != 0;
    if (on_epoch) {
      options.on_epoch = [on_epoch, user](const grsv::EpochMetrics& m) {
        const grsv_epoch_metrics c = to_c(m);
        on_epoch(&c, user);
      };
    }
    *out = new grsv_run{grsv::run_experiment(config->value, options)};
  });
}

grsv_status grsv_run_epoch_count(const grsv_run* run, int32_t* count) {
  GRSV_REQUIRE_ARG(run && count, "run and count must not be null");
  *count = static_cast<int32_t>(run->value.metrics.size());
  return GRSV_OK;
}

grsv_status grsv_run_epoch(const grsv_run* run, int32_t index, grsv_epoch_metrics* out) {
  GRSV_REQUIRE_ARG(run && out, "run and out must not be null");
  GRSV_REQUIRE_ARG(index >= 0 && static_cast<size_t>(index) < run->value.metrics.size(),
                   "epoch index out of range");
  *out = to_c(run->value.metrics[static_cast<size_t>(index)]);
  return GRSV_OK;
}

grsv_status grsv_run_write_metrics(const grsv_run* run, const char* path) {
  GRSV_REQUIRE_ARG(run && path, "run and path must not be null");
  return guarded([&] {
    auto os = open_out(path);
    grsv::write_metrics_csv(os, run->value.metrics);
  });
}

grsv_status grsv_run_save_checkpoint(const grsv_run* run, const char* path) {
  GRSV_REQUIRE_ARG(run && path, "run and path must not be null");
  return guarded([&] {
    auto os = open_out(path);
    grsv::write_checkpoint(os, run->value.params, std::string(grsv::mode_name(run->value.config.mode)));
  });
}

grsv_status grsv_run_write_directory(const grsv_run* run, const char* dir) {
  GRSV_REQUIRE_ARG(run && dir, "run and dir must not be null");
  return guarded([&] { grsv::write_run_directory(run->value, dir); });
}

void grsv_run_free(grsv_run* run) { delete run; }

grsv_status grsv_compare_modes(const grsv_config* config, const char* modes, const char* out_dir,
                               int32_t* failed_modes) {
  GRSV_REQUIRE_ARG(config && modes, "config and modes must not be null");
  return guarded([&] {
    std::vector<grsv::Mode> parsed;
    std::string_view rest(modes);
    while (!rest.empty()) {
      const size_t comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      if (!item.empty()) parsed.push_back(grsv::parse_mode(item));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (parsed.empty()) throw grsv::ConfigError("no modes given");
    const grsv::CompareReport report =
        grsv::compare_modes(config->value, parsed, out_dir ? out_dir : "");
    int32_t failed = 0;
    for (const auto& o : report.outcomes) failed += o.ok ? 0 : 1;
    if (failed_modes) *failed_modes = failed;
  });
}

grsv_status grsv_export_features(const char* checkpoint_path, const char* dataset_path,
                                 const char* out_path, double* explained_variance) {
  GRSV_REQUIRE_ARG(checkpoint_path && dataset_path && out_path, "paths must not be null");
  return guarded([&] {
    std::ifstream ck(checkpoint_path);
    if (!ck) throw grsv::IoError(std::string("cannot read ") + checkpoint_path);
    std::string mode;
    const grsv::MlpParams params = grsv::read_checkpoint(ck, &mode);
    std::ifstream ds(dataset_path);
    if (!ds) throw grsv::IoError(std::string("cannot read ") + dataset_path);
    const grsv::LabeledBatch batch = grsv::read_dataset_csv(ds);
    if (batch.x.rows() != params.input_dim())
      throw grsv::ConfigError("dataset dimension " + std::to_string(batch.x.rows()) +
                              " does not match checkpoint input " +
                              std::to_string(params.input_dim()));
    const grsv::FeatureExport fx =
        grsv::export_features(params, grsv::parse_mode(mode), batch, out_path);
    if (explained_variance) *explained_variance = fx.pca.explained;
  });
}

grsv_status grsv_dataset_generate(const grsv_config* config, const char* out_dir) {
  GRSV_REQUIRE_ARG(config && out_dir, "config and out_dir must not be null");
  return guarded([&] {
    const grsv::Dataset data = grsv::generate(config->value.dataset);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    auto train = open_out((dir / "train.csv").string());
    grsv::write_dataset_csv(train, data.train);
    if (data.test.size() > 0) {
      auto test = open_out((dir / "test.csv").string());
      grsv::write_dataset_csv(test, data.test);
    }
  });
}

grsv_status grsv_selftest(grsv_check_callback on_check, void* user, int32_t* failures) {
  return guarded([&] {
    int32_t failed = 0;
    grsv::checks::run_selftest([&](const grsv::checks::CheckResult& r) {
      failed += r.passed ? 0 : 1;
      if (on_check) on_check(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), r.seconds, user);
    });
    if (failures) *failures = failed;
  });
}

grsv_status grsv_nuclear_norm(const double* data, size_t rows, size_t cols, double* out) {
  GRSV_REQUIRE_ARG(out && (data || rows * cols == 0), "data and out must not be null");
  return guarded([&] { *out = grsv::nuclear_norm(from_row_major(data, rows, cols)); });
}

grsv_status grsv_ole_loss(const double* z, size_t rows, size_t cols, const int32_t* labels,
                          double* value, double* grad) {
  GRSV_REQUIRE_ARG(z && labels && value, "z, labels and value must not be null");
  return guarded([&] {
    const grsv::Matrix m = from_row_major(z, rows, cols);
    const std::vector<int> y(labels, labels + cols);
    const grsv::LossAndGrad r = grsv::ole_loss(m, y);
    *value = r.value;
    if (grad)
      for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j)
          grad[i * cols + j] = r.grad(static_cast<grsv::Index>(i), static_cast<grsv::Index>(j));
  });
}

}  // extern "C"
