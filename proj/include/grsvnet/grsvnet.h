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

#ifndef GRSVNET_GRSVNET_H_
#define GRSVNET_GRSVNET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef GRSVNET_BUILDING_LIBRARY
#    define GRSV_API __declspec(dllexport)
#  else
#    define GRSV_API __declspec(dllimport)
#  endif
#else
#  define GRSV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status; on failure grsv_last_error() describes it.
   The message lives until the next failing call on the same thread. */
typedef enum grsv_status {
  GRSV_OK = 0,
  GRSV_ERR_INVALID_ARGUMENT = 1, /* null handle, bad shape, contract violation */
  GRSV_ERR_CONFIG = 2,
  GRSV_ERR_NUMERICAL = 3,
  GRSV_ERR_IO = 4,
  GRSV_ERR_INTERNAL = 5
} grsv_status;

typedef struct grsv_config grsv_config;
typedef struct grsv_run grsv_run;

typedef struct grsv_epoch_metrics {
  int32_t epoch; /* 1-based */
  double train_accuracy;
  double test_accuracy; /* NaN without a test set */
  double l_g;
  double l_v;
  double total;
  int32_t degenerate_flags;
  double seconds;
} grsv_epoch_metrics;

GRSV_API const char* grsv_version(void);
GRSV_API const char* grsv_last_error(void);
GRSV_API const char* grsv_status_name(grsv_status status);

/* Configuration */
GRSV_API grsv_status grsv_config_load(const char* path, grsv_config** out);
GRSV_API grsv_status grsv_config_parse(const char* text, grsv_config** out);
/* softmax, softmax_wd, softmax_ole or ole_grsvnet */
GRSV_API grsv_status grsv_config_set_mode(grsv_config* config, const char* mode);
GRSV_API grsv_status grsv_config_set_epochs(grsv_config* config, int32_t epochs);
GRSV_API grsv_status grsv_config_mode(const grsv_config* config, const char** mode);
GRSV_API void grsv_config_free(grsv_config* config);

/* Training. on_epoch may be null. */
typedef void (*grsv_epoch_callback)(const grsv_epoch_metrics* metrics, void* user);

GRSV_API grsv_status grsv_run_experiment(const grsv_config* config, int32_t wall_clock,
                                         grsv_epoch_callback on_epoch, void* user,
                                         grsv_run** out);
GRSV_API grsv_status grsv_run_epoch_count(const grsv_run* run, int32_t* count);
GRSV_API grsv_status grsv_run_epoch(const grsv_run* run, int32_t index,
                                    grsv_epoch_metrics* out);
GRSV_API grsv_status grsv_run_write_metrics(const grsv_run* run, const char* path);
GRSV_API grsv_status grsv_run_save_checkpoint(const grsv_run* run, const char* path);
/* metrics.csv, checkpoint.txt, config.toml, train.csv, test.csv, subspaces.csv */
GRSV_API grsv_status grsv_run_write_directory(const grsv_run* run, const char* dir);
GRSV_API void grsv_run_free(grsv_run* run);

/* Trains every mode in the comma-separated list on the same data and seed.
   Writes metrics_<mode>.csv and summary.csv into out_dir. failed_modes
   receives the number of modes that raised an error. */
GRSV_API grsv_status grsv_compare_modes(const grsv_config* config, const char* modes,
                                        const char* out_dir, int32_t* failed_modes);

/* Loads a checkpoint and a dataset CSV, writes per-sample features plus
   their top-3 principal components to out_path. */
GRSV_API grsv_status grsv_export_features(const char* checkpoint_path,
                                          const char* dataset_path, const char* out_path,
                                          double* explained_variance);

/* Writes the configured dataset as train.csv (and test.csv when split). */
GRSV_API grsv_status grsv_dataset_generate(const grsv_config* config, const char* out_dir);

/* Property suites. on_check is called once per suite as it finishes. */
typedef void (*grsv_check_callback)(const char* name, int32_t passed, const char* detail,
                                    double seconds, void* user);
GRSV_API grsv_status grsv_selftest(grsv_check_callback on_check, void* user,
                                   int32_t* failures);

/* Dense helpers on row-major buffers. */
GRSV_API grsv_status grsv_nuclear_norm(const double* data, size_t rows, size_t cols,
                                       double* out);
/* z is rows x cols with one sample per column; labels has cols entries in 1..K. */
GRSV_API grsv_status grsv_ole_loss(const double* z, size_t rows, size_t cols,
                                   const int32_t* labels, double* value, double* grad);

#ifdef __cplusplus
}
#endif

#endif /* GRSVNET_GRSVNET_H_ */
