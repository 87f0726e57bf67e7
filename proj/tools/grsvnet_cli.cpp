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

// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grsvnet/grsvnet.h"

namespace {

int report(grsv_status status) {
  if (status == GRSV_OK) return 0;
  std::fprintf(stderr, "error (%s): %s\n", grsv_status_name(status), grsv_last_error());
  return 1 + static_cast<int>(status);
}

struct ConfigHandle {
  grsv_config* p = nullptr;
  ~ConfigHandle() { grsv_config_free(p); }
};

struct RunHandle {
  grsv_run* p = nullptr;
  ~RunHandle() { grsv_run_free(p); }
};

void print_epoch(const grsv_epoch_metrics* m, void* user) {
  const int every = *static_cast<int*>(user);
  if (every <= 0 || m->epoch % every != 0) return;
  std::printf("epoch %5d  train %.4f", m->epoch, m->train_accuracy);
  if (!std::isnan(m->test_accuracy)) std::printf("  test %.4f", m->test_accuracy);
  std::printf("  l_g %.5g  l_v %.5g  total %.5g", m->l_g, m->l_v, m->total);
  if (m->degenerate_flags) std::printf("  degenerate %d", m->degenerate_flags);
  std::printf("\n");
  std::fflush(stdout);
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool wall_clock,
            int every, int epochs) {
  ConfigHandle cfg;
  if (int rc = report(grsv_config_load(config_path.c_str(), &cfg.p))) return rc;
  if (epochs > 0)
    if (int rc = report(grsv_config_set_epochs(cfg.p, epochs))) return rc;
  RunHandle run;
  if (int rc = report(grsv_run_experiment(cfg.p, wall_clock, print_epoch, &every, &run.p)))
    return rc;
  int32_t n = 0;
  grsv_run_epoch_count(run.p, &n);
  grsv_epoch_metrics last{};
  if (n > 0) grsv_run_epoch(run.p, n - 1, &last);
  std::printf("final train %.4f", last.train_accuracy);
  if (!std::isnan(last.test_accuracy)) std::printf("  test %.4f", last.test_accuracy);
  std::printf("\n");
  if (!out_dir.empty()) {
    if (int rc = report(grsv_run_write_directory(run.p, out_dir.c_str()))) return rc;
    std::printf("wrote %s\n", out_dir.c_str());
  }
  return 0;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream is(path);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string percent(const std::string& cell) {
  if (cell.empty()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * std::stod(cell));
  return buf;
}

int cmd_compare(const std::string& config_path, const std::string& modes, const std::string& out_dir,
                int epochs) {
  ConfigHandle cfg;
  if (int rc = report(grsv_config_load(config_path.c_str(), &cfg.p))) return rc;
  if (epochs > 0)
    if (int rc = report(grsv_config_set_epochs(cfg.p, epochs))) return rc;
  int32_t failed = 0;
  if (int rc = report(grsv_compare_modes(cfg.p, modes.c_str(), out_dir.c_str(), &failed))) return rc;

  // Table of final accuracies, "test (train)" in percent.
  const auto rows = read_csv(out_dir + "/summary.csv");
  std::printf("%-14s %s\n", "mode", "test (train)");
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 4) continue;
    if (r[1] != "ok") {
      std::printf("%-14s %s\n", r[0].c_str(), r[1].c_str());
      continue;
    }
    std::printf("%-14s %s (%s)\n", r[0].c_str(), percent(r[3]).c_str(), percent(r[2]).c_str());
  }
  return failed ? 1 : 0;
}

void print_check(const char* name, int32_t passed, const char* detail, double seconds, void*) {
  std::printf("%s  %-28s %6.2fs  %s\n", passed ? "PASS" : "FAIL", name, seconds, detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace-regularized feature learning experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(grsv_version()));

  std::string config_path, out_dir, modes = "softmax,softmax_wd,softmax_ole,ole_grsvnet";
  bool wall_clock = false;
  int every = 100, epochs = 0;

  auto* run = app.add_subcommand("run", "Train one network from a config file");
  run->add_option("--config", config_path, "TOML config")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", out_dir, "Directory for metrics, checkpoint and subspaces");
  run->add_flag("--wall-clock", wall_clock, "Record per-epoch wall time in metrics.csv");
  run->add_option("--print-every", every, "Print metrics every N epochs (0: never)");
  run->add_option("--epochs", epochs, "Override the configured epoch count");

  auto* compare = app.add_subcommand("compare", "Train several modes on the same data");
  compare->add_option("--config", config_path, "TOML config")->required()->check(CLI::ExistingFile);
  compare->add_option("--modes", modes, "Comma-separated modes");
  compare->add_option("--out-dir", out_dir, "Directory for per-mode metrics")->required();
  compare->add_option("--epochs", epochs, "Override the configured epoch count");

  std::string checkpoint, dataset, out;
  auto* exp = app.add_subcommand("export-features", "Dump features and top-3 PCA of a dataset");
  exp->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  exp->add_option("--dataset", dataset, "CSV with sample_id,label,x_0..")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", out)->required();

  auto* gen = app.add_subcommand("generate", "Write the configured dataset as CSV");
  gen->add_option("--config", config_path, "TOML config")->required()->check(CLI::ExistingFile);
  gen->add_option("--out-dir", out_dir)->required();

  auto* self = app.add_subcommand("selftest", "Run the nuclear-norm and gradient property suites");

  CLI11_PARSE(app, argc, argv);

  if (*run) return cmd_run(config_path, out_dir, wall_clock, every, epochs);
  if (*compare) return cmd_compare(config_path, modes, out_dir, epochs);
  if (*exp) {
    double explained = 0.0;
    if (int rc = report(grsv_export_features(checkpoint.c_str(), dataset.c_str(), out.c_str(), &explained)))
      return rc;
    std::printf("wrote %s (top-3 components explain %.1f%% of variance)\n", out.c_str(),
                100.0 * explained);
    return 0;
  }
  if (*gen) {
    ConfigHandle cfg;
    if (int rc = report(grsv_config_load(config_path.c_str(), &cfg.p))) return rc;
    return report(grsv_dataset_generate(cfg.p, out_dir.c_str()));
  }
  if (*self) {
    int32_t failures = 0;
    if (int rc = report(grsv_selftest(print_check, nullptr, &failures))) return rc;
    std::printf("%d failing suite(s)\n", failures);
    return failures ? 1 : 0;
  }
  return 0;
}
