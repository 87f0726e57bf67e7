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

#ifndef GRSV_CHECKS_HPP_
#define GRSV_CHECKS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grsv/linalg.hpp"

// Executable property suites for the nuclear-norm identities, the OLE
// subgradient and the training gradients. They back the `selftest` command
// and the acceptance suite.
namespace grsv::checks {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Central differences of f at x, entry by entry.
Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                         double step);

/// max |analytic - numeric| / max |numeric| (absolute when numeric is 0).
double relative_error(const Matrix& analytic, const Matrix& numeric);

/// Nuclear-norm subadditivity on random pairs, equality on pairs with
/// orthogonal column spaces, and a strict gap on pairs with ||A^T B||_F >= 0.1.
CheckResult nuclear_norm_concatenation(int random_pairs, int orthogonal_pairs, int coupled_pairs,
                                       std::uint64_t seed);

/// Subgradient agrees with finite differences at full-rank points; satisfies
/// the subgradient inequality at rank-deficient points with sigma_s >= 0.5;
/// moves by at most 1e3 * noise / sigma_s under a 1e-10 perturbation.
CheckResult nuclear_norm_subgradients(int full_rank_points, int deficient_points, std::uint64_t seed);

/// End-to-end parameter gradients of every training mode against central
/// differences through a 3-hidden-layer MLP on a 12-sample, 3-class batch.
CheckResult training_gradients(int points_per_mode, std::uint64_t seed);

/// Features with orthogonal class subspaces and validation samples inside
/// their own subspace reach total loss <= 1e-6; moving one validation
/// feature toward another class by relative norm 0.1 raises it above 1e-3;
/// all-zero features are flagged degenerate.
CheckResult optimality_fixture();

std::vector<CheckResult> run_selftest(
    const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace grsv::checks

#endif  // GRSV_CHECKS_HPP_
