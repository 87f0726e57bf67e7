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

#ifndef GRSV_LOSS_HPP_
#define GRSV_LOSS_HPP_

#include <cmath>
#include <cstdint>
#include <span>

#include "grsv/batch.hpp"
#include "grsv/linalg.hpp"
#include "grsv/subspace.hpp"

namespace grsv {

// Stability constant in the projection score denominator.
inline constexpr double kDefaultEps = 1e-6;
// The true-class probability is floored here before the log.
inline constexpr double kProbabilityFloor = 1e-12;
// -log(kProbabilityFloor): finite stand-in for an infinite validation loss.
inline const double kValidationCeiling = -std::log(kProbabilityFloor);

struct LossAndGrad {
  double value = 0.0;
  Matrix grad;
};

/// Orthogonal low-rank embedding loss sum_c ||Z_c||_* - ||Z||_* with the
/// canonical nuclear-norm subgradient. Classes with no columns contribute
/// nothing.
LossAndGrad ole_loss(const Matrix& z, std::span<const int> labels,
                     double trunc = kDefaultTruncation);

struct PredictedDistribution {
  Vector probs;
  bool flagged_uniform = false;  // every score was zero
};

/// Projection scores s_c = <z, p_c / max(||p_c||, eps)>, p_c = U_c U_c^T z,
/// normalized to sum 1.
Vector projection_scores(const Vector& z, const SubspaceSet& bases, double eps = kDefaultEps);
PredictedDistribution predict_distribution(const Vector& z, const SubspaceSet& bases,
                                           double eps = kDefaultEps);

struct ValidationLoss {
  double value = 0.0;
  Matrix grad;           // d value / d z_v with every basis held fixed
  int degenerate = 0;    // samples whose true-class score was zero or clamped
};

/// Mean cross entropy of the projection-score distribution against labels.
/// A sample whose true-class probability is below kProbabilityFloor
/// contributes kValidationCeiling and zero gradient.
ValidationLoss validation_loss(const Matrix& z_v, std::span<const int> labels,
                               const SubspaceSet& bases, double eps = kDefaultEps);

struct LossBreakdown {
  double geometric = 0.0;
  double validation = 0.0;
  double lambda = 0.0;
  double total = 0.0;
};

struct GrsvOptions {
  double lambda = 5.0;
  double eps = kDefaultEps;
  double ratio = kDefaultBasisRatio;
  double trunc = kDefaultTruncation;
};

struct GrsvLoss {
  LossBreakdown loss;
  Matrix grad_g;   // d l_g / d Z^g only; the bases are detached
  Matrix grad_v;   // lambda * d l_v / d Z^v
  SubspaceSet bases;
  int degenerate = 0;
};

/// Builds per-class bases from the geometry features, then combines the OLE
/// loss on the geometry half with lambda times the validation loss.
/// Throws ConfigError for lambda <= 0 or a split that misses a class.
GrsvLoss grsvnet_loss(const BatchSplit& split, const Matrix& features_g,
                      const Matrix& features_v, const GrsvOptions& options);

/// Builds a SubspaceSet with one orthonormal_basis per class of z.
SubspaceSet build_bases(const Matrix& z, std::span<const int> labels, int classes, double ratio);

/// Mean softmax cross entropy over the columns of logits (K x N); gradient
/// (softmax - onehot) / N.
LossAndGrad softmax_xent(const Matrix& logits, std::span<const int> labels);

/// Number of softmax_xent calls made on the calling thread. Diagnostic only.
std::uint64_t softmax_call_count();

}  // namespace grsv

#endif  // GRSV_LOSS_HPP_
