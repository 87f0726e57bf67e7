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

#include "grsv/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grsv/error.hpp"

namespace grsv {
namespace {

thread_local std::uint64_t t_softmax_calls = 0;

}  // namespace

LossAndGrad ole_loss(const Matrix& z, std::span<const int> labels, double trunc) {
  require(static_cast<Index>(labels.size()) == z.cols(), "ole_loss: one label per column required");
  int classes = 0;
  for (int y : labels) {
    require(y >= 1, "ole_loss: labels start at 1");
    classes = std::max(classes, y);
  }
  LossAndGrad out;
  out.grad = Matrix::Zero(z.rows(), z.cols());
  if (z.cols() == 0) return out;

  std::vector<std::vector<Index>> members(static_cast<size_t>(classes));
  for (Index j = 0; j < z.cols(); ++j) members[static_cast<size_t>(labels[j] - 1)].push_back(j);

  double per_class = 0.0;
  for (const auto& cols : members) {
    if (cols.empty()) continue;
    Matrix z_c(z.rows(), static_cast<Index>(cols.size()));
    for (size_t k = 0; k < cols.size(); ++k) z_c.col(static_cast<Index>(k)) = z.col(cols[k]);
    const SvdResult s = svd_compact(z_c);
    per_class += s.sigma.sum();
    const double threshold = std::max(trunc, trunc * s.sigma(0));
    Index keep = 0;
    while (keep < s.sigma.size() && s.sigma(keep) >= threshold) ++keep;
    if (keep == 0) continue;
    const Matrix g = s.u.leftCols(keep) * s.v.leftCols(keep).transpose();
    for (size_t k = 0; k < cols.size(); ++k) out.grad.col(cols[k]) += g.col(static_cast<Index>(k));
  }
  const SvdResult whole = svd_compact(z);
  const double threshold = std::max(trunc, trunc * whole.sigma(0));
  Index keep = 0;
  while (keep < whole.sigma.size() && whole.sigma(keep) >= threshold) ++keep;
  if (keep > 0) out.grad -= whole.u.leftCols(keep) * whole.v.leftCols(keep).transpose();
  out.value = per_class - whole.sigma.sum();
  return out;
}

namespace {

// Score of one class and its gradient with respect to z (basis fixed).
struct ClassScore {
  double score = 0.0;
  Vector grad;
};

ClassScore class_score(const Vector& z, const SubspaceBasis& basis, double eps) {
  ClassScore cs;
  if (basis.rank() == 0) {
    cs.grad = Vector::Zero(z.size());
    return cs;
  }
  const Vector p = project(basis, z);
  const double pn = p.norm();
  if (pn >= eps) {
    cs.score = z.dot(p) / pn;
    cs.grad = p / pn;
  } else {
    // <z, p> / eps = ||p||^2 / eps
    cs.score = z.dot(p) / eps;
    cs.grad = (2.0 / eps) * p;
  }
  return cs;
}

void check_set(const Vector& z, const SubspaceSet& bases, double eps) {
  require(eps > 0.0, "eps must be positive");
  require(bases.class_count() >= 1, "subspace set is empty");
  require(z.size() == bases.feature_dim, "feature dimension does not match subspace set");
}

}  // namespace

Vector projection_scores(const Vector& z, const SubspaceSet& bases, double eps) {
  check_set(z, bases, eps);
  Vector s(bases.class_count());
  for (int c = 0; c < bases.class_count(); ++c)
    s(c) = class_score(z, bases.bases[static_cast<size_t>(c)], eps).score;
  return s;
}

PredictedDistribution predict_distribution(const Vector& z, const SubspaceSet& bases, double eps) {
  const Vector s = projection_scores(z, bases, eps);
  PredictedDistribution d;
  const double total = s.sum();
  if (total <= 0.0) {
    d.probs = Vector::Constant(s.size(), 1.0 / static_cast<double>(s.size()));
    d.flagged_uniform = true;
  } else {
    d.probs = s / total;
  }
  return d;
}

ValidationLoss validation_loss(const Matrix& z_v, std::span<const int> labels,
                               const SubspaceSet& bases, double eps) {
  require(static_cast<Index>(labels.size()) == z_v.cols(),
          "validation_loss: one label per column required");
  require(z_v.cols() >= 1, "validation_loss: empty validation batch");
  ValidationLoss out;
  out.grad = Matrix::Zero(z_v.rows(), z_v.cols());
  const double inv_n = 1.0 / static_cast<double>(z_v.cols());
  const int K = bases.class_count();
  std::vector<ClassScore> scores(static_cast<size_t>(K));
  for (Index j = 0; j < z_v.cols(); ++j) {
    const int y = labels[static_cast<size_t>(j)];
    require(y >= 1 && y <= K, "validation_loss: label outside the subspace set");
    const Vector z = z_v.col(j);
    check_set(z, bases, eps);
    double total = 0.0;
    for (int c = 0; c < K; ++c) {
      scores[static_cast<size_t>(c)] = class_score(z, bases.bases[static_cast<size_t>(c)], eps);
      total += scores[static_cast<size_t>(c)].score;
    }
    const double s_y = scores[static_cast<size_t>(y - 1)].score;
    if (!(total > 0.0) || s_y / total < kProbabilityFloor) {
      out.value += kValidationCeiling * inv_n;
      ++out.degenerate;
      continue;
    }
    out.value += (std::log(total) - std::log(s_y)) * inv_n;
    Vector g = -scores[static_cast<size_t>(y - 1)].grad / s_y;
    for (const auto& cs : scores) g += cs.grad / total;
    out.grad.col(j) = g * inv_n;
  }
  return out;
}

SubspaceSet build_bases(const Matrix& z, std::span<const int> labels, int classes, double ratio) {
  const std::vector<Matrix> groups = group_by_class(z, labels, classes);
  SubspaceSet set;
  set.feature_dim = z.rows();
  for (int c = 1; c <= classes; ++c) {
    const Matrix& z_c = groups[static_cast<size_t>(c - 1)];
    set.built_from.push_back(z_c.cols());
    if (z_c.cols() == 0) {
      set.bases.push_back({c, Matrix(z.rows(), 0)});
    } else {
      set.bases.push_back(orthonormal_basis(z_c, ratio, c));
    }
  }
  return set;
}

GrsvLoss grsvnet_loss(const BatchSplit& split, const Matrix& features_g, const Matrix& features_v,
                      const GrsvOptions& options) {
  if (!(options.lambda > 0.0)) throw ConfigError("grsvnet_loss: lambda must be positive");
  if (!(options.eps > 0.0)) throw ConfigError("grsvnet_loss: eps must be positive");
  check_batch_split(split);
  require(features_g.cols() == split.geometry.size() && features_v.cols() == split.validation.size(),
          "grsvnet_loss: feature columns do not match the split");
  require(features_g.rows() == features_v.rows(), "grsvnet_loss: feature dimensions differ");

  GrsvLoss out;
  const int K = split.geometry.classes;
  out.bases = build_bases(features_g, split.geometry.y, K, options.ratio);
  LossAndGrad lg = ole_loss(features_g, split.geometry.y, options.trunc);
  ValidationLoss lv = validation_loss(features_v, split.validation.y, out.bases, options.eps);
  out.loss.geometric = lg.value;
  out.loss.validation = lv.value;
  out.loss.lambda = options.lambda;
  out.loss.total = lg.value + options.lambda * lv.value;
  out.grad_g = std::move(lg.grad);
  out.grad_v = options.lambda * lv.grad;
  out.degenerate = lv.degenerate;
  return out;
}

std::uint64_t softmax_call_count() { return t_softmax_calls; }

LossAndGrad softmax_xent(const Matrix& logits, std::span<const int> labels) {
  ++t_softmax_calls;
  require(static_cast<Index>(labels.size()) == logits.cols(),
          "softmax_xent: one label per column required");
  require(logits.cols() >= 1, "softmax_xent: empty batch");
  LossAndGrad out;
  out.grad.resize(logits.rows(), logits.cols());
  const double inv_n = 1.0 / static_cast<double>(logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    const int y = labels[static_cast<size_t>(j)];
    require(y >= 1 && y <= logits.rows(), "softmax_xent: label outside logit range");
    const double m = logits.col(j).maxCoeff();
    const Vector e = (logits.col(j).array() - m).exp().matrix();
    const double z = e.sum();
    out.value += (std::log(z) + m - logits(y - 1, j)) * inv_n;
    out.grad.col(j) = e / z;
    out.grad(y - 1, j) -= 1.0;
    out.grad.col(j) *= inv_n;
  }
  return out;
}

}  // namespace grsv
