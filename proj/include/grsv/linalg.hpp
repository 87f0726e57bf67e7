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

#ifndef GRSV_LINALG_HPP_
#define GRSV_LINALG_HPP_

#include <cstdint>

#include <Eigen/Dense>

namespace grsv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// One-sided Jacobi parameters.
inline constexpr int kJacobiMaxSweeps = 60;
inline constexpr double kJacobiTolerance = 1e-12;

// Singular values below max(trunc, trunc * sigma_1) are treated as zero by
// nuclear_norm_subgradient.
inline constexpr double kDefaultTruncation = 1e-6;

// orthonormal_basis keeps sigma_i >= ratio * sigma_1.
inline constexpr double kDefaultBasisRatio = 0.1;

// A class whose largest singular value falls below this is rank 0.
inline constexpr double kRankZeroFloor = 1e-10;

/// Compact SVD: a = u * diag(sigma) * v^T with r = min(rows, cols),
/// sigma non-increasing, u and v with orthonormal columns. The first entry of
/// each column of u that is not (numerically) zero is nonnegative.
struct SvdResult {
  Matrix u;
  Vector sigma;
  Matrix v;
};

/// Orthonormal basis of one class subspace. rank() == 0 is the degenerate
/// "all features vanish" class.
struct SubspaceBasis {
  int class_id = 0;
  Matrix u;  // feature_dim x k

  Index rank() const { return u.cols(); }
  Index feature_dim() const { return u.rows(); }
};

bool all_finite(const Matrix& a);

/// Throws ContractError on an empty matrix and NumericalError on non-finite
/// input or when Jacobi fails to converge within kJacobiMaxSweeps. Singular
/// values below machine epsilon times the Frobenius norm are returned as 0.
SvdResult svd_compact(const Matrix& a);

/// Sum of singular values. The empty matrix has norm 0.
double nuclear_norm(const Matrix& a);

/// Largest singular value.
double spectral_norm(const Matrix& a);

/// Canonical subgradient U1 V1^T of the nuclear norm, where U1, V1 span the
/// singular directions with sigma_i >= max(trunc, trunc * sigma_1).
Matrix nuclear_norm_subgradient(const Matrix& a, double trunc = kDefaultTruncation);

/// Left singular vectors of z_c whose singular values are at least
/// ratio * sigma_1.
SubspaceBasis orthonormal_basis(const Matrix& z_c, double ratio = kDefaultBasisRatio,
                                int class_id = 0);

/// u u^T z. Zero for a rank-0 basis.
Vector project(const SubspaceBasis& basis, const Vector& z);

/// Horizontal concatenation [a, b].
Matrix hconcat(const Matrix& a, const Matrix& b);

/// Number of svd_compact calls made on the calling thread. Diagnostic only.
std::uint64_t svd_call_count();

}  // namespace grsv

#endif  // GRSV_LINALG_HPP_
