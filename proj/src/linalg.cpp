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

#include "grsv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "grsv/error.hpp"

namespace grsv {
namespace {

thread_local std::uint64_t t_svd_calls = 0;

// Columns whose norm falls below this after orthogonalization are replaced by
// an orthonormal completion.
constexpr double kNullColumn = 1e-290;

struct JacobiOutput {
  Matrix w;  // orthogonalized columns, w = a * v
  Matrix v;
};

// Hestenes one-sided Jacobi on a (m x n, m >= n): rotate column pairs until
// every pair is orthogonal to kJacobiTolerance relative to its norms. Columns
// with squared norm below null_sq are left alone; rounding from the large
// columns keeps them from ever meeting the relative test.
JacobiOutput one_sided_jacobi(Matrix w, double null_sq) {
  const Index n = w.cols();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        if (alpha < null_sq || beta < null_sq) continue;
        const double gamma = w.col(p).dot(w.col(q));
        if (std::abs(gamma) <= kJacobiTolerance * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index i = 0; i < w.rows(); ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (Index i = 0; i < n; ++i) {
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) return {std::move(w), std::move(v)};
  }
  const Vector norms = w.colwise().norm();
  std::ostringstream msg;
  msg << "svd: one-sided Jacobi did not converge in " << kJacobiMaxSweeps
      << " sweeps (column norms " << norms.minCoeff() << " to " << norms.maxCoeff() << ")";
  throw NumericalError(msg.str());
}

// Replace the columns flagged in `missing` by an orthonormal basis of the
// complement of the remaining columns, taken from a full QR of those columns.
void complete_orthonormal(Matrix& u, const std::vector<bool>& missing) {
  const Index m = u.rows();
  std::vector<Index> have;
  for (Index j = 0; j < u.cols(); ++j)
    if (!missing[static_cast<size_t>(j)]) have.push_back(j);
  const Index k = static_cast<Index>(have.size());
  Matrix q = Matrix::Identity(m, m);
  if (k > 0) {
    Matrix h(m, k);
    for (Index i = 0; i < k; ++i) h.col(i) = u.col(have[static_cast<size_t>(i)]);
    q = Eigen::HouseholderQR<Matrix>(h).householderQ();
  }
  Index next = k;
  for (Index j = 0; j < u.cols(); ++j) {
    if (!missing[static_cast<size_t>(j)]) continue;
    if (next >= m) throw NumericalError("svd: could not complete orthonormal basis");
    u.col(j) = q.col(next++);
  }
}

SvdResult svd_tall(const Matrix& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  // Columns below machine precision relative to the whole matrix count as null.
  const double null_norm =
      std::max(std::sqrt(kNullColumn), std::numeric_limits<double>::epsilon() * a.norm());
  Matrix q;
  JacobiOutput jac;
  if (m > n) {
    // QR preconditioning: Jacobi then only works on the n x n factor.
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    q = qr.householderQ() * Matrix::Identity(m, n);
    jac = one_sided_jacobi(std::move(r), null_norm * null_norm);
  } else {
    jac = one_sided_jacobi(a, null_norm * null_norm);
  }

  Vector norms(n);
  for (Index j = 0; j < n; ++j) norms(j) = jac.w.col(j).norm();
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return norms(x) > norms(y); });

  SvdResult out;
  out.sigma.resize(n);
  Matrix uw(jac.w.rows(), n);
  out.v.resize(n, n);
  std::vector<bool> missing(static_cast<size_t>(n), false);
  for (Index k = 0; k < n; ++k) {
    const Index j = order[static_cast<size_t>(k)];
    out.sigma(k) = norms(j);
    out.v.col(k) = jac.v.col(j);
    if (norms(j) > null_norm) {
      uw.col(k) = jac.w.col(j) / norms(j);
    } else {
      out.sigma(k) = 0.0;
      uw.col(k).setZero();
      missing[static_cast<size_t>(k)] = true;
    }
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end())
    complete_orthonormal(uw, missing);
  out.u = (m > n) ? Matrix(q * uw) : uw;
  return out;
}

void apply_sign_convention(SvdResult& s) {
  for (Index j = 0; j < s.u.cols(); ++j) {
    for (Index i = 0; i < s.u.rows(); ++i) {
      const double x = s.u(i, j);
      if (std::abs(x) > 1e-12) {
        if (x < 0) {
          s.u.col(j) = -s.u.col(j);
          s.v.col(j) = -s.v.col(j);
        }
        break;
      }
    }
  }
}

}  // namespace

bool all_finite(const Matrix& a) { return a.allFinite(); }

SvdResult svd_compact(const Matrix& a) {
  require(a.rows() >= 1 && a.cols() >= 1, "svd_compact: matrix must be non-empty");
  if (!a.allFinite()) throw NumericalError("svd_compact: matrix has non-finite entries");
  ++t_svd_calls;
  // Power-of-two rescaling is exact and keeps squared column norms in range.
  const double peak = a.cwiseAbs().maxCoeff();
  int exponent = 0;
  if (peak > 0.0) std::frexp(peak, &exponent);
  const Matrix scaled = exponent == 0 ? a : Matrix(a * std::ldexp(1.0, -exponent));
  SvdResult out;
  if (scaled.cols() > scaled.rows()) {
    SvdResult t = svd_tall(scaled.transpose());
    out.u = std::move(t.v);
    out.sigma = std::move(t.sigma);
    out.v = std::move(t.u);
  } else {
    out = svd_tall(scaled);
  }
  if (exponent != 0) out.sigma *= std::ldexp(1.0, exponent);
  apply_sign_convention(out);
  return out;
}

double nuclear_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return svd_compact(a).sigma.sum();
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return svd_compact(a).sigma(0);
}

Matrix nuclear_norm_subgradient(const Matrix& a, double trunc) {
  require(trunc > 0.0, "nuclear_norm_subgradient: trunc must be positive");
  if (a.size() == 0) return Matrix::Zero(a.rows(), a.cols());
  const SvdResult s = svd_compact(a);
  const double threshold = std::max(trunc, trunc * s.sigma(0));
  Index keep = 0;
  while (keep < s.sigma.size() && s.sigma(keep) >= threshold) ++keep;
  if (keep == 0) return Matrix::Zero(a.rows(), a.cols());
  return s.u.leftCols(keep) * s.v.leftCols(keep).transpose();
}

SubspaceBasis orthonormal_basis(const Matrix& z_c, double ratio, int class_id) {
  require(ratio > 0.0 && ratio <= 1.0, "orthonormal_basis: ratio must lie in (0, 1]");
  require(z_c.cols() >= 1, "orthonormal_basis: need at least one column");
  SubspaceBasis basis;
  basis.class_id = class_id;
  const SvdResult s = svd_compact(z_c);
  if (s.sigma(0) < kRankZeroFloor) {
    basis.u = Matrix(z_c.rows(), 0);
    return basis;
  }
  const double threshold = ratio * s.sigma(0);
  Index keep = 0;
  while (keep < s.sigma.size() && s.sigma(keep) >= threshold) ++keep;
  basis.u = s.u.leftCols(keep);
  return basis;
}

Vector project(const SubspaceBasis& basis, const Vector& z) {
  if (z.size() != basis.feature_dim())
    throw ContractError("project: dimension mismatch (z has " + std::to_string(z.size()) +
                        ", basis has " + std::to_string(basis.feature_dim()) + ")");
  if (basis.rank() == 0) return Vector::Zero(z.size());
  return basis.u * (basis.u.transpose() * z);
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() || a.cols() == 0 || b.cols() == 0,
          "hconcat: row counts differ");
  const Index rows = a.cols() > 0 ? a.rows() : b.rows();
  Matrix out(rows, a.cols() + b.cols());
  if (a.cols() > 0) out.leftCols(a.cols()) = a;
  if (b.cols() > 0) out.rightCols(b.cols()) = b;
  return out;
}

std::uint64_t svd_call_count() { return t_svd_calls; }

}  // namespace grsv
