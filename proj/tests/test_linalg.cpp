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

#include <doctest.h>

#include <random>

#include "grsv/error.hpp"
#include "grsv/linalg.hpp"

using namespace grsv;

namespace {

Matrix gaussian(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

void check_invariants(const Matrix& a, const SvdResult& s) {
  const Index r = std::min(a.rows(), a.cols());
  REQUIRE(s.u.cols() == r);
  REQUIRE(s.v.cols() == r);
  CHECK(max_abs(s.u.transpose() * s.u - Matrix::Identity(r, r)) <= 1e-10);
  CHECK(max_abs(s.v.transpose() * s.v - Matrix::Identity(r, r)) <= 1e-10);
  for (Index i = 0; i < r; ++i) {
    CHECK(s.sigma(i) >= 0.0);
    if (i > 0) CHECK(s.sigma(i) <= s.sigma(i - 1));
  }
  const Matrix rec = s.u * s.sigma.asDiagonal() * s.v.transpose();
  CHECK((rec - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
}

}  // namespace

TEST_CASE("svd of identity and diagonal") {
  SvdResult s = svd_compact(Matrix::Identity(3, 3));
  CHECK(max_abs(s.sigma - Vector::Ones(3)) <= 1e-14);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 2, 1;
  s = svd_compact(d);
  CHECK(s.sigma(0) == doctest::Approx(3).epsilon(1e-14));
  CHECK(s.sigma(1) == doctest::Approx(2).epsilon(1e-14));
  CHECK(s.sigma(2) == doctest::Approx(1).epsilon(1e-14));
  // sign convention makes U exactly the identity here
  CHECK(max_abs(s.u - Matrix::Identity(3, 3)) <= 1e-14);
  CHECK(max_abs(s.v - Matrix::Identity(3, 3)) <= 1e-14);
}

TEST_CASE("svd of random matrices against a symmetric eigensolver") {
  std::mt19937_64 rng(5);
  for (auto [r, c] : {std::pair<Index, Index>{20, 7}, {7, 20}, {1, 5}, {5, 1}, {12, 12}}) {
    const Matrix a = gaussian(rng, r, c);
    const SvdResult s = svd_compact(a);
    check_invariants(a, s);
    const Matrix gram = r >= c ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    Vector ref = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse();
    CHECK(max_abs(s.sigma - ref) <= 1e-10 * ref(0));
  }
}

TEST_CASE("svd of rank-deficient and tiny matrices") {
  std::mt19937_64 rng(6);
  const Matrix a = gaussian(rng, 10, 2) * gaussian(rng, 2, 6);
  const SvdResult s = svd_compact(a);
  check_invariants(a, s);
  CHECK(s.sigma(2) <= 1e-12 * s.sigma(0));

  const Matrix z = Matrix::Zero(4, 3);
  const SvdResult sz = svd_compact(z);
  check_invariants(z, sz);
  CHECK(sz.sigma.norm() == 0.0);

  Matrix dup(3, 2);
  dup << 1, 1, 2, 2, 0, 0;
  check_invariants(dup, svd_compact(dup));

  // A column far below rounding level next to ordinary ones, as produced by
  // nearly dead ReLU features.
  Matrix mixed = gaussian(rng, 12, 5);
  mixed.col(3) *= 1e-154;
  const SvdResult sm = svd_compact(mixed);
  check_invariants(mixed, sm);
  CHECK(sm.sigma(4) == 0.0);
  CHECK(sm.sigma(3) > 0.1);

  // Entries whose squares overflow.
  const Matrix huge = 1e200 * gaussian(rng, 6, 4);
  const SvdResult sh = svd_compact(huge);
  CHECK(sh.sigma.allFinite());
  CHECK((sh.u * sh.sigma.asDiagonal() * sh.v.transpose() - huge).stableNorm() <= 1e-10 * huge.stableNorm());
}

TEST_CASE("svd sign convention") {
  std::mt19937_64 rng(7);
  const SvdResult s = svd_compact(gaussian(rng, 6, 4));
  for (Index j = 0; j < s.u.cols(); ++j) {
    Index i = 0;
    while (std::abs(s.u(i, j)) <= 1e-12) ++i;
    CHECK(s.u(i, j) > 0.0);
  }
  // same input, same bits
  std::mt19937_64 again(7);
  const SvdResult t = svd_compact(gaussian(again, 6, 4));
  CHECK(s.u == t.u);
  CHECK(s.sigma == t.sigma);
}

TEST_CASE("svd rejects empty and non-finite input") {
  CHECK_THROWS_AS(svd_compact(Matrix(0, 3)), ContractError);
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_compact(bad), NumericalError);
}

TEST_CASE("nuclear norm examples") {
  CHECK(nuclear_norm(Matrix::Zero(4, 4)) == 0.0);
  CHECK(nuclear_norm(Matrix::Identity(5, 5)) == doctest::Approx(5).epsilon(1e-14));
  Vector u(3), v(4);
  u << 2, 0, 0;
  v << 0, 3, 0, 0;
  std::mt19937_64 rng(8);
  // rotate so the factors are not axis aligned
  const Matrix q3 = Eigen::HouseholderQR<Matrix>(gaussian(rng, 3, 3)).householderQ();
  const Matrix q4 = Eigen::HouseholderQR<Matrix>(gaussian(rng, 4, 4)).householderQ();
  const Matrix outer = (q3 * u) * (q4 * v).transpose();
  CHECK(nuclear_norm(outer) == doctest::Approx(6).epsilon(1e-12));
  CHECK(nuclear_norm(Matrix(0, 0)) == 0.0);
  CHECK(spectral_norm(outer) == doctest::Approx(6).epsilon(1e-12));
}

TEST_CASE("nuclear norm subgradient examples") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 5, 3;
  CHECK(max_abs(nuclear_norm_subgradient(d) - Matrix::Identity(2, 2)) <= 1e-14);
  CHECK(nuclear_norm_subgradient(Matrix::Zero(3, 2)).norm() == 0.0);

  std::mt19937_64 rng(9);
  const Matrix a = gaussian(rng, 10, 2) * gaussian(rng, 2, 6);
  const Matrix g = nuclear_norm_subgradient(a, 1e-6);
  CHECK(spectral_norm(g) <= 1.0 + 1e-8);
  const double h = 1e-3;
  for (int k = 0; k < 20; ++k) {
    const Matrix dir = gaussian(rng, 10, 6);
    const double lhs = nuclear_norm(a + h * dir) - nuclear_norm(a);
    const double rhs = h * (g.array() * dir.array()).sum() - 1e-6;
    CHECK(lhs >= rhs);
  }
}

TEST_CASE("subgradient truncation is relative for large matrices") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1e8, 1.0, 1e-9;
  // 1.0 < 1e-6 * 1e8, so only the leading direction survives
  const Matrix g = nuclear_norm_subgradient(d);
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = 1.0;
  CHECK(max_abs(g - expect) <= 1e-14);
}

TEST_CASE("orthonormal basis examples") {
  Matrix plane(3, 4);
  plane << 1, 0, -1, 0,
           0, 1, 0, -1,
           0, 0, 0, 0;
  const SubspaceBasis b = orthonormal_basis(plane, 0.1, 2);
  CHECK(b.class_id == 2);
  REQUIRE(b.rank() == 2);
  Matrix projector = Matrix::Zero(3, 3);
  projector(0, 0) = projector(1, 1) = 1.0;
  CHECK(max_abs(b.u * b.u.transpose() - projector) <= 1e-12);

  std::mt19937_64 rng(10);
  const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian(rng, 5, 5)).householderQ();
  const Matrix w = Eigen::HouseholderQR<Matrix>(gaussian(rng, 3, 3)).householderQ();
  auto with_sigma = [&](double a, double b2, double c) {
    Vector s(3);
    s << a, b2, c;
    return Matrix(q.leftCols(3) * s.asDiagonal() * w.transpose());
  };
  CHECK(orthonormal_basis(with_sigma(10, 2, 1.5), 0.1).rank() == 3);
  CHECK(orthonormal_basis(with_sigma(10, 2, 0.5), 0.1).rank() == 2);
  CHECK(orthonormal_basis(with_sigma(10, 0.9, 0.5), 0.1).rank() == 1);
  CHECK(orthonormal_basis(Matrix::Zero(4, 3), 0.1).rank() == 0);
  CHECK(orthonormal_basis(1e-11 * Matrix::Ones(4, 3), 0.1).rank() == 0);
  const SubspaceBasis full = orthonormal_basis(gaussian(rng, 6, 3), 0.1);
  CHECK(max_abs(full.u.transpose() * full.u - Matrix::Identity(full.rank(), full.rank())) <= 1e-8);
}

TEST_CASE("projection examples and properties") {
  SubspaceBasis b{1, Matrix::Identity(3, 2)};
  Vector z(3);
  z << 3, 4, 5;
  Vector expect(3);
  expect << 3, 4, 0;
  CHECK(max_abs(project(b, z) - expect) == 0.0);
  CHECK(max_abs(project(b, expect) - expect) <= 1e-10);
  SubspaceBasis empty{1, Matrix(3, 0)};
  CHECK(project(empty, z).norm() == 0.0);
  CHECK_THROWS_AS(project(b, Vector::Ones(4)), ContractError);

  std::mt19937_64 rng(11);
  const SubspaceBasis r = orthonormal_basis(gaussian(rng, 7, 3), 0.01);
  for (int t = 0; t < 10; ++t) {
    const Vector x = gaussian(rng, 7, 1);
    const Vector p = project(r, x);
    CHECK(max_abs(project(r, p) - p) <= 1e-9);
    CHECK(std::abs((x - p).dot(p)) <= 1e-9);
  }
}

TEST_CASE("subadditivity and equality on a few constructed pairs") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = gaussian(rng, 6, 3), b = gaussian(rng, 6, 4);
    CHECK(nuclear_norm(hconcat(a, b)) <= nuclear_norm(a) + nuclear_norm(b) + 1e-8);
  }
  const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian(rng, 6, 6)).householderQ();
  const Matrix a = q.leftCols(2) * gaussian(rng, 2, 3);
  const Matrix b = q.rightCols(4) * gaussian(rng, 4, 5);
  CHECK(std::abs(nuclear_norm(hconcat(a, b)) - nuclear_norm(a) - nuclear_norm(b)) <= 1e-7);
}

TEST_CASE("svd call counter") {
  const auto before = svd_call_count();
  svd_compact(Matrix::Identity(2, 2));
  CHECK(svd_call_count() == before + 1);
}
