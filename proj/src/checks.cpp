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

#include "grsv/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "grsv/batch.hpp"
#include "grsv/config.hpp"
#include "grsv/data.hpp"
#include "grsv/loss.hpp"
#include "grsv/net.hpp"

namespace grsv::checks {
namespace {

using Clock = std::chrono::steady_clock;

Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

Matrix random_orthonormal(std::mt19937_64& rng, Index rows, Index cols) {
  const Matrix g = gaussian(rng, rows, rows);
  return Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(rows, cols);
}

Index uniform_index(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

template <typename F>
CheckResult timed(const std::string& name, F&& body) {
  CheckResult r;
  r.name = name;
  const auto t0 = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

}  // namespace

Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                         double step) {
  Matrix probe = x;
  Matrix g(x.rows(), x.cols());
  for (Index k = 0; k < x.size(); ++k) {
    const double orig = probe.data()[k];
    probe.data()[k] = orig + step;
    const double up = f(probe);
    probe.data()[k] = orig - step;
    const double down = f(probe);
    probe.data()[k] = orig;
    g.data()[k] = (up - down) / (2.0 * step);
  }
  return g;
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = numeric.cwiseAbs().maxCoeff();
  const double diff = (analytic - numeric).cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

CheckResult nuclear_norm_concatenation(int random_pairs, int orthogonal_pairs, int coupled_pairs,
                                       std::uint64_t seed) {
  return timed("nuclear norm concatenation", [&](CheckResult& r) {
    auto rng = seeded_engine(seed, 11);
    double worst_excess = -1e300;
    for (int t = 0; t < random_pairs; ++t) {
      const Index m = uniform_index(rng, 1, 12);
      const Matrix a = gaussian(rng, m, uniform_index(rng, 1, 8));
      const Matrix b = gaussian(rng, m, uniform_index(rng, 1, 8));
      worst_excess = std::max(worst_excess, nuclear_norm(hconcat(a, b)) - nuclear_norm(a) - nuclear_norm(b));
    }
    double worst_equality = 0.0;
    for (int t = 0; t < orthogonal_pairs; ++t) {
      const Index m = uniform_index(rng, 2, 12);
      const Index split = uniform_index(rng, 1, m - 1);
      const Matrix q = random_orthonormal(rng, m, m);
      const Matrix a = q.leftCols(split) * gaussian(rng, split, uniform_index(rng, 1, 8));
      const Matrix b = q.rightCols(m - split) * gaussian(rng, m - split, uniform_index(rng, 1, 8));
      worst_equality = std::max(
          worst_equality, std::abs(nuclear_norm(hconcat(a, b)) - nuclear_norm(a) - nuclear_norm(b)));
    }
    double smallest_gap = 1e300;
    for (int t = 0; t < coupled_pairs; ++t) {
      Matrix a, b;
      do {
        const Index m = uniform_index(rng, 2, 12);
        a = gaussian(rng, m, uniform_index(rng, 1, 8));
        b = gaussian(rng, m, uniform_index(rng, 1, 8));
      } while ((a.transpose() * b).norm() < 0.1);
      smallest_gap = std::min(smallest_gap, nuclear_norm(a) + nuclear_norm(b) - nuclear_norm(hconcat(a, b)));
    }
    const bool sub_ok = random_pairs == 0 || worst_excess <= 1e-8;
    const bool eq_ok = worst_equality <= 1e-7;
    const bool gap_ok = coupled_pairs == 0 || smallest_gap > 1e-6;
    r.passed = sub_ok && eq_ok && gap_ok;
    std::ostringstream os;
    os << "max excess " << worst_excess << " (<= 1e-8), max |equality gap| " << worst_equality
       << " (<= 1e-7), min coupled gap " << smallest_gap << " (> 1e-6)";
    r.detail = os.str();
  });
}

CheckResult nuclear_norm_subgradients(int full_rank_points, int deficient_points, std::uint64_t seed) {
  return timed("nuclear norm subgradients", [&](CheckResult& r) {
    auto rng = seeded_engine(seed, 12);
    double worst_fd = 0.0;
    for (int t = 0; t < full_rank_points; ++t) {
      Matrix a;
      do {
        const Index m = uniform_index(rng, 2, 12);
        a = gaussian(rng, m, uniform_index(rng, 1, std::min<Index>(m, 8)));
      } while (svd_compact(a).sigma.minCoeff() < 0.05);
      const Matrix g = nuclear_norm_subgradient(a);
      const Matrix fd = finite_difference([](const Matrix& x) { return nuclear_norm(x); }, a, 1e-5);
      worst_fd = std::max(worst_fd, relative_error(g, fd));
    }

    double worst_violation = -1e300;
    double worst_spectral = 0.0;
    double worst_constant = 0.0;
    constexpr double kNoise = 1e-10;
    constexpr double kStep = 1e-3;
    for (int t = 0; t < deficient_points; ++t) {
      const Index m = uniform_index(rng, 3, 12);
      const Index n = uniform_index(rng, 2, std::min<Index>(m, 8));
      const Index s = uniform_index(rng, 1, n - 1);
      Vector sigma(s);
      std::uniform_real_distribution<double> sv(0.5, 3.0);
      for (Index i = 0; i < s; ++i) sigma(i) = sv(rng);
      const Matrix a = random_orthonormal(rng, m, s) * sigma.asDiagonal() *
                       random_orthonormal(rng, n, s).transpose();
      const double eta = sigma.minCoeff();
      const Matrix g = nuclear_norm_subgradient(a);
      worst_spectral = std::max(worst_spectral, spectral_norm(g));
      const double base = nuclear_norm(a);
      for (int d = 0; d < 20; ++d) {
        Matrix dir = gaussian(rng, m, n);
        dir /= dir.norm();
        const double lhs = nuclear_norm(a + kStep * dir) - base;
        const double rhs = kStep * (g.array() * dir.array()).sum() - 1e-6;
        worst_violation = std::max(worst_violation, rhs - lhs);
      }
      Matrix noise = gaussian(rng, m, n);
      noise *= kNoise / noise.norm();
      const double moved = spectral_norm(nuclear_norm_subgradient(a + noise) - g);
      worst_constant = std::max(worst_constant, moved * eta / kNoise);
    }
    const bool fd_ok = worst_fd <= 1e-4;
    const bool ineq_ok = deficient_points == 0 || worst_violation <= 0.0;
    const bool norm_ok = worst_spectral <= 1.0 + 1e-8;
    const bool stable_ok = worst_constant <= 1e3;
    r.passed = fd_ok && ineq_ok && norm_ok && stable_ok;
    std::ostringstream os;
    os << "full-rank fd rel err " << worst_fd << " (<= 1e-4), inequality slack violation "
       << std::max(0.0, worst_violation) << ", max ||G||_2 " << worst_spectral
       << ", stability constant " << worst_constant << " (<= 1e3)";
    r.detail = os.str();
  });
}

namespace {

struct GradientFixture {
  Matrix x;
  std::vector<int> y;
  BatchSplit split;
};

GradientFixture gradient_fixture(std::mt19937_64& rng) {
  GradientFixture f;
  f.x = gaussian(rng, 5, 12);
  f.y = {1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3};
  LabeledBatch all{f.x, f.y, {}, 3};
  all.ids = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  const std::vector<Index> g{0, 1, 4, 5, 8, 9}, v{2, 3, 6, 7, 10, 11};
  f.split = make_batch_split(all.select(g), all.select(v));
  return f;
}

double min_singular_value(const Matrix& z) { return svd_compact(z).sigma.minCoeff(); }

bool comfortably_differentiable(const MlpParams& p, Mode mode, const GradientFixture& f) {
  for (const Matrix* x : {&f.x}) {
    const ForwardResult fr = forward(p, *x);
    for (size_t l = 0; l + 1 < fr.cache.preactivations.size(); ++l)
      if (fr.cache.preactivations[l].cwiseAbs().minCoeff() < 1e-3) return false;
    if (mode == Mode::kSoftmaxOle) {
      const Matrix& h = fr.penultimate();
      if (min_singular_value(h) < 1e-2) return false;
      for (const Matrix& g : group_by_class(h, f.y, 3))
        if (min_singular_value(g) < 1e-2) return false;
    }
  }
  if (mode == Mode::kOleGrsvnet) {
    const Matrix zg = forward(p, f.split.geometry.x).features;
    if (min_singular_value(zg) < 1e-2) return false;
    for (const Matrix& g : group_by_class(zg, f.split.geometry.y, 3))
      if (min_singular_value(g) < 1e-2) return false;
  }
  return true;
}

}  // namespace

CheckResult training_gradients(int points_per_mode, std::uint64_t seed) {
  return timed("training gradients", [&](CheckResult& r) {
    constexpr double kLambda = 5.0, kOleWeight = 0.5, kDecay = 0.1, kStep = 1e-5;
    auto rng = seeded_engine(seed, 13);
    const GradientFixture f = gradient_fixture(rng);
    std::ostringstream os;
    r.passed = true;
    for (Mode mode : {Mode::kSoftmax, Mode::kSoftmaxWd, Mode::kSoftmaxOle, Mode::kOleGrsvnet}) {
      const Index out = uses_softmax_head(mode) ? 3 : 16;
      const std::vector<Index> dims{5, 16, 16, 16, out};
      double worst = 0.0;
      int accepted = 0;
      for (int attempt = 0; accepted < points_per_mode && attempt < 200 * points_per_mode; ++attempt) {
        MlpParams p = xavier_init(dims, rng());
        std::normal_distribution<double> bias(0.0, 0.3);
        for (auto& l : p.layers)
          for (Index i = 0; i < l.bias.size(); ++i) l.bias(i) = bias(rng);
        if (!comfortably_differentiable(p, mode, f)) continue;
        ++accepted;

        std::function<double(const MlpParams&)> objective;
        MlpParams analytic;
        if (mode == Mode::kOleGrsvnet) {
          const ForwardResult fg = forward(p, f.split.geometry.x);
          const ForwardResult fv = forward(p, f.split.validation.x);
          const GrsvLoss loss = grsvnet_loss(f.split, fg.features, fv.features, {kLambda});
          analytic = backward(p, fg.cache, loss.grad_g);
          analytic += backward(p, fv.cache, loss.grad_v);
          const SubspaceSet frozen = loss.bases;
          objective = [&f, frozen](const MlpParams& q) {
            const Matrix zg = forward(q, f.split.geometry.x).features;
            const Matrix zv = forward(q, f.split.validation.x).features;
            return ole_loss(zg, f.split.geometry.y).value +
                   kLambda * validation_loss(zv, f.split.validation.y, frozen).value;
          };
        } else {
          const ForwardResult fr = forward(p, f.x);
          const LossAndGrad xent = softmax_xent(fr.features, f.y);
          if (mode == Mode::kSoftmaxOle) {
            LossAndGrad ole = ole_loss(fr.penultimate(), f.y);
            ole.grad *= kOleWeight;
            analytic = backward(p, fr.cache, xent.grad, &ole.grad);
          } else {
            analytic = backward(p, fr.cache, xent.grad);
          }
          if (mode == Mode::kSoftmaxWd) {
            MlpParams decay = p;
            decay *= kDecay;
            analytic += decay;
          }
          objective = [&f, mode](const MlpParams& q) {
            const ForwardResult fq = forward(q, f.x);
            double v = softmax_xent(fq.features, f.y).value;
            if (mode == Mode::kSoftmaxOle) v += kOleWeight * ole_loss(fq.penultimate(), f.y).value;
            if (mode == Mode::kSoftmaxWd) v += 0.5 * kDecay * q.squared_norm();
            return v;
          };
        }

        const size_t n = p.parameter_count();
        Matrix a(static_cast<Index>(n), 1), num(static_cast<Index>(n), 1);
        MlpParams probe = p;
        for (size_t k = 0; k < n; ++k) {
          const double orig = probe.parameter(k);
          probe.parameter(k) = orig + kStep;
          const double up = objective(probe);
          probe.parameter(k) = orig - kStep;
          const double down = objective(probe);
          probe.parameter(k) = orig;
          num(static_cast<Index>(k)) = (up - down) / (2.0 * kStep);
          a(static_cast<Index>(k)) = analytic.parameter(k);
        }
        worst = std::max(worst, relative_error(a, num));
      }
      const bool ok = accepted == points_per_mode && worst <= 1e-3;
      r.passed = r.passed && ok;
      os << mode_name(mode) << " " << worst << (accepted == points_per_mode ? "" : " (too few points)")
         << "; ";
    }
    r.detail = "max rel err per mode (<= 1e-3): " + os.str().substr(0, os.str().size() - 2);
  });
}

CheckResult optimality_fixture() {
  return timed("optimality fixture", [&](CheckResult& r) {
    // Class c lives in span{e_c, e_{c+3}} of R^7; e_7 belongs to no class.
    constexpr int K = 3;
    constexpr Index F = 7;
    auto rng = seeded_engine(7, 14);
    std::uniform_real_distribution<double> coef(0.5, 2.0);
    auto in_class = [&](int c) {
      Vector z = Vector::Zero(F);
      z(c - 1) = coef(rng);
      z(c + 2) = coef(rng);
      return z;
    };
    LabeledBatch g, v;
    g.classes = v.classes = K;
    g.x.resize(F, 3 * K);
    v.x.resize(F, 2 * K);
    for (int c = 1; c <= K; ++c) {
      for (int k = 0; k < 3; ++k) {
        g.x.col(g.size()) = in_class(c);
        g.y.push_back(c);
        g.ids.push_back(g.size() - 1);
      }
      for (int k = 0; k < 2; ++k) {
        v.x.col(v.size()) = in_class(c);
        v.y.push_back(c);
        v.ids.push_back(v.size() - 1);
      }
    }
    const BatchSplit split = make_batch_split(g, v);
    const GrsvOptions opts{5.0};
    const double optimum = grsvnet_loss(split, g.x, v.x, opts).loss.total;

    Matrix moved = v.x;
    Vector dir = Vector::Zero(F);
    dir(1) = 1.0;  // toward class 2
    moved.col(0) += 0.1 * moved.col(0).norm() * dir;
    const double perturbed = grsvnet_loss(split, g.x, moved, opts).loss.total;

    const GrsvLoss zero =
        grsvnet_loss(split, Matrix::Zero(F, g.size()), Matrix::Zero(F, v.size()), opts);
    const bool zero_ok = zero.degenerate == v.size() &&
                         std::abs(zero.loss.validation - kValidationCeiling) < 1e-12;
    r.passed = optimum <= 1e-6 && perturbed > 1e-3 && zero_ok;
    std::ostringstream os;
    os << "optimum " << optimum << " (<= 1e-6), perturbed " << perturbed
       << " (> 1e-3), zero features degenerate " << zero.degenerate << "/" << v.size();
    r.detail = os.str();
  });
}

std::vector<CheckResult> run_selftest(const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> out;
  auto add = [&](CheckResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  add(nuclear_norm_concatenation(1000, 200, 200, 1));
  add(nuclear_norm_subgradients(100, 50, 2));
  add(training_gradients(5, 3));
  add(optimality_fixture());
  return out;
}

}  // namespace grsv::checks
