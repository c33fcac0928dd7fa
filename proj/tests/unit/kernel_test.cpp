#include "ddrbf/kernel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ddrbf/errors.hpp"
#include "test_util.hpp"

namespace ddrbf {
namespace {

using testing::random_spd;
using testing::random_vec;

Mat rotation(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

TEST(KernelSpec, RejectsAsymmetricAndIndefinite) {
  Mat asym(2, 2);
  asym << 1.0, 0.1, 0.1 + 1e-9, 1.0;
  EXPECT_THROW(KernelSpec{asym}, ArgumentError);
  Mat indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(KernelSpec{indefinite}, ArgumentError);
  EXPECT_THROW(KernelSpec{Mat(2, 3)}, ArgumentError);
  EXPECT_THROW(KernelSpec::isotropic(2, 0.0), ArgumentError);
}

TEST(KernelSpec, EigendecompositionIsOrthogonalAndDeterministic) {
  std::mt19937_64 rng(7);
  for (int n : {1, 2, 3, 5}) {
    for (int rep = 0; rep < 20; ++rep) {
      const KernelSpec spec(random_spd(rng, n));
      const Mat& q = spec.eig_q();
      EXPECT_LT((q * q.transpose() - Mat::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
      const Mat recon = q * spec.eig_d().asDiagonal() * q.transpose();
      EXPECT_LT((recon - spec.inv_covariance()).norm() / spec.inv_covariance().norm(), 1e-10);
      EXPECT_NEAR(q.determinant(), 1.0, 1e-10);
      EXPECT_GT(spec.eig_d().minCoeff(), 0.0);
      const KernelSpec again(spec.covariance());
      EXPECT_EQ(again.eig_q(), q);
      EXPECT_EQ(again.eig_d(), spec.eig_d());
    }
  }
}

TEST(KernelEval, Examples) {
  std::mt19937_64 rng(1);
  for (int n : {1, 2, 4}) {
    const KernelSpec spec(random_spd(rng, n));
    const Vec c = random_vec(rng, n);
    EXPECT_EQ(kernel_eval(spec, c, c), 1.0);
  }
  const KernelSpec unit = KernelSpec::isotropic(1, 1.0);
  EXPECT_NEAR(kernel_eval(unit, Vec::Constant(1, 1.0), Vec::Zero(1)), 0.6065306597, 1e-10);

  Mat sigma = Mat::Zero(2, 2);
  sigma.diagonal() << 4.0, 1.0;
  const KernelSpec diag(sigma);
  const Vec x = (Vec(2) << 2.0, 1.0).finished();
  // Quadratic form by hand: 2²/4 + 1²/1 = 2; cross-checked with an LU solve.
  const double quad = x.dot(sigma.lu().solve(x));
  EXPECT_NEAR(quad, 2.0, 1e-15);
  EXPECT_NEAR(kernel_eval(diag, x, Vec::Zero(2)), std::exp(-0.5 * quad), 1e-15);
  EXPECT_NEAR(kernel_eval(diag, x, Vec::Zero(2)), 0.3678794412, 1e-10);

  EXPECT_THROW(kernel_eval(diag, Vec::Zero(3), Vec::Zero(2)), ArgumentError);
}

TEST(KernelEval, SymmetricAndInRange) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 500; ++rep) {
    const int n = 1 + rep % 4;
    const KernelSpec spec(random_spd(rng, n, 0.1, 2.0));
    const Vec x = random_vec(rng, n, -5, 5), c = random_vec(rng, n, -5, 5);
    const double k = kernel_eval(spec, x, c);
    EXPECT_EQ(k, kernel_eval(spec, c, x));
    EXPECT_GE(k, 0.0);
    EXPECT_LE(k, 1.0);
  }
}

TEST(KernelGrad, Examples) {
  std::mt19937_64 rng(3);
  const KernelSpec spec(random_spd(rng, 3));
  const Vec c = random_vec(rng, 3);
  EXPECT_EQ(kernel_grad(spec, c, c), Vec::Zero(3));
  const KernelSpec unit = KernelSpec::isotropic(1, 1.0);
  EXPECT_NEAR(kernel_grad(unit, Vec::Constant(1, 1.0), Vec::Zero(1))(0), -0.6065306597, 1e-10);
  EXPECT_THROW(kernel_grad(unit, Vec::Zero(2), Vec::Zero(1)), ArgumentError);
}

TEST(KernelGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const int dims[] = {1, 2, 3, 5};
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = dims[rep % 4];
    const KernelSpec spec(random_spd(rng, n));
    const Vec x = random_vec(rng, n), c = random_vec(rng, n);
    const Vec fd = testing::fd_gradient([&](const Vec& p) { return kernel_eval(spec, p, c); }, x);
    EXPECT_LT((kernel_grad(spec, x, c) - fd).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(PartialDerivativeBound, OneDimensional) {
  EXPECT_NEAR(partial_derivative_bound(KernelSpec::isotropic(1, 1.0), 0), 0.6065306597, 1e-10);
  const double sigma = 0.5;
  const KernelSpec narrow = KernelSpec::isotropic(1, sigma);
  // Analytic maximum of |d/dx exp(-x²/(2σ²))| is e^{-1/2}/σ at x = ±σ;
  // confirm with a dense grid.
  double grid_max = 0.0;
  for (int i = -200000; i <= 200000; ++i) {
    const double x = i * 1e-5;
    grid_max = std::max(grid_max, std::abs(x / (sigma * sigma)) * std::exp(-x * x / (2 * sigma * sigma)));
  }
  EXPECT_NEAR(grid_max, std::exp(-0.5) / sigma, 1e-9);
  EXPECT_NEAR(partial_derivative_bound(narrow, 0), 1.2130613194, 1e-10);
  EXPECT_THROW(partial_derivative_bound(narrow, 1), ArgumentError);
  EXPECT_THROW(partial_derivative_bound(narrow, -1), ArgumentError);
}

TEST(PartialDerivativeBound, SoundOnSamples) {
  std::mt19937_64 rng(5);
  const KernelSpec iso = KernelSpec::isotropic(2, 1.0);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(partial_derivative_bound(iso, j), 0.6065306597, 1e-10);

  Vec sampled = Vec::Zero(2);
  const Vec c = Vec::Zero(2);
  for (int s = 0; s < 1000000; ++s) {
    sampled = sampled.cwiseMax(kernel_grad(iso, random_vec(rng, 2, -6, 6), c).cwiseAbs());
  }
  for (int j = 0; j < 2; ++j) {
    EXPECT_LE(sampled(j), partial_derivative_bound(iso, j) * (1 + 1e-9));
    EXPECT_GT(sampled(j), 0.99 * partial_derivative_bound(iso, j));
  }
}

TEST(PartialDerivativeBound, SoundForRandomCovariances) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 1 + rep % 3;
    const KernelSpec spec(random_spd(rng, n));
    const Vec c = random_vec(rng, n);
    const double reach = 6.0 * std::sqrt(spec.covariance().diagonal().maxCoeff());
    Vec sampled = Vec::Zero(n);
    for (int s = 0; s < 25000; ++s) {
      const Vec x = c + random_vec(rng, n, -reach, reach);
      sampled = sampled.cwiseMax(kernel_grad(spec, x, c).cwiseAbs());
    }
    for (int j = 0; j < n; ++j) EXPECT_LE(sampled(j), partial_derivative_bound(spec, j) * (1 + 1e-9));
  }
}

TEST(WeightBound, Examples) {
  EXPECT_NEAR(weight_bound(1, 1, KernelSpec::isotropic(1, 1.0), 0), 1.6487212707, 1e-10);
  const KernelSpec quarter(0.25 * Mat::Identity(2, 2));
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(weight_bound(2, 10, quarter, j), 0.0412180318, 1e-10);
  }
  EXPECT_THROW(weight_bound(2, 0, quarter, 0), ArgumentError);
  EXPECT_THROW(weight_bound(3, 1, quarter, 0), ArgumentError);
}

TEST(WeightBound, ProductNeverExceedsOne) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 2000; ++rep) {
    const int n = 1 + rep % 5;
    const int count = 1 + static_cast<int>(uniform_index(rng, 60));
    const KernelSpec spec(random_spd(rng, n, 0.05, 3.0));
    for (int j = 0; j < n; ++j) {
      const double rho = weight_bound(n, count, spec, j);
      EXPECT_LE(static_cast<double>(n) * static_cast<double>(count) * rho *
                    partial_derivative_bound(spec, j),
                1.0);
    }
  }
}

TEST(WeightBound, MonotoneAndScaling) {
  const KernelSpec spec = KernelSpec::isotropic(3, 0.7);
  for (int count = 1; count < 30; ++count) {
    EXPECT_GT(weight_bound(3, count, spec, 0), weight_bound(3, count + 1, spec, 0));
  }
  for (int n = 1; n < 5; ++n) {
    const KernelSpec a = KernelSpec::isotropic(n, 0.7), b = KernelSpec::isotropic(n + 1, 0.7);
    EXPECT_GT(weight_bound(n, 10, a, 0), weight_bound(n + 1, 10, b, 0));
  }
  for (double s : {0.5, 2.0, 3.0}) {
    const KernelSpec scaled(s * s * spec.covariance());
    EXPECT_NEAR(weight_bound(3, 10, scaled, 1), s * weight_bound(3, 10, spec, 1), 1e-12);
  }
}

TEST(WeightBound, RotatedAnisotropicLayerKeepsPositiveDeterminant) {
  // Σ⁻¹ = Q D Qᵀ with Q a 30° rotation and D = diag(1, 4).
  const Mat q = rotation(std::numbers::pi / 6);
  const Mat prec = q * Vec((Vec(2) << 1.0, 4.0).finished()).asDiagonal() * q.transpose();
  Mat sigma = prec.inverse();
  sigma = 0.5 * (sigma + sigma.transpose());
  const KernelSpec spec(sigma);
  // B_j is invariant to the ordering and signs of the eigenvectors.
  for (int j = 0; j < 2; ++j) {
    const double expected = std::exp(-0.5) * (std::abs(q(j, 0)) * 1.0 + std::abs(q(j, 1)) * 2.0);
    EXPECT_NEAR(partial_derivative_bound(spec, j), expected, 1e-12);
  }
  std::mt19937_64 rng(9);
  constexpr int kNeurons = 5;
  for (int net = 0; net < 100; ++net) {
    Mat centers(kNeurons, 2);
    for (int i = 0; i < kNeurons; ++i) centers.row(i) = random_vec(rng, 2).transpose();
    Mat w(2, kNeurons);
    for (int j = 0; j < 2; ++j) {
      const double rho = weight_bound(2, kNeurons, spec, j);
      for (int i = 0; i < kNeurons; ++i) w(j, i) = uniform(rng, -rho, rho);
    }
    double min_det = 1e300;
    for (int s = 0; s < 1000; ++s) {
      const Vec x = random_vec(rng, 2, -3, 3);
      Mat jac = Mat::Identity(2, 2);
      for (int i = 0; i < kNeurons; ++i) {
        jac += w.col(i) * kernel_grad(spec, x, centers.row(i).transpose()).transpose();
      }
      min_det = std::min(min_det, jac.determinant());
    }
    EXPECT_GT(min_det, 0.0);
  }
}

}  // namespace
}  // namespace ddrbf
