#include "ddrbf/systems.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ddrbf/errors.hpp"
#include "test_util.hpp"

namespace ddrbf {
namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

double rk4_error(double h) {
  SyntheticSystem sys = make_linear(h);
  Vec x = v2(1, 0);
  const int steps = static_cast<int>(std::lround(1.0 / h));
  for (int i = 0; i < steps; ++i) x = rk4_step(sys, x, h);
  return std::abs(x(0) - std::exp(-1.0));
}

TEST(Systems, LinearClosedForm) {
  const SyntheticSystem sys = make_linear(0.01);
  const auto d = simulate(sys, {v2(1, 0)}, 1.0);
  const Sample& last = d.samples.back();
  EXPECT_NEAR(last.timestamp, 1.0, 1e-12);
  EXPECT_LE((last.x - v2(std::exp(-1.0), 0)).norm(), 1e-6);
  for (const Sample& s : d.samples) EXPECT_EQ(s.xdot, sys.field(s.x));
}

TEST(Systems, Rk4IsFourthOrder) {
  const double e1 = rk4_error(0.02), e2 = rk4_error(0.01), e3 = rk4_error(0.005);
  EXPECT_GE(e1 / e2, 12.0);
  EXPECT_LE(e1 / e2, 20.0);
  EXPECT_GE(e2 / e3, 12.0);
  EXPECT_LE(e2 / e3, 20.0);
}

TEST(Systems, DivergenceNamesInitialState) {
  SyntheticSystem sys = make_linear(0.01);
  sys.kind = SystemKind::kVanDerPol;
  sys.mu = -5.0;  // anti-damped
  try {
    (void)simulate(sys, {v2(2.5, 0)}, 200.0);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("2.5"), std::string::npos) << e.what();
  }
}

TEST(Systems, TwoAttractorConverges) {
  const SyntheticSystem sys = make_two_attractor();
  const auto starts = two_attractor_initial_states();
  ASSERT_EQ(starts.size(), 6u);
  const auto d = simulate(sys, starts, 40.0);
  int left = 0, right = 0;
  for (int id : d.trajectory_ids()) {
    const auto traj = d.select({id});
    const Vec end = traj.samples.back().x;
    const double dl = (end - v2(-1, 0)).norm(), dr = (end - v2(1, 0)).norm();
    EXPECT_LE(std::min(dl, dr), 1e-3);
    (dl < dr ? left : right)++;
  }
  EXPECT_GT(left, 0);
  EXPECT_GT(right, 0);
}

TEST(Systems, TwoAttractorHasThreeEquilibria) {
  const SyntheticSystem sys = make_two_attractor();
  // Dense grid scan followed by Newton refinement with a finite-difference Jacobian.
  std::vector<Vec> roots;
  for (int i = 0; i <= 60; ++i) {
    for (int j = 0; j <= 60; ++j) {
      Vec x = v2(-3 + 0.1 * i, -3 + 0.1 * j);
      if (sys.field(x).norm() > 0.3) continue;
      for (int it = 0; it < 50; ++it) {
        const Mat jac = testing::fd_jacobian([&](const Vec& p) { return sys.field(p); }, x);
        x -= jac.lu().solve(sys.field(x));
      }
      if (sys.field(x).norm() > 1e-10) continue;
      bool known = false;
      for (const Vec& r : roots) known |= (r - x).norm() < 1e-6;
      if (!known) roots.push_back(x);
    }
  }
  ASSERT_EQ(roots.size(), 3u);
  int stable = 0, unstable = 0;
  for (const Vec& r : roots) {
    const Mat jac = testing::fd_jacobian([&](const Vec& p) { return sys.field(p); }, r);
    const Mat sym = 0.5 * (jac + jac.transpose());
    const Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    if (eig.eigenvalues().maxCoeff() < 0) {
      ++stable;
      EXPECT_NEAR(std::abs(r(0)), 1.0, 1e-8);
    } else {
      ++unstable;
      EXPECT_LT(r.norm(), 1e-8);
    }
  }
  EXPECT_EQ(stable, 2);
  EXPECT_EQ(unstable, 1);
}

TEST(Systems, VanDerPolApproachesCycle) {
  const SyntheticSystem sys = make_van_der_pol();
  const LimitCycleSamples ref = sample_limit_cycle(sys, 20);
  const auto d = simulate(sys, {v2(3, 3)}, 30.0);
  for (const Sample& s : d.samples) {
    if (s.timestamp < 20.0) continue;
    double best = 1e300;
    for (const Vec& c : ref.cycle) best = std::min(best, (c - s.x).norm());
    EXPECT_LE(best, 0.05);
  }
}

TEST(Systems, LimitCycleSamples) {
  const SyntheticSystem sys = make_van_der_pol();
  const LimitCycleSamples lc = sample_limit_cycle(sys, 20);
  ASSERT_EQ(lc.samples.size(), 20u);
  EXPECT_NEAR(lc.period, 6.6633, 1e-3);
  std::vector<double> gaps;
  for (int i = 0; i < 20; ++i) {
    const Sample& s = lc.samples.samples[i];
    EXPECT_TRUE(s.attractor);
    EXPECT_GT(s.xdot.norm(), 0.0);
    EXPECT_EQ(s.xdot, sys.field(s.x));
    gaps.push_back((lc.samples.samples[(i + 1) % 20].x - s.x).norm());
  }
  double mean = 0.0;
  for (double g : gaps) mean += g / 20;
  for (double g : gaps) EXPECT_LE(std::abs(g - mean), 0.2 * mean);
  for (const Sample& s : lc.samples.samples) {
    Vec x = s.x;
    const double h = lc.period / 20000;
    for (int k = 0; k < 20000; ++k) x = rk4_step(sys, x, h);
    EXPECT_LE((x - s.x).norm(), 0.02);
  }
}

TEST(Systems, WarpedLinearIdentityIsMinusX) {
  const WarpedLinear wl = make_warped_linear(DiffeoNet(2));
  std::mt19937_64 rng(71);
  for (int s = 0; s < 100; ++s) {
    const Vec x = testing::random_vec(rng, 2);
    EXPECT_LT((wl.system.field(x) + x).norm(), 1e-15);
    EXPECT_NEAR(wl.truth.value(x), x.squaredNorm(), 1e-15);
  }
}

TEST(Systems, WarpedLinearTruthDecreases) {
  const WarpedLinear wl = make_warped_linear(7);
  ASSERT_TRUE(wl.system.warp.has_value());
  EXPECT_EQ(wl.system.warp->depth(), 3);
  std::mt19937_64 rng(72);
  for (int s = 0; s < 10000; ++s) {
    const Vec x = testing::random_vec(rng, 2);
    if (x.norm() < 1e-6) continue;
    const double v = wl.truth.value(x);
    const double vdot = wl.truth.grad(x).dot(wl.system.field(x));
    EXPECT_NEAR(vdot, -2.0 * v, 1e-10 * std::max(1.0, v));
    EXPECT_LT(vdot, 0.0);
  }
  const Vec g = testing::fd_gradient([&](const Vec& p) { return wl.truth.value(p); }, Vec::Constant(2, 0.3));
  EXPECT_LT((g - wl.truth.grad(Vec::Constant(2, 0.3))).norm(), 1e-7);
  EXPECT_LT(wl.system.field(Vec::Zero(2)).norm(), 1e-15);
}

TEST(Systems, CornerStates) {
  const auto c = corner_states(2.0);
  ASSERT_EQ(c.size(), 4u);
  for (const Vec& x : c) EXPECT_EQ(x.cwiseAbs(), Vec::Constant(2, 2.0));
}

}  // namespace
}  // namespace ddrbf
