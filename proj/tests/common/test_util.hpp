#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "ddrbf/diffeo_net.hpp"
#include "ddrbf/kernel.hpp"
#include "ddrbf/random.hpp"

namespace ddrbf::testing {

inline Vec random_vec(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vec v(n);
  for (int j = 0; j < n; ++j) v(j) = uniform(rng, lo, hi);
  return v;
}

/// Random SPD covariance with eigenvalues in [lo², hi²] and a random rotation.
inline Mat random_spd(std::mt19937_64& rng, int n, double lo = 0.3, double hi = 1.2) {
  Mat a(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = uniform(rng, -1.0, 1.0);
  }
  const Mat q = Eigen::HouseholderQR<Mat>(a).householderQ();
  Vec d(n);
  for (int j = 0; j < n; ++j) {
    const double s = uniform(rng, lo, hi);
    d(j) = s * s;
  }
  Mat sigma = q * d.asDiagonal() * q.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

/// Layer with random centers in [-1, 1]^n and weights uniform in its box.
inline RbfLayer random_layer(std::mt19937_64& rng, int n, int neurons, bool isotropic = false,
                             double weight_fraction = 1.0) {
  KernelSpec spec = isotropic ? KernelSpec::isotropic(n, uniform(rng, 0.3, 1.0))
                              : KernelSpec(random_spd(rng, n));
  Mat centers(neurons, n);
  for (int i = 0; i < neurons; ++i) centers.row(i) = random_vec(rng, n).transpose();
  RbfLayer zero = RbfLayer::identity(std::move(spec), centers);
  const Vec box = zero.box();
  Mat w(n, neurons);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < neurons; ++i) w(j, i) = weight_fraction * uniform(rng, -box(j), box(j));
  }
  return zero.with_weights(w);
}

inline DiffeoNet random_net(std::mt19937_64& rng, int n, int depth, int neurons) {
  DiffeoNet net(n);
  for (int t = 0; t < depth; ++t) net.push_back(random_layer(rng, n, neurons));
  return net;
}

/// Central-difference gradient of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian of a vector map.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  const Vec f0 = f(x);
  Mat jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

}  // namespace ddrbf::testing
