#include "ddrbf/rbf_layer.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ddrbf/errors.hpp"

namespace ddrbf {

RbfLayer::RbfLayer(KernelSpec spec, Mat centers, Mat weights, double margin)
    : spec_(std::move(spec)),
      centers_(std::move(centers)),
      weights_(std::move(weights)),
      margin_(margin) {
  const int n = spec_.dim();
  if (!(margin_ > 0.0 && margin_ < 1.0)) {
    throw ArgumentError("layer margin must lie in (0, 1), got " + std::to_string(margin_));
  }
  if (centers_.rows() < 1 || centers_.cols() != n) {
    throw ArgumentError("layer centers must be N x " + std::to_string(n) + " with N >= 1");
  }
  if (weights_.rows() != n || weights_.cols() != centers_.rows()) {
    throw ArgumentError("layer weights must be " + std::to_string(n) + " x " +
                        std::to_string(centers_.rows()));
  }
  if (!centers_.allFinite() || !weights_.allFinite()) {
    throw ArgumentError("layer has non-finite centers or weights");
  }
  rho_ = weight_bounds(num_neurons(), spec_);
  box_ = margin_ * rho_;
  const double count = static_cast<double>(n) * num_neurons();
  for (int j = 0; j < n; ++j) {
    const double bound = partial_derivative_bound(spec_, j);
    while (box_(j) / rho_(j) > margin_ || count * box_(j) * bound > margin_) {
      box_(j) = std::nextafter(box_(j), 0.0);
    }
  }
  for (int j = 0; j < n; ++j) {
    const double limit = box_(j);
    for (int i = 0; i < num_neurons(); ++i) {
      if (std::abs(weights_(j, i)) > limit) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "weight (" << j << ", " << i << ") = " << weights_(j, i)
            << " violates box bound " << limit;
        throw ValidationError(msg.str());
      }
    }
  }
}

RbfLayer RbfLayer::identity(KernelSpec spec, Mat centers, double margin) {
  const auto n = spec.dim();
  const auto count = centers.rows();
  return RbfLayer(std::move(spec), std::move(centers), Mat::Zero(n, count), margin);
}

RbfLayer RbfLayer::with_weights(Mat weights) const {
  return RbfLayer(spec_, centers_, std::move(weights), margin_);
}

void RbfLayer::check_input(const Vec& x) const {
  if (x.size() != dim()) {
    throw ArgumentError("layer input has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(dim()));
  }
  if (!x.allFinite()) throw ArgumentError("layer input is not finite");
}

Vec RbfLayer::activations(const Vec& x) const {
  check_input(x);
  const Mat& prec = spec_.inv_covariance();
  Vec k(num_neurons());
  for (int i = 0; i < num_neurons(); ++i) {
    const Vec d = x - centers_.row(i).transpose();
    k(i) = std::exp(-0.5 * d.dot(prec * d));
  }
  return k;
}

Mat RbfLayer::activation_gradients(const Vec& x) const {
  check_input(x);
  const Mat& prec = spec_.inv_covariance();
  Mat g(num_neurons(), dim());
  for (int i = 0; i < num_neurons(); ++i) {
    const Vec d = x - centers_.row(i).transpose();
    const Vec pd = prec * d;
    g.row(i) = (-std::exp(-0.5 * d.dot(pd)) * pd).transpose();
  }
  return g;
}

Vec RbfLayer::forward(const Vec& x) const { return x + weights_ * activations(x); }

Mat RbfLayer::jacobian(const Vec& x) const {
  return Mat::Identity(dim(), dim()) + weights_ * activation_gradients(x);
}

Vec RbfLayer::inverse(const Vec& y, double tol, int max_iter) const {
  check_input(y);
  Vec x = y;
  double residual = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= max_iter; ++iter) {
    const Vec r = forward(x) - y;  // x - r is the fixed-point update y - W K(x)
    residual = r.norm();
    if (residual <= tol) {
      // A slowly contracting layer leaves an error up to tol / (1 - γ) in x;
      // one Newton correction removes it.
      if (iter < 5) return x;
      const Vec polished = x - jacobian(x).partialPivLu().solve(r);
      return (forward(polished) - y).norm() <= residual ? polished : x;
    }
    // With weights near the box edge the contraction ratio approaches γ; a
    // Newton step (J is never singular) is tried once progress slows down.
    if (iter >= 5 && residual > 0.25 * previous) {
      const Vec candidate = x - jacobian(x).partialPivLu().solve(r);
      if (candidate.allFinite() && (forward(candidate) - y).norm() < residual) {
        x = candidate;
        previous = residual;
        continue;
      }
    }
    x -= r;
    previous = residual;
  }
  std::ostringstream msg;
  msg << "layer inverse did not converge in " << max_iter
      << " iterations (residual " << residual << ")";
  throw NumericError(msg.str());
}

}  // namespace ddrbf
