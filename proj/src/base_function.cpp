#include "ddrbf/base_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ddrbf/errors.hpp"

namespace ddrbf {

BaseFunction BaseFunction::point_attractor(int dim, double scale) {
  if (dim < 1) throw ArgumentError("base function dimension must be >= 1");
  if (!(scale > 0.0)) throw ArgumentError("point attractor scale must be positive");
  BaseFunction b(BaseKind::kPointAttractor, dim);
  b.scale_ = scale;
  return b;
}

BaseFunction BaseFunction::multi_point(std::vector<Vec> attractors, double beta) {
  if (attractors.empty()) throw ArgumentError("multi-point base needs at least one attractor");
  if (!(beta > 0.0)) throw ArgumentError("multi-point temperature must be positive");
  const auto dim = static_cast<int>(attractors.front().size());
  if (dim < 1) throw ArgumentError("base function dimension must be >= 1");
  for (const auto& a : attractors) {
    if (a.size() != dim) throw ArgumentError("multi-point attractors differ in dimension");
    if (!a.allFinite()) throw ArgumentError("multi-point attractor is not finite");
  }
  BaseFunction b(BaseKind::kMultiPoint, dim);
  b.beta_ = beta;
  b.attractors_ = std::move(attractors);
  b.shift_ = std::numeric_limits<double>::infinity();
  for (const auto& a : b.attractors_) b.shift_ = std::min(b.shift_, b.softmin_raw(a));
  return b;
}

BaseFunction BaseFunction::limit_cycle_ring(int dim, double radius, double scale) {
  if (dim < 1) throw ArgumentError("base function dimension must be >= 1");
  if (!(radius > 0.0)) throw ArgumentError("ring radius must be positive");
  if (!(scale > 0.0)) throw ArgumentError("ring scale must be positive");
  BaseFunction b(BaseKind::kLimitCycleRing, dim);
  b.radius_ = radius;
  b.scale_ = scale;
  return b;
}

void BaseFunction::check_input(const Vec& x) const {
  if (x.size() != dim_) {
    throw ArgumentError("base function input has dimension " + std::to_string(x.size()) +
                        ", expected " + std::to_string(dim_));
  }
}

double BaseFunction::softmin_raw(const Vec& x) const {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& a : attractors_) lowest = std::min(lowest, (x - a).squaredNorm());
  double sum = 0.0;
  for (const auto& a : attractors_) sum += std::exp(-beta_ * ((x - a).squaredNorm() - lowest));
  return lowest - std::log(sum) / beta_;
}

Vec BaseFunction::softmin_weights(const Vec& x) const {
  const auto m = static_cast<Eigen::Index>(attractors_.size());
  Vec s(m);
  for (Eigen::Index i = 0; i < m; ++i) s(i) = -beta_ * (x - attractors_[i]).squaredNorm();
  const Vec e = (s.array() - s.maxCoeff()).exp();
  return e / e.sum();
}

double BaseFunction::value(const Vec& x) const {
  check_input(x);
  switch (kind_) {
    case BaseKind::kPointAttractor:
      return scale_ * x.squaredNorm();
    case BaseKind::kMultiPoint:
      return softmin_raw(x) - shift_;
    case BaseKind::kLimitCycleRing: {
      const double gap = x.squaredNorm() - radius_ * radius_;
      return scale_ * gap * gap;
    }
  }
  return 0.0;
}

Vec BaseFunction::grad(const Vec& x) const {
  check_input(x);
  switch (kind_) {
    case BaseKind::kPointAttractor:
      return 2.0 * scale_ * x;
    case BaseKind::kMultiPoint: {
      const Vec w = softmin_weights(x);
      Vec mean = Vec::Zero(dim_);
      for (std::size_t i = 0; i < attractors_.size(); ++i) mean += w(i) * attractors_[i];
      return 2.0 * (x - mean);
    }
    case BaseKind::kLimitCycleRing:
      return 4.0 * scale_ * (x.squaredNorm() - radius_ * radius_) * x;
  }
  return Vec::Zero(dim_);
}

Mat BaseFunction::hessian(const Vec& x) const {
  check_input(x);
  const Mat eye = Mat::Identity(dim_, dim_);
  switch (kind_) {
    case BaseKind::kPointAttractor:
      return 2.0 * scale_ * eye;
    case BaseKind::kMultiPoint: {
      // ∇V = 2(x - ā(x)) with ā the softmax-weighted attractor mean, and
      // ∂ā/∂x = 2β Cov_w(a).
      const Vec w = softmin_weights(x);
      Vec mean = Vec::Zero(dim_);
      for (std::size_t i = 0; i < attractors_.size(); ++i) mean += w(i) * attractors_[i];
      Mat cov = Mat::Zero(dim_, dim_);
      for (std::size_t i = 0; i < attractors_.size(); ++i) {
        const Vec d = attractors_[i] - mean;
        cov += w(i) * d * d.transpose();
      }
      return 2.0 * (eye - 2.0 * beta_ * cov);
    }
    case BaseKind::kLimitCycleRing:
      return 4.0 * scale_ *
             ((x.squaredNorm() - radius_ * radius_) * eye + 2.0 * x * x.transpose());
  }
  return Mat::Zero(dim_, dim_);
}

double BaseFunction::distance_to_attractor(const Vec& x) const {
  check_input(x);
  switch (kind_) {
    case BaseKind::kPointAttractor:
      return x.norm();
    case BaseKind::kMultiPoint: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& a : attractors_) best = std::min(best, (x - a).norm());
      return best;
    }
    case BaseKind::kLimitCycleRing:
      return std::abs(x.norm() - radius_);
  }
  return 0.0;
}

std::vector<Vec> BaseFunction::degenerate_points() const {
  std::vector<Vec> points;
  if (kind_ == BaseKind::kLimitCycleRing) {
    points.push_back(Vec::Zero(dim_));
    return points;
  }
  if (kind_ != BaseKind::kMultiPoint || attractors_.size() < 2) return points;

  // Newton on ∇V = 0 from every pairwise midpoint; keep roots away from wells.
  for (std::size_t a = 0; a < attractors_.size(); ++a) {
    for (std::size_t b = a + 1; b < attractors_.size(); ++b) {
      Vec x = 0.5 * (attractors_[a] + attractors_[b]);
      bool converged = false;
      for (int iter = 0; iter < 100; ++iter) {
        const Vec g = grad(x);
        if (g.norm() < 1e-13) {
          converged = true;
          break;
        }
        const Vec step = hessian(x).fullPivLu().solve(g);
        if (!step.allFinite()) break;
        x -= step;
      }
      if (!converged || distance_to_attractor(x) < 1e-3) continue;
      const bool duplicate = std::any_of(points.begin(), points.end(),
                                         [&](const Vec& p) { return (p - x).norm() < 1e-8; });
      if (!duplicate) points.push_back(x);
    }
  }
  return points;
}

const char* to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::kPointAttractor:
      return "point_attractor";
    case BaseKind::kMultiPoint:
      return "multi_point";
    case BaseKind::kLimitCycleRing:
      return "limit_cycle_ring";
  }
  return "unknown";
}

}  // namespace ddrbf
