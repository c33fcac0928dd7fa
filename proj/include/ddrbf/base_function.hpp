#pragma once

#include <vector>

#include "ddrbf/types.hpp"

namespace ddrbf {

enum class BaseKind { kPointAttractor, kMultiPoint, kLimitCycleRing };

/// Simple surrogate V_b that fixes the attractor topology of the learned
/// function. The learned candidate is V_b ∘ Φ.
///
///   point attractor   V_b(x) = c xᵀx
///   multi point       V_b(x) = -(1/β) log Σ_i exp(-β ‖x - a_i‖²) - shift,
///                     shift chosen so that min_i V_b(a_i) = 0
///   limit-cycle ring  V_b(x) = c (‖x‖² - r²)²
class BaseFunction {
 public:
  static BaseFunction point_attractor(int dim, double scale = 0.1);
  static BaseFunction multi_point(std::vector<Vec> attractors, double beta = 5.0);
  static BaseFunction limit_cycle_ring(int dim, double radius, double scale = 1.0);

  BaseKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double scale() const { return scale_; }
  double radius() const { return radius_; }
  double beta() const { return beta_; }
  const std::vector<Vec>& attractors() const { return attractors_; }

  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  /// Euclidean distance from x to the zero set of V_b.
  double distance_to_attractor(const Vec& x) const;

  /// Critical points of V_b away from the attractor set (the ring's origin,
  /// the saddles between soft-min wells). Empty for the point attractor.
  std::vector<Vec> degenerate_points() const;

 private:
  BaseFunction(BaseKind kind, int dim) : kind_(kind), dim_(dim) {}
  void check_input(const Vec& x) const;
  double softmin_raw(const Vec& x) const;
  Vec softmin_weights(const Vec& x) const;

  BaseKind kind_;
  int dim_;
  double scale_ = 1.0;
  double radius_ = 0.0;
  double beta_ = 1.0;
  double shift_ = 0.0;
  std::vector<Vec> attractors_;
};

const char* to_string(BaseKind kind);

}  // namespace ddrbf
