#pragma once

#include <vector>

#include "ddrbf/rbf_layer.hpp"
#include "ddrbf/types.hpp"

namespace ddrbf {

/// Composition Φ = φ_T ∘ … ∘ φ_1 of bijective residual RBF layers.
///
/// The layer index acts as discrete time: z_0 = x, z_{t} = φ_t(z_{t-1}).
class DiffeoNet {
 public:
  static constexpr int kFormatVersion = 1;

  explicit DiffeoNet(int dim);
  DiffeoNet(int dim, std::vector<RbfLayer> layers);

  int dim() const { return dim_; }
  int depth() const { return static_cast<int>(layers_.size()); }
  const std::vector<RbfLayer>& layers() const { return layers_; }

  /// Builder access; the layer must match dim().
  void push_back(RbfLayer layer);

  Vec forward(const Vec& x) const;
  /// z_0 .. z_T (T + 1 states).
  std::vector<Vec> trajectory(const Vec& x) const;
  /// J_{φ_T}(z_{T-1}) ⋯ J_{φ_1}(z_0).
  Mat jacobian(const Vec& x) const;
  /// Forward map together with the pushed-forward tangent J_Φ(x) v.
  std::pair<Vec, Vec> forward_tangent(const Vec& x, const Vec& v) const;
  /// Inverts layer by layer from T down to 1.
  Vec inverse(const Vec& y, double tol = kDefaultInverseTol,
              int max_iter = kDefaultInverseMaxIter) const;

 private:
  void check_input(const Vec& x) const;

  int dim_;
  std::vector<RbfLayer> layers_;
};

}  // namespace ddrbf
