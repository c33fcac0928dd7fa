#pragma once

#include "ddrbf/types.hpp"

namespace ddrbf {

/// Gaussian kernel shape shared by all neurons of one layer.
///
/// Holds the covariance Σ together with Σ⁻¹ and its eigendecomposition
/// Σ⁻¹ = Q D Qᵀ. Q is normalized so that the first nonzero entry of every
/// column is positive and det(Q) = +1, which makes the decomposition (and
/// anything derived from it) reproducible across runs.
class KernelSpec {
 public:
  /// Throws ArgumentError unless `covariance` is square, finite, symmetric
  /// to 1e-12 relative and positive definite.
  explicit KernelSpec(Mat covariance);

  static KernelSpec isotropic(int dim, double sigma);

  int dim() const { return static_cast<int>(covariance_.rows()); }
  const Mat& covariance() const { return covariance_; }
  const Mat& inv_covariance() const { return inv_covariance_; }
  const Mat& eig_q() const { return eig_q_; }
  const Vec& eig_d() const { return eig_d_; }

 private:
  Mat covariance_;
  Mat inv_covariance_;
  Mat eig_q_;
  Vec eig_d_;
};

/// k(x, c) = exp(-½ (x-c)ᵀ Σ⁻¹ (x-c)).
double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& c);

/// ∇ₓ k(x, c) = -k(x, c) Σ⁻¹ (x - c).
Vec kernel_grad(const KernelSpec& spec, const Vec& x, const Vec& c);

/// Upper bound B_j on sup_x |∂k(x, c)/∂x_j| (0-based `j`), independent of c:
/// B_j = e^{-1/2} Σ_l |Q_{j,l}| √D_l.
double partial_derivative_bound(const KernelSpec& spec, int j);

/// Per-coordinate weight bound ρ_j = 1 / (n N B_j). Any layer whose weights
/// satisfy |W_{j,i}| < ρ_j has a Jacobian I + E with |E_{l,j}| < 1/n.
///
/// The returned value is rounded down if needed so that the floating-point
/// product n·N·ρ_j·B_j never exceeds 1.
double weight_bound(int n, int num_neurons, const KernelSpec& spec, int j);

/// All ρ_j for a layer of `num_neurons` neurons of dimension spec.dim().
Vec weight_bounds(int num_neurons, const KernelSpec& spec);

}  // namespace ddrbf
