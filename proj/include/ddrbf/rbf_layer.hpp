#pragma once

#include "ddrbf/kernel.hpp"
#include "ddrbf/types.hpp"

namespace ddrbf {

inline constexpr double kDefaultMargin = 0.99;
inline constexpr double kDefaultInverseTol = 1e-10;
inline constexpr int kDefaultInverseMaxIter = 200;

/// One bijective residual layer φ(x) = x + W K(x) with Gaussian activations.
///
/// Row j of W drives output coordinate j and is boxed by |W_{j,i}| ≤ γ ρ_j,
/// where ρ_j = weight_bound(n, N, Σ, j) and γ ∈ (0, 1) is the margin. With
/// S = diag(B_1..B_n) the disturbance S (W G) S⁻¹ then has entries bounded by
/// γ/n, so det J ≥ 1 - γ and the residual is a γ-contraction in the norm
/// ‖S·‖_∞.
class RbfLayer {
 public:
  /// `centers` is N×n (one center per row), `weights` is n×N.
  /// Throws ArgumentError on shape errors and ValidationError on a box violation.
  RbfLayer(KernelSpec spec, Mat centers, Mat weights, double margin = kDefaultMargin);

  /// Zero-weight layer (identity map).
  static RbfLayer identity(KernelSpec spec, Mat centers, double margin = kDefaultMargin);

  int dim() const { return spec_.dim(); }
  int num_neurons() const { return static_cast<int>(centers_.rows()); }
  const KernelSpec& spec() const { return spec_; }
  const Mat& centers() const { return centers_; }
  const Mat& weights() const { return weights_; }
  const Vec& rho() const { return rho_; }
  double margin() const { return margin_; }
  /// Per-row box half-widths γ ρ_j, rounded down so that box_j / ρ_j ≤ γ and
  /// n·N·box_j·B_j ≤ γ hold in floating point.
  const Vec& box() const { return box_; }

  /// Copy with different weights; the box constraint is re-validated.
  RbfLayer with_weights(Mat weights) const;

  /// K(x), the N activations.
  Vec activations(const Vec& x) const;
  /// G(x), N×n, row i = ∇k(x, c_i)ᵀ.
  Mat activation_gradients(const Vec& x) const;

  Vec forward(const Vec& x) const;
  /// I + W G(x).
  Mat jacobian(const Vec& x) const;
  /// Solves forward(x) = y by the fixed-point iteration x ← y - W K(x),
  /// taking Newton steps instead once the contraction slows down.
  /// Throws NumericError (with the last residual) if `max_iter` is exhausted.
  Vec inverse(const Vec& y, double tol = kDefaultInverseTol,
              int max_iter = kDefaultInverseMaxIter) const;

 private:
  void check_input(const Vec& x) const;

  KernelSpec spec_;
  Mat centers_;
  Mat weights_;
  Vec rho_;
  Vec box_;
  double margin_;
};

}  // namespace ddrbf
