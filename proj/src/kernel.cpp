#include "ddrbf/kernel.hpp"

#include <cmath>
#include <string>

#include "ddrbf/errors.hpp"

namespace ddrbf {
namespace {

const double kInvSqrtE = std::exp(-0.5);

void check_dims(const KernelSpec& spec, const Vec& x, const Vec& c) {
  if (x.size() != spec.dim() || c.size() != spec.dim()) {
    throw ArgumentError("kernel: expected vectors of dimension " + std::to_string(spec.dim()) +
                        ", got " + std::to_string(x.size()) + " and " +
                        std::to_string(c.size()));
  }
}

}  // namespace

KernelSpec::KernelSpec(Mat covariance) : covariance_(std::move(covariance)) {
  const Eigen::Index n = covariance_.rows();
  if (n == 0 || covariance_.cols() != n) {
    throw ArgumentError("covariance must be a non-empty square matrix");
  }
  if (!covariance_.allFinite()) {
    throw ArgumentError("covariance has non-finite entries");
  }
  const double scale = covariance_.cwiseAbs().maxCoeff();
  const double asym = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw ArgumentError("covariance is not symmetric (max asymmetry " + std::to_string(asym) +
                        ")");
  }
  Eigen::LLT<Mat> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    throw ArgumentError("covariance is not positive definite");
  }
  Mat inv = llt.solve(Mat::Identity(n, n));
  inv_covariance_ = 0.5 * (inv + inv.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> eig(inv_covariance_);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw ArgumentError("eigendecomposition of the inverse covariance failed");
  }
  eig_q_ = eig.eigenvectors();
  eig_d_ = eig.eigenvalues();
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = 0; row < n; ++row) {
      const double v = eig_q_(row, col);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) eig_q_.col(col) *= -1.0;
        break;
      }
    }
  }
  if (eig_q_.determinant() < 0.0) eig_q_.col(n - 1) *= -1.0;
}

KernelSpec KernelSpec::isotropic(int dim, double sigma) {
  if (dim < 1) throw ArgumentError("isotropic kernel: dim must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ArgumentError("isotropic kernel: sigma must be positive and finite");
  }
  return KernelSpec(Mat::Identity(dim, dim) * (sigma * sigma));
}

double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& c) {
  check_dims(spec, x, c);
  const Vec diff = x - c;
  return std::exp(-0.5 * diff.dot(spec.inv_covariance() * diff));
}

Vec kernel_grad(const KernelSpec& spec, const Vec& x, const Vec& c) {
  check_dims(spec, x, c);
  const Vec diff = x - c;
  const Vec pd = spec.inv_covariance() * diff;
  return -std::exp(-0.5 * diff.dot(pd)) * pd;
}

double partial_derivative_bound(const KernelSpec& spec, int j) {
  if (j < 0 || j >= spec.dim()) {
    throw ArgumentError("partial_derivative_bound: coordinate index " + std::to_string(j) +
                        " out of range for dimension " + std::to_string(spec.dim()));
  }
  double sum = 0.0;
  for (int l = 0; l < spec.dim(); ++l) {
    sum += std::abs(spec.eig_q()(j, l)) * std::sqrt(spec.eig_d()(l));
  }
  return kInvSqrtE * sum;
}

double weight_bound(int n, int num_neurons, const KernelSpec& spec, int j) {
  if (n < 1 || num_neurons < 1) {
    throw ArgumentError("weight_bound: n and N must be >= 1");
  }
  if (n != spec.dim()) {
    throw ArgumentError("weight_bound: n does not match kernel dimension");
  }
  const double bound = partial_derivative_bound(spec, j);
  const double scale = static_cast<double>(n) * static_cast<double>(num_neurons);
  double rho = 1.0 / (scale * bound);
  while (scale * rho * bound > 1.0) rho = std::nextafter(rho, 0.0);
  return rho;
}

Vec weight_bounds(int num_neurons, const KernelSpec& spec) {
  Vec rho(spec.dim());
  for (int j = 0; j < spec.dim(); ++j) rho(j) = weight_bound(spec.dim(), num_neurons, spec, j);
  return rho;
}

}  // namespace ddrbf
