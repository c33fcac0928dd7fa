#include <algorithm>
#include <cmath>

#include "ddrbf/errors.hpp"
#include "ddrbf/random.hpp"
#include "ddrbf/trainer.hpp"

namespace ddrbf {
namespace {

void record_errors(const std::vector<Vec>& z, const std::vector<Vec>& y, RegressionResult& result) {
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    sum += (z[i] - y[i]).norm();
    sq += (z[i] - y[i]).squaredNorm();
  }
  result.mean_error.push_back(sum / static_cast<double>(z.size()));
  result.mean_squared_error.push_back(sq / static_cast<double>(z.size()));
  result.mse = result.mean_squared_error.back();
}

/// argmin ‖r - K w‖² over |w| ≤ bound by FISTA; never worse than w = 0.
Vec box_least_squares(const Mat& gram, const Vec& rhs, double rr, double bound, double lipschitz,
                      int steps) {
  const auto objective = [&](const Vec& w) { return rr - 2.0 * rhs.dot(w) + w.dot(gram * w); };
  Vec w = Vec::Zero(rhs.size());
  Vec best = w;
  double best_f = rr;
  if (!(lipschitz > 0.0)) return best;
  Vec y = w;
  double t = 1.0;
  for (int s = 0; s < steps; ++s) {
    Vec next = y - (2.0 / lipschitz) * (gram * y - rhs);
    next = next.cwiseMax(-bound).cwiseMin(bound);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - w);
    w = std::move(next);
    t = t_next;
    const double f = objective(w);
    if (f < best_f) {
      best_f = f;
      best = w;
    }
  }
  return best;
}

}  // namespace

RegressionResult fit_diffeo_regression(const std::vector<Vec>& inputs,
                                       const std::vector<Vec>& targets,
                                       const RegressionConfig& config) {
  if (inputs.empty() || inputs.size() != targets.size()) {
    throw ArgumentError("fit_diffeo_regression: need equally many non-zero inputs and targets");
  }
  if (config.depth < 0 || config.neurons_per_layer < 1 || config.max_steps < 0) {
    throw ArgumentError("fit_diffeo_regression: invalid config");
  }
  const int n = static_cast<int>(inputs.front().size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != n || targets[i].size() != n) {
      throw ArgumentError("fit_diffeo_regression: inconsistent dimensions");
    }
  }
  const auto samples = static_cast<Eigen::Index>(inputs.size());

  RegressionResult result{DiffeoNet(n), {}, {}, 0.0};
  std::vector<Vec> z = inputs;
  record_errors(z, targets, result);
  for (int t = 0; t < config.depth; ++t) {
    const int neurons = static_cast<int>(
        std::min<std::size_t>(config.neurons_per_layer, count_distinct_points(z)));
    const CenterPlacement placed =
        place_centers(z, neurons, config.center_policy, config.sigma,
                      mix_seed(config.seed, static_cast<std::uint64_t>(t)));
    const RbfLayer zero = RbfLayer::identity(placed.spec, placed.centers, config.margin);
    Mat kmat(samples, zero.num_neurons());
    Mat residual(samples, n);
    for (Eigen::Index s = 0; s < samples; ++s) {
      kmat.row(s) = zero.activations(z[s]).transpose();
      residual.row(s) = (targets[s] - z[s]).transpose();
    }
    const Mat gram = kmat.transpose() * kmat;
    const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<Mat>(gram).eigenvalues().maxCoeff();
    const Vec box = zero.box();
    Mat weights(n, zero.num_neurons());
    for (int j = 0; j < n; ++j) {
      const Vec rhs = kmat.transpose() * residual.col(j);
      weights.row(j) = box_least_squares(gram, rhs, residual.col(j).squaredNorm(), box(j),
                                         lipschitz, config.max_steps)
                           .transpose();
    }
    RbfLayer layer = zero.with_weights(weights);
    for (auto& zi : z) zi = layer.forward(zi);
    result.net.push_back(std::move(layer));
    record_errors(z, targets, result);
  }
  return result;
}

}  // namespace ddrbf
