#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ddrbf/base_function.hpp"
#include "ddrbf/centers.hpp"
#include "ddrbf/dataset.hpp"
#include "ddrbf/diffeo_net.hpp"
#include "ddrbf/lyapunov.hpp"

namespace ddrbf {

/// Projected gradient settings. Steps are taken in box-normalized
/// coordinates u = W / (γρ): u ← clip(u - α g/‖g‖_∞), α halves whenever the
/// objective does not decrease.
struct InnerSolverConfig {
  double step = 0.25;
  int max_steps = 200;
  /// Terminate once α drops below this.
  double tol = 1e-3;
};

struct TrainConfig {
  int horizon = 3;
  int iterations = 60;
  int neurons_per_layer = 25;
  SigmaConfig sigma;
  /// Coarse-to-fine bandwidths: when non-empty, training starts with
  /// kappa = kappa_schedule[0] and moves to the next entry whenever progress
  /// stalls; it stops once the last entry stalls. Empty = sigma.kappa only.
  std::vector<double> kappa_schedule;
  CenterPolicy center_policy = CenterPolicy::kKMeans;
  /// Place centers on the images of samples with positive loss only (falls
  /// back to all samples when fewer distinct points than neurons remain).
  bool focus_active = false;
  InnerSolverConfig inner;
  RiskMode risk_mode = RiskMode::kHinge;
  double hinge_margin = kDefaultHingeMargin;
  /// Weight of Σ V_b(Φ(x)) over attractor-flagged samples; pins the
  /// attractor samples onto the zero set of the base function.
  double attractor_value_weight = 1.0;
  double margin = kDefaultMargin;
  std::uint64_t seed = 0;
  /// Early stop once the relative objective improvement stays below this for
  /// three consecutive iterations.
  double stop_tolerance = 1e-6;
  /// Early stop as soon as no counted training sample violates descent. When
  /// false, training continues until the objective (including the hinge
  /// margin) stalls or vanishes.
  bool stop_at_zero_violations = true;
  double exclusion_radius = kDefaultExclusionRadius;
  /// 0 = full batch; otherwise a seeded subset of this size per iteration.
  std::size_t batch_size = 0;

  /// Throws ArgumentError on invalid settings.
  void validate() const;
};

/// Inputs of one receding-horizon solve: the state images z_t of all
/// samples under the current net and their pushed-forward velocities J_Φ ẋ.
struct HorizonProblem {
  const BaseFunction* base = nullptr;
  RiskMode mode = RiskMode::kHinge;
  double attractor_value_weight = 1.0;
  std::vector<Vec> z;
  std::vector<Vec> v;
  /// hinge_margin · ‖ẋ‖ per sample.
  std::vector<double> hinge_offset;
  std::vector<char> attractor;

  std::size_t size() const { return z.size(); }
};

/// Builds a problem from a dataset and the current net.
HorizonProblem make_horizon_problem(const BaseFunction& base, const DiffeoNet& net,
                                    const TrajectoryDataset& data, RiskMode mode,
                                    double hinge_margin, double attractor_value_weight);

/// Σ_h Σ_i ℓ(∇V_b(z_{t+h})ᵀ v_{t+h}) over the candidate stack with the given
/// weights (one n×N matrix per candidate). Fills `grads` when non-null.
double horizon_objective(const HorizonProblem& problem, const std::vector<RbfLayer>& candidates,
                         const std::vector<Mat>& weights, std::vector<Mat>* grads = nullptr);

struct HorizonSolution {
  std::vector<Mat> weights;
  double initial_objective = 0.0;
  double objective = 0.0;
  int steps = 0;
};

/// Minimizes horizon_objective over the candidates' boxes from W = 0.
HorizonSolution solve_horizon(const HorizonProblem& problem,
                              const std::vector<RbfLayer>& candidates,
                              const InnerSolverConfig& solver);

struct IterationRecord {
  int iteration = 0;
  /// lyapunov_risk of the candidate after this iteration (configured mode).
  double risk = 0.0;
  /// Training objective (risk plus attractor value term).
  double objective = 0.0;
  double violation_rate = 0.0;
  double wall_time = 0.0;
  int neurons = 0;
  double sigma = 0.0;
  Mat covariance;
  Mat centers;
  /// Fraction of the solved first-layer weights kept after the monotone
  /// acceptance check (1 = unchanged, 0 = zero layer).
  double accept_scale = 1.0;
  int inner_steps = 0;
  /// Bandwidth multiplier in effect for this iteration.
  double kappa = 0.0;
};

struct TrainResult {
  DiffeoNet net;
  std::vector<IterationRecord> log;
  double initial_risk = 0.0;
  double initial_violation_rate = 0.0;
};

/// Optional instrumentation, used by tests.
struct TrainHooks {
  /// Called with every horizon solution before the first layer is appended.
  std::function<void(int iteration, std::vector<Mat>& weights)> after_solve;
};

/// Receding-horizon layer growth: per iteration, place H candidate layers on
/// the current images, solve the horizon problem, append only the first
/// candidate and discard the rest.
TrainResult train(const TrainConfig& config, const BaseFunction& base,
                  const TrajectoryDataset& data, const TrainHooks& hooks = {});

struct RegressionConfig {
  int depth = 20;
  int neurons_per_layer = 16;
  CenterPolicy center_policy = CenterPolicy::kKMeans;
  SigmaConfig sigma;
  double margin = kDefaultMargin;
  std::uint64_t seed = 0;
  /// Accelerated projected-gradient iterations per layer.
  int max_steps = 300;
};

struct RegressionResult {
  DiffeoNet net;
  /// Mean ‖Φ(x) - y‖ after 0, 1, …, depth layers.
  std::vector<double> mean_error;
  /// Mean ‖Φ(x) - y‖² after 0, 1, …, depth layers; never increases.
  std::vector<double> mean_squared_error;
  /// Final mean squared error.
  double mse = 0.0;
};

/// Greedy layer-wise least-squares fit of Φ(x_i) ≈ y_i under the box
/// constraints. Each layer solves a convex box-constrained problem started
/// from zero weights, so the squared error never increases with depth.
RegressionResult fit_diffeo_regression(const std::vector<Vec>& inputs,
                                       const std::vector<Vec>& targets,
                                       const RegressionConfig& config);

}  // namespace ddrbf
