#include "ddrbf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ddrbf/errors.hpp"
#include "ddrbf/random.hpp"

namespace ddrbf {
namespace {

/// Per-sample loss ℓ(d) and dℓ/dd; the attractor value term is handled
/// separately by the callers.
struct StageLoss {
  double value;
  double slope;
};

StageLoss stage_loss(double d, bool attractor, RiskMode mode, double offset) {
  if (attractor) return {std::abs(d), d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)};
  if (mode == RiskMode::kRaw) return {d, 1.0};
  const double s = d + offset;
  return s > 0.0 ? StageLoss{s, 1.0} : StageLoss{0.0, 0.0};
}

/// Risk, objective and violation count of the problem's current images.
struct StageStats {
  double risk = 0.0;
  double objective = 0.0;
  std::size_t counted = 0;
  std::size_t violating = 0;

  double violation_rate() const {
    return counted ? 100.0 * static_cast<double>(violating) / static_cast<double>(counted) : 0.0;
  }
};

StageStats stage_stats(const HorizonProblem& p, double exclusion_radius) {
  StageStats stats;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p.base->grad(p.z[i]).dot(p.v[i]);
    const StageLoss loss = stage_loss(d, p.attractor[i], p.mode, p.hinge_offset[i]);
    stats.risk += loss.value;
    stats.objective += loss.value;
    if (p.attractor[i]) {
      stats.objective += p.attractor_value_weight * p.base->value(p.z[i]);
      continue;
    }
    if (p.base->distance_to_attractor(p.z[i]) <= exclusion_radius) continue;
    ++stats.counted;
    if (d >= 0.0) ++stats.violating;
  }
  return stats;
}

void apply_layer(const RbfLayer& layer, HorizonProblem& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    p.v[i] += layer.weights() * (layer.activation_gradients(p.z[i]) * p.v[i]);
    p.z[i] = layer.forward(p.z[i]);
  }
}

void check_feasible(const std::vector<RbfLayer>& candidates, const std::vector<Mat>& weights) {
  for (std::size_t h = 0; h < candidates.size(); ++h) {
    const Vec box = candidates[h].box();
    for (Eigen::Index j = 0; j < weights[h].rows(); ++j) {
      if ((weights[h].row(j).array().abs() > box(j)).any()) {
        throw std::logic_error("projected step left the weight box");
      }
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (horizon < 1) throw ArgumentError("train config: horizon must be >= 1");
  if (iterations < 1) throw ArgumentError("train config: iterations must be >= 1");
  if (neurons_per_layer < 1) throw ArgumentError("train config: neurons_per_layer must be >= 1");
  if (!(inner.step > 0.0) || inner.max_steps < 0 || !(inner.tol > 0.0)) {
    throw ArgumentError("train config: inner solver step and tol must be positive");
  }
  if (!(hinge_margin >= 0.0)) throw ArgumentError("train config: hinge_margin must be >= 0");
  if (!(attractor_value_weight >= 0.0)) {
    throw ArgumentError("train config: attractor_value_weight must be >= 0");
  }
  if (!(margin > 0.0 && margin < 1.0)) throw ArgumentError("train config: margin must be in (0, 1)");
  if (!(stop_tolerance > 0.0)) throw ArgumentError("train config: stop_tolerance must be positive");
  if (!(exclusion_radius >= 0.0)) throw ArgumentError("train config: exclusion_radius must be >= 0");
  if (sigma.policy == SigmaPolicy::kNearestNeighbor && !(sigma.kappa > 0.0)) {
    throw ArgumentError("train config: kappa must be positive");
  }
  for (double k : kappa_schedule) {
    if (!(k > 0.0)) throw ArgumentError("train config: kappa_schedule entries must be positive");
  }
}

HorizonProblem make_horizon_problem(const BaseFunction& base, const DiffeoNet& net,
                                    const TrajectoryDataset& data, RiskMode mode,
                                    double hinge_margin, double attractor_value_weight) {
  if (base.dim() != net.dim() || data.dim != net.dim()) {
    throw ArgumentError("horizon problem: dimensions of base, net and data differ");
  }
  HorizonProblem p;
  p.base = &base;
  p.mode = mode;
  p.attractor_value_weight = attractor_value_weight;
  for (const auto& s : data.samples) {
    auto [z, v] = net.forward_tangent(s.x, s.xdot);
    p.z.push_back(std::move(z));
    p.v.push_back(std::move(v));
    p.hinge_offset.push_back(hinge_margin * s.xdot.norm());
    p.attractor.push_back(s.attractor ? 1 : 0);
  }
  return p;
}

double horizon_objective(const HorizonProblem& problem, const std::vector<RbfLayer>& candidates,
                         const std::vector<Mat>& weights, std::vector<Mat>* grads) {
  if (problem.base == nullptr) throw ArgumentError("horizon problem has no base function");
  if (weights.size() != candidates.size()) {
    throw ArgumentError("horizon_objective: one weight matrix per candidate required");
  }
  const int n = problem.base->dim();
  const int depth = static_cast<int>(candidates.size());
  if (grads) {
    grads->resize(candidates.size());
    for (int h = 0; h < depth; ++h) {
      (*grads)[h] = Mat::Zero(n, candidates[h].num_neurons());
    }
  }

  // Scratch, reused across samples.
  std::vector<Vec> zs(depth + 1, Vec(n)), vs(depth + 1, Vec(n)), gs(depth, Vec(n));
  std::vector<Vec> k(depth), q(depth);
  std::vector<Mat> e(depth), pe(depth);
  for (int h = 0; h < depth; ++h) {
    const int count = candidates[h].num_neurons();
    k[h].resize(count);
    q[h].resize(count);
    e[h].resize(n, count);
    pe[h].resize(n, count);
  }
  std::vector<double> slope(depth, 0.0);
  Vec a_z(n), a_v(n), acc_z(n), acc_v(n);

  double total = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    const bool attractor = problem.attractor[i] != 0;
    zs[0] = problem.z[i];
    vs[0] = problem.v[i];
    for (int h = 0; h < depth; ++h) {
      const RbfLayer& layer = candidates[h];
      const Mat& W = weights[h];
      const Mat& prec = layer.spec().inv_covariance();
      e[h] = (-layer.centers().transpose()).colwise() + zs[h];
      pe[h].noalias() = prec * e[h];
      for (int c = 0; c < layer.num_neurons(); ++c) {
        k[h](c) = std::exp(-0.5 * e[h].col(c).dot(pe[h].col(c)));
        q[h](c) = pe[h].col(c).dot(vs[h]);
      }
      zs[h + 1] = zs[h];
      zs[h + 1].noalias() += W * k[h];
      vs[h + 1] = vs[h];
      vs[h + 1].noalias() -= W * k[h].cwiseProduct(q[h]);

      gs[h] = problem.base->grad(zs[h + 1]);
      const double d = gs[h].dot(vs[h + 1]);
      const StageLoss loss = stage_loss(d, attractor, problem.mode, problem.hinge_offset[i]);
      total += loss.value;
      if (attractor) total += problem.attractor_value_weight * problem.base->value(zs[h + 1]);
      slope[h] = loss.slope;
    }
    if (!grads) continue;

    a_z.setZero();
    a_v.setZero();
    for (int h = depth - 1; h >= 0; --h) {
      if (slope[h] != 0.0) {
        a_z.noalias() += slope[h] * (problem.base->hessian(zs[h + 1]) * vs[h + 1]);
        a_v.noalias() += slope[h] * gs[h];
      }
      if (attractor) a_z.noalias() += problem.attractor_value_weight * gs[h];

      const RbfLayer& layer = candidates[h];
      const Mat& W = weights[h];
      Mat& dW = (*grads)[h];
      const Vec gv = -k[h].cwiseProduct(q[h]);
      dW.noalias() += a_z * k[h].transpose();
      dW.noalias() += a_v * gv.transpose();
      const Vec u_z = W.transpose() * a_z;
      const Vec u_v = W.transpose() * a_v;
      acc_z.setZero();
      acc_v.setZero();
      for (int c = 0; c < layer.num_neurons(); ++c) {
        const double kc = k[h](c);
        acc_z.noalias() += (kc * (u_z(c) - u_v(c) * q[h](c))) * e[h].col(c);
        acc_z.noalias() += (kc * u_v(c)) * vs[h];
        acc_v.noalias() += (kc * u_v(c)) * e[h].col(c);
      }
      const Mat& prec = layer.spec().inv_covariance();
      a_z.noalias() -= prec * acc_z;
      a_v.noalias() -= prec * acc_v;
    }
  }
  return total;
}

HorizonSolution solve_horizon(const HorizonProblem& problem,
                              const std::vector<RbfLayer>& candidates,
                              const InnerSolverConfig& solver) {
  HorizonSolution sol;
  for (const auto& layer : candidates) sol.weights.push_back(Mat::Zero(layer.dim(), layer.num_neurons()));
  std::vector<Mat> grads;
  sol.objective = horizon_objective(problem, candidates, sol.weights, &grads);
  sol.initial_objective = sol.objective;
  if (!std::isfinite(sol.objective)) throw NumericError("horizon objective is not finite");

  std::vector<Vec> boxes;
  for (const auto& layer : candidates) boxes.push_back(layer.box());

  double alpha = solver.step;
  std::vector<Mat> trial(candidates.size());
  std::vector<Mat> trial_grads;
  while (sol.steps < solver.max_steps && alpha >= solver.tol) {
    double scale = 0.0;
    for (std::size_t h = 0; h < candidates.size(); ++h) {
      scale = std::max(scale, (boxes[h].asDiagonal() * grads[h]).cwiseAbs().maxCoeff());
    }
    if (!(scale > 0.0)) break;
    for (std::size_t h = 0; h < candidates.size(); ++h) {
      trial[h] = sol.weights[h];
      for (Eigen::Index j = 0; j < trial[h].rows(); ++j) {
        const double b = boxes[h](j);
        for (Eigen::Index c = 0; c < trial[h].cols(); ++c) {
          const double step = alpha * b * (b * grads[h](j, c)) / scale;
          trial[h](j, c) = std::clamp(trial[h](j, c) - step, -b, b);
        }
      }
    }
    check_feasible(candidates, trial);
    const double f = horizon_objective(problem, candidates, trial, &trial_grads);
    ++sol.steps;
    if (f < sol.objective) {
      std::swap(sol.weights, trial);
      std::swap(grads, trial_grads);
      sol.objective = f;
    } else {
      alpha *= 0.5;
    }
  }
  return sol;
}

TrainResult train(const TrainConfig& config, const BaseFunction& base,
                  const TrajectoryDataset& data, const TrainHooks& hooks) {
  config.validate();
  if (data.empty()) throw ArgumentError("train: empty dataset");
  if (data.dim != base.dim()) throw ArgumentError("train: data and base dimensions differ");
  const auto start = std::chrono::steady_clock::now();
  const int n = data.dim;

  TrainResult result{DiffeoNet(n), {}, 0.0, 0.0};
  HorizonProblem full = make_horizon_problem(base, result.net, data, config.risk_mode,
                                             config.hinge_margin, config.attractor_value_weight);
  StageStats stats = stage_stats(full, config.exclusion_radius);
  result.initial_risk = stats.risk;
  result.initial_violation_rate = stats.violation_rate();
  if (!std::isfinite(stats.objective)) throw NumericError("train: initial objective is not finite");

  const std::vector<double> kappas =
      config.kappa_schedule.empty() ? std::vector<double>{config.sigma.kappa} : config.kappa_schedule;
  std::size_t stage = 0;
  SigmaConfig sigma = config.sigma;
  int stalled = 0;
  for (int t = 0; t < config.iterations; ++t) {
    sigma.kappa = kappas[stage];
    if (config.stop_at_zero_violations && stats.counted > 0 && stats.violating == 0) break;
    if (stats.objective == 0.0) break;

    std::vector<std::size_t> batch(full.size());
    std::iota(batch.begin(), batch.end(), std::size_t{0});
    if (config.batch_size > 0 && config.batch_size < batch.size()) {
      std::mt19937_64 rng(mix_seed(config.seed, 0x5eed0000ULL + t));
      for (std::size_t k = 0; k < config.batch_size; ++k) {
        std::swap(batch[k], batch[k + uniform_index(rng, batch.size() - k)]);
      }
      batch.resize(config.batch_size);
      std::sort(batch.begin(), batch.end());
    }
    HorizonProblem problem;
    problem.base = &base;
    problem.mode = config.risk_mode;
    problem.attractor_value_weight = config.attractor_value_weight;
    for (std::size_t i : batch) {
      problem.z.push_back(full.z[i]);
      problem.v.push_back(full.v[i]);
      problem.hinge_offset.push_back(full.hinge_offset[i]);
      problem.attractor.push_back(full.attractor[i]);
    }

    const std::vector<Vec>* points = &problem.z;
    std::vector<Vec> active;
    if (config.focus_active) {
      for (std::size_t i = 0; i < problem.size(); ++i) {
        const double d = base.grad(problem.z[i]).dot(problem.v[i]);
        if (stage_loss(d, problem.attractor[i], problem.mode, problem.hinge_offset[i]).value > 0.0) {
          active.push_back(problem.z[i]);
        }
      }
      if (count_distinct_points(active) >= static_cast<std::size_t>(config.neurons_per_layer)) {
        points = &active;
      }
    }
    const int neurons = static_cast<int>(
        std::min<std::size_t>(config.neurons_per_layer, count_distinct_points(*points)));
    std::vector<RbfLayer> candidates;
    for (int h = 0; h < config.horizon; ++h) {
      CenterPlacement placed =
          place_centers(*points, neurons, config.center_policy, sigma,
                        mix_seed(config.seed, static_cast<std::uint64_t>(t) * config.horizon + h));
      candidates.push_back(
          RbfLayer::identity(std::move(placed.spec), std::move(placed.centers), config.margin));
    }

    HorizonSolution sol = solve_horizon(problem, candidates, config.inner);
    if (hooks.after_solve) hooks.after_solve(t, sol.weights);

    // Monotone acceptance: shrink the first layer until neither the risk nor
    // the objective exceeds that of appending a zero layer.
    double scale = 1.0;
    RbfLayer accepted = candidates.front().with_weights(sol.weights.front());
    HorizonProblem next = full;
    apply_layer(accepted, next);
    StageStats next_stats = stage_stats(next, config.exclusion_radius);
    for (int shrink = 0; shrink < 12 && (next_stats.risk > stats.risk ||
                                         next_stats.objective > stats.objective);
         ++shrink) {
      scale = shrink == 11 ? 0.0 : scale * 0.5;
      accepted = candidates.front().with_weights(scale * sol.weights.front());
      next = full;
      apply_layer(accepted, next);
      next_stats = stage_stats(next, config.exclusion_radius);
    }
    if (!std::isfinite(next_stats.objective)) {
      std::ostringstream msg;
      msg << "train: non-finite objective at iteration " << t;
      throw NumericError(msg.str());
    }

    IterationRecord rec;
    rec.iteration = t + 1;
    rec.risk = next_stats.risk;
    rec.objective = next_stats.objective;
    rec.violation_rate = next_stats.violation_rate();
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.neurons = accepted.num_neurons();
    rec.covariance = accepted.spec().covariance();
    rec.sigma = std::sqrt(rec.covariance.trace() / n);
    rec.centers = accepted.centers();
    rec.accept_scale = scale;
    rec.inner_steps = sol.steps;
    rec.kappa = sigma.kappa;
    result.log.push_back(std::move(rec));

    const double improvement = stats.objective - next_stats.objective;
    stalled = improvement < config.stop_tolerance * std::max(std::abs(stats.objective), 1e-300)
                  ? stalled + 1
                  : 0;
    result.net.push_back(std::move(accepted));
    full = std::move(next);
    stats = next_stats;
    if (stalled >= 3) {
      if (++stage == kappas.size()) break;
      stalled = 0;
    }
  }
  return result;
}

}  // namespace ddrbf
