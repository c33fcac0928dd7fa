#include "ddrbf/benchmark.hpp"

#include <cmath>

#include "ddrbf/errors.hpp"
#include "ddrbf/lyapunov.hpp"
#include "ddrbf/trainer.hpp"

namespace ddrbf {

BenchResult run_demo_benchmark(const TrajectoryDataset& demos, const ExperimentConfig& config,
                               int runs, const std::string& name) {
  if (runs < 1) throw ArgumentError("benchmark: runs must be >= 1");
  const std::vector<int> ids = demos.trajectory_ids();
  if (ids.size() < 2) throw ArgumentError("benchmark: needs at least two trajectories");
  const TrajectoryDataset first = demos.select({ids.front()});
  const TrajectoryDataset rest = demos.select(std::vector<int>(ids.begin() + 1, ids.end()));

  BenchResult out;
  out.name = name;
  out.normalization = fit_normalization(first, final_point_equilibrium(first));
  out.base = config.base.make(demos.dim);
  const TrajectoryDataset train_full = apply_normalization(first, out.normalization);
  const TrajectoryDataset test = apply_normalization(rest, out.normalization);
  const double radius = config.train.exclusion_radius;
  out.identity_violation_rate =
      violation_rate(LyapunovCandidate(out.base, DiffeoNet(demos.dim)), test, radius).violation_rate;

  DataConfig data = config.data;
  data.trajectories.clear();
  data.normalize = NormalizeMode::kNone;
  for (int r = 0; r < runs; ++r) {
    const auto offset = static_cast<std::uint64_t>(r);
    data.subsample_seed = config.data.subsample_seed + offset;
    TrainConfig train_config = config.train;
    train_config.seed = config.train.seed + offset;
    const TrajectoryDataset train_set = prepare_training_data(train_full, data);
    TrainResult trained = train(train_config, out.base, train_set);
    const LyapunovCandidate cand(out.base, trained.net);
    BenchRun run;
    run.seed = train_config.seed;
    run.layers = trained.net.depth();
    run.train_violation_rate = violation_rate(cand, train_set, radius).violation_rate;
    run.test_violation_rate = violation_rate(cand, test, radius).violation_rate;
    run.net = std::move(trained.net);
    out.runs.push_back(std::move(run));
  }

  double sum = 0.0;
  for (const BenchRun& r : out.runs) sum += r.test_violation_rate;
  out.mean = sum / runs;
  if (runs > 1) {
    double ss = 0.0;
    for (const BenchRun& r : out.runs) {
      const double d = r.test_violation_rate - out.mean;
      ss += d * d;
    }
    out.stddev = std::sqrt(ss / (runs - 1));
  }
  return out;
}

}  // namespace ddrbf
