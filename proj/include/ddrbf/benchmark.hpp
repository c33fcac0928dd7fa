#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddrbf/config.hpp"
#include "ddrbf/dataset.hpp"
#include "ddrbf/diffeo_net.hpp"

namespace ddrbf {

struct BenchRun {
  std::uint64_t seed = 0;
  int layers = 0;
  double train_violation_rate = 0.0;
  double test_violation_rate = 0.0;
  DiffeoNet net{1};
};

struct BenchResult {
  std::string name;
  Normalization normalization;
  BaseFunction base = BaseFunction::point_attractor(1);
  /// Held-out rate of the empty net with the same base.
  double identity_violation_rate = 0.0;
  std::vector<BenchRun> runs;
  double mean = 0.0;
  /// Sample standard deviation over runs (0 for a single run).
  double stddev = 0.0;
};

/// Demonstration-split benchmark: the first trajectory is normalized with
/// its own final point as equilibrium, run r trains on a subset drawn with
/// seed data.subsample_seed + r (training seed train.seed + r), and every run
/// is scored on the remaining trajectories under the same normalization.
/// `data.trajectories` and `data.normalize` are ignored.
BenchResult run_demo_benchmark(const TrajectoryDataset& demos, const ExperimentConfig& config,
                               int runs, const std::string& name = {});

}  // namespace ddrbf
