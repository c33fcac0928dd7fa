#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ddrbf/base_function.hpp"
#include "ddrbf/dataset.hpp"
#include "ddrbf/trainer.hpp"
#include "json.hpp"

namespace ddrbf {

enum class NormalizeMode {
  kNone,
  /// Equilibrium = mean final point of the training trajectories.
  kFinalPoint,
  /// Keep the origin fixed and only rescale the axes.
  kOrigin,
};

/// How raw trajectories become a training set.
struct DataConfig {
  CsvFormat format = CsvFormat::kGeneric;
  /// Trajectory ids to train on; empty = all.
  std::vector<int> trajectories;
  NormalizeMode normalize = NormalizeMode::kNone;
  /// 0 = keep every sample.
  std::size_t subsample = 0;
  std::uint64_t subsample_seed = 0;
  /// Rescale nonzero training velocities to unit length. The sign of every
  /// directional derivative is unchanged; only the hinge weighting is.
  bool unit_velocity = false;
  /// Flag the last sample of every trajectory as an attractor sample (data
  /// simulated to convergence).
  bool final_as_attractor = false;
};

/// Dimension-free description of a base function.
struct BaseConfig {
  BaseKind kind = BaseKind::kPointAttractor;
  double scale = 0.1;
  double radius = 1.0;
  double beta = 5.0;
  std::vector<Vec> attractors;

  BaseFunction make(int dim) const;
};

struct ExperimentConfig {
  DataConfig data;
  BaseConfig base;
  TrainConfig train;
};

/// Strict parser: unknown keys and wrongly typed values are ParseErrors.
/// Missing keys keep their defaults. Accepts a run manifest as well, in
/// which case its "config" member is parsed.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Complete snapshot with every field spelled out; parse_config of the
/// result reproduces the config exactly.
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

BaseFunction parse_base_json(const nlohmann::json& j);
nlohmann::ordered_json base_to_json(const BaseFunction& base);

/// Selects, normalizes, subsamples and (optionally) rescales velocities.
/// The result carries the normalization that was applied, if any.
TrajectoryDataset prepare_training_data(const TrajectoryDataset& raw, const DataConfig& config);

}  // namespace ddrbf
