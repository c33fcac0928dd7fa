#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddrbf/types.hpp"

namespace ddrbf {

struct Sample {
  Vec x;
  Vec xdot;
  int trajectory_id = 0;
  double timestamp = 0.0;
  /// Sample lies on the attractor set (equilibrium or limit cycle) and must
  /// be stationary for V rather than strictly decreasing.
  bool attractor = false;
};

/// Affine map x' = S (x - offset), ẋ' = S ẋ with S = diag(scale) > 0.
struct Normalization {
  Vec offset;
  Vec scale;

  Vec apply(const Vec& x) const { return scale.cwiseProduct(x - offset); }
  Vec apply_velocity(const Vec& v) const { return scale.cwiseProduct(v); }
  Vec invert(const Vec& x) const { return x.cwiseQuotient(scale) + offset; }
  Vec invert_velocity(const Vec& v) const { return v.cwiseQuotient(scale); }
};

struct TrajectoryDataset {
  int dim = 0;
  std::vector<Sample> samples;
  std::optional<Normalization> normalization;
  std::string source;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  /// Distinct trajectory ids in order of first appearance.
  std::vector<int> trajectory_ids() const;
  /// Samples of the given trajectories, in original order.
  TrajectoryDataset select(const std::vector<int>& ids) const;
  /// Throws ArgumentError if any sample is non-finite, has the wrong
  /// dimension, or timestamps are not strictly increasing per trajectory.
  void validate() const;
};

enum class CsvFormat {
  /// `traj_id,t,x1..xn[,xd1..xdn][,attractor]`; missing velocities are
  /// finite-differenced.
  kGeneric,
  /// Same schema; additionally the last sample of every demonstration is the
  /// target: its velocity is set to zero and it is flagged as an attractor.
  kLasa,
};

/// Parses one CSV stream; `name` is used in error messages.
TrajectoryDataset parse_trajectories(std::istream& in, const std::string& name,
                                     CsvFormat format);

/// Loads and concatenates files. Trajectory ids of later files are offset so
/// they stay unique. Throws ParseError naming file and line.
TrajectoryDataset load_trajectories(const std::vector<std::filesystem::path>& files,
                                    CsvFormat format);

/// Writes the full schema (positions, velocities, attractor flag) with
/// 17 significant digits, so reading back reproduces every value.
void write_trajectories(std::ostream& out, const TrajectoryDataset& data);
void save_trajectories(const std::filesystem::path& path, const TrajectoryDataset& data);

/// Central differences in the interior, one-sided differences at the ends.
std::vector<Vec> compute_velocities(const std::vector<Vec>& positions,
                                    const std::vector<double>& timestamps);

/// Shift/scale fitted on `data`: equilibrium ↦ 0 and every axis of the
/// shifted data fits into [-1, 1].
Normalization fit_normalization(const TrajectoryDataset& data, const Vec& equilibrium);
TrajectoryDataset apply_normalization(const TrajectoryDataset& data, const Normalization& norm);
TrajectoryDataset normalize(const TrajectoryDataset& data, const Vec& equilibrium);
/// Undo a stored normalization.
TrajectoryDataset denormalize(const TrajectoryDataset& data);

/// Mean of the last sample of every trajectory (the LASA target).
Vec final_point_equilibrium(const TrajectoryDataset& data);

/// `count` samples drawn uniformly without replacement from `data`, kept in
/// original order. Attractor-flagged samples are always kept and do not
/// count towards `count`.
TrajectoryDataset subsample(const TrajectoryDataset& data, std::size_t count, std::uint64_t seed);

/// Copy with the last sample of every trajectory flagged as an attractor.
TrajectoryDataset mark_final_samples(const TrajectoryDataset& data);

/// Nonzero velocities rescaled to unit length; zero velocities stay zero.
TrajectoryDataset unit_velocities(const TrajectoryDataset& data);

}  // namespace ddrbf
