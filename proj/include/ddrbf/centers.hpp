#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddrbf/kernel.hpp"
#include "ddrbf/types.hpp"

namespace ddrbf {

enum class CenterPolicy { kSubsample, kKMeans };
enum class SigmaPolicy { kFixed, kNearestNeighbor };

const char* to_string(CenterPolicy policy);
const char* to_string(SigmaPolicy policy);
CenterPolicy center_policy_from_string(const std::string& name);
SigmaPolicy sigma_policy_from_string(const std::string& name);

struct SigmaConfig {
  SigmaPolicy policy = SigmaPolicy::kNearestNeighbor;
  /// σ = kappa · median nearest-neighbour distance among the centers.
  double kappa = 1.0;
  /// Used by SigmaPolicy::kFixed.
  Mat covariance;
};

struct CenterPlacement {
  Mat centers;  // N×n, rows sorted lexicographically
  KernelSpec spec;
};

inline constexpr int kKMeansSteps = 25;

/// Number of pairwise distinct points (exact comparison).
std::size_t count_distinct_points(const std::vector<Vec>& points);

/// Picks N centers among (or, for k-means, summarizing) `points` and the
/// layer covariance. Deterministic for a given seed. Throws ArgumentError if
/// N exceeds the number of distinct points.
CenterPlacement place_centers(const std::vector<Vec>& points, int num_centers, CenterPolicy policy,
                              const SigmaConfig& sigma, std::uint64_t seed);

}  // namespace ddrbf
