#include "ddrbf/centers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ddrbf/errors.hpp"
#include "ddrbf/random.hpp"

namespace ddrbf {
namespace {

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

std::vector<Vec> distinct_points(const std::vector<Vec>& points) {
  std::vector<Vec> sorted = points;
  std::sort(sorted.begin(), sorted.end(), lex_less);
  sorted.erase(std::unique(sorted.begin(), sorted.end(),
                           [](const Vec& a, const Vec& b) { return a == b; }),
               sorted.end());
  return sorted;
}

std::vector<Vec> kmeans(const std::vector<Vec>& points, int k, std::mt19937_64& rng) {
  // k-means++ seeding.
  std::vector<Vec> centers{points[uniform_index(rng, points.size())]};
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      dist[p] = std::min(dist[p], (points[p] - centers.back()).squaredNorm());
      total += dist[p];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = uniform01(rng) * total;
      for (std::size_t p = 0; p < points.size(); ++p) {
        if (dist[p] <= 0.0) continue;
        pick = p;
        if (r < dist[p]) break;
        r -= dist[p];
      }
    }
    centers.push_back(points[pick]);
  }

  std::vector<int> owner(points.size(), 0);
  for (int step = 0; step < kKMeansSteps; ++step) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points[p] - centers[c]).squaredNorm();
        if (d < best) {
          best = d;
          owner[p] = c;
        }
      }
    }
    std::vector<Vec> sum(k, Vec::Zero(points.front().size()));
    std::vector<int> count(k, 0);
    for (std::size_t p = 0; p < points.size(); ++p) {
      sum[owner[p]] += points[p];
      ++count[owner[p]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) {
        centers[c] = sum[c] / count[c];
        continue;
      }
      // Empty cluster: move it to the point farthest from its own center.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t p = 0; p < points.size(); ++p) {
        const double d = (points[p] - centers[owner[p]]).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = p;
        }
      }
      centers[c] = points[far];
      owner[far] = c;
    }
  }
  return centers;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

std::size_t count_distinct_points(const std::vector<Vec>& points) {
  return distinct_points(points).size();
}

const char* to_string(CenterPolicy policy) {
  return policy == CenterPolicy::kKMeans ? "kmeans" : "subsample";
}

const char* to_string(SigmaPolicy policy) {
  return policy == SigmaPolicy::kFixed ? "fixed" : "nearest_neighbor";
}

CenterPolicy center_policy_from_string(const std::string& name) {
  if (name == "subsample") return CenterPolicy::kSubsample;
  if (name == "kmeans") return CenterPolicy::kKMeans;
  throw ArgumentError("unknown center policy '" + name + "'");
}

SigmaPolicy sigma_policy_from_string(const std::string& name) {
  if (name == "fixed") return SigmaPolicy::kFixed;
  if (name == "nearest_neighbor") return SigmaPolicy::kNearestNeighbor;
  throw ArgumentError("unknown sigma policy '" + name + "'");
}

CenterPlacement place_centers(const std::vector<Vec>& points, int num_centers, CenterPolicy policy,
                              const SigmaConfig& sigma, std::uint64_t seed) {
  if (num_centers < 1) throw ArgumentError("place_centers: N must be >= 1");
  if (points.empty()) throw ArgumentError("place_centers: no points");
  const auto dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw ArgumentError("place_centers: points differ in dimension");
  }
  std::vector<Vec> pool = distinct_points(points);
  if (static_cast<std::size_t>(num_centers) > pool.size()) {
    throw ArgumentError("place_centers: N = " + std::to_string(num_centers) + " exceeds the " +
                        std::to_string(pool.size()) + " distinct points");
  }

  std::mt19937_64 rng(seed);
  std::vector<Vec> chosen;
  if (policy == CenterPolicy::kSubsample) {
    for (int k = 0; k < num_centers; ++k) {
      const std::size_t r = k + uniform_index(rng, pool.size() - k);
      std::swap(pool[k], pool[r]);
    }
    chosen.assign(pool.begin(), pool.begin() + num_centers);
  } else {
    chosen = kmeans(pool, num_centers, rng);
  }
  std::sort(chosen.begin(), chosen.end(), lex_less);

  Mat centers(num_centers, dim);
  for (int i = 0; i < num_centers; ++i) centers.row(i) = chosen[i].transpose();

  if (sigma.policy == SigmaPolicy::kFixed) {
    return {std::move(centers), KernelSpec(sigma.covariance)};
  }
  if (!(sigma.kappa > 0.0)) throw ArgumentError("place_centers: kappa must be positive");
  double length = 0.0;
  if (num_centers > 1) {
    std::vector<double> nearest(num_centers, std::numeric_limits<double>::infinity());
    for (int a = 0; a < num_centers; ++a) {
      for (int b = 0; b < num_centers; ++b) {
        if (a != b) nearest[a] = std::min(nearest[a], (chosen[a] - chosen[b]).norm());
      }
    }
    length = median(nearest);
  } else {
    double sq = 0.0;
    for (const auto& p : pool) sq += (p - chosen[0]).squaredNorm();
    length = std::sqrt(sq / static_cast<double>(pool.size()));
  }
  if (!(length > 0.0)) length = 1.0;
  return {std::move(centers), KernelSpec::isotropic(static_cast<int>(dim), sigma.kappa * length)};
}

}  // namespace ddrbf
