#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddrbf/base_function.hpp"
#include "ddrbf/dataset.hpp"
#include "ddrbf/diffeo_net.hpp"

namespace ddrbf {

inline constexpr double kDefaultHingeMargin = 0.01;
inline constexpr double kDefaultExclusionRadius = 1e-3;

/// V_Φ = V_b ∘ Φ.
class LyapunovCandidate {
 public:
  LyapunovCandidate(BaseFunction base, DiffeoNet net);

  const BaseFunction& base() const { return base_; }
  const DiffeoNet& net() const { return net_; }
  int dim() const { return net_.dim(); }

 private:
  BaseFunction base_;
  DiffeoNet net_;
};

double lyap_value(const LyapunovCandidate& cand, const Vec& x);
/// J_Φ(x)ᵀ ∇V_b(Φ(x)).
Vec lyap_grad(const LyapunovCandidate& cand, const Vec& x);
/// ∇V_Φ(x)ᵀ ẋ, evaluated by pushing ẋ forward through the net.
double directional_derivative(const LyapunovCandidate& cand, const Vec& x, const Vec& xdot);

enum class RiskMode { kRaw, kHinge };

const char* to_string(RiskMode mode);
RiskMode risk_mode_from_string(const std::string& name);

/// Raw: Σ V̇ᵢ. Hinge: Σ max(0, V̇ᵢ + margin ‖ẋᵢ‖). Attractor-flagged samples
/// contribute |V̇ᵢ| in both modes.
double lyapunov_risk(const LyapunovCandidate& cand, const TrajectoryDataset& data, RiskMode mode,
                     double hinge_margin = kDefaultHingeMargin);

struct ViolationReport {
  std::size_t total_points = 0;
  std::size_t violating_points = 0;
  std::size_t excluded_points = 0;
  /// 100 · violating / total (0 when nothing was evaluated).
  double violation_rate = 0.0;
  double margin_min = 0.0;
  double margin_mean = 0.0;
  double margin_max = 0.0;
  /// V̇ per dataset sample, in dataset order (NaN for excluded samples).
  std::vector<double> directional_derivatives;
};

/// Counts samples with V̇ ≥ 0. Excluded from the count are attractor-flagged
/// samples and samples whose image Φ(x) lies within `exclusion_radius` of
/// the base attractor set.
ViolationReport violation_rate(const LyapunovCandidate& cand, const TrajectoryDataset& data,
                               double exclusion_radius = kDefaultExclusionRadius);

struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> resolution;
};

/// Node table: coordinates, V, ‖∇V‖ and optionally ∇Vᵀ f. Nodes are ordered
/// row-major with axis 0 varying fastest.
struct GridData {
  GridSpec spec;
  bool has_vdot = false;
  std::vector<Vec> nodes;
  std::vector<double> value;
  std::vector<double> grad_norm;
  std::vector<double> vdot;
};

using VectorField = std::function<Vec(const Vec&)>;

GridData export_grid(const LyapunovCandidate& cand, const GridSpec& spec,
                     const VectorField& field = nullptr);
void write_grid(std::ostream& out, const GridData& grid);
void save_grid(const std::filesystem::path& path, const GridData& grid);
GridData read_grid(std::istream& in);

}  // namespace ddrbf
