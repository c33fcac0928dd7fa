#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ddrbf/dataset.hpp"
#include "ddrbf/diffeo_net.hpp"
#include "ddrbf/types.hpp"

namespace ddrbf {

enum class SystemKind { kLinear, kWarpedLinear, kTwoAttractor, kVanDerPol };

/// Autonomous 2-D benchmark system ẋ = f(x) integrated with classic RK4.
struct SyntheticSystem {
  SystemKind kind = SystemKind::kLinear;
  /// RK4 step.
  double step = 0.01;
  /// Default simulation horizon.
  double duration = 10.0;
  /// Store every `record_every`-th RK4 state.
  int record_every = 1;

  /// Van der Pol damping μ.
  double mu = 1.0;
  /// Two-attractor system: rotational part added to the gradient flow.
  double swirl = 0.5;
  /// Warped-linear system: f(x) = -J_Ψ(x)⁻¹ (I + a R)(Ψ(x) - Ψ(0)) with R the
  /// 90° rotation and a = `rotation` (2-D only when a ≠ 0).
  std::optional<DiffeoNet> warp;
  Vec warp_offset;
  double rotation = 0.0;

  int dim() const;
  Vec field(const Vec& x) const;
};

const char* to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& name);

SyntheticSystem make_linear(double step = 0.01);
SyntheticSystem make_two_attractor(double step = 0.01);
SyntheticSystem make_van_der_pol(double mu = 1.0, double step = 0.01);

/// Ground-truth Lyapunov function V(x) = ‖Ψ(x) - Ψ(0)‖² of a warped-linear system.
struct WarpedLinearTruth {
  DiffeoNet warp;
  Vec offset;

  double value(const Vec& x) const;
  Vec grad(const Vec& x) const;
};

struct WarpedLinear {
  SyntheticSystem system;
  WarpedLinearTruth truth;
};

/// Random 3-layer warp Ψ on [-1, 1]² with f(x) = -J_Ψ(x)⁻¹ (I + a R)(Ψ(x) - Ψ(0)).
/// The rotation is skew, so ∇Vᵀ f = -2 V < 0 away from the origin for any a;
/// a > 0 makes trajectories wind along the warped level sets.
WarpedLinear make_warped_linear(std::uint64_t seed, double rotation = 0.0);
/// Same construction around a given warp (the identity net with a = 0 gives f = -x).
WarpedLinear make_warped_linear(DiffeoNet warp, double rotation = 0.0);

/// One classic RK4 step.
Vec rk4_step(const SyntheticSystem& system, const Vec& x, double h);

/// Integrates every initial state for `duration` (system.duration if <= 0).
/// Velocities are the exact field values at the stored states. Throws
/// NumericError naming the initial state if ‖x‖ exceeds 1e6.
TrajectoryDataset simulate(const SyntheticSystem& system, const std::vector<Vec>& initial_states,
                           double duration = 0.0);

/// The six starting points used for the two-attractor system.
std::vector<Vec> two_attractor_initial_states();
/// Stable equilibria of make_two_attractor(): (±1, 0).
std::vector<Vec> two_attractor_equilibria();

struct LimitCycleSamples {
  TrajectoryDataset samples;
  double period = 0.0;
  /// Dense states over one period, for reference-cycle comparisons.
  std::vector<Vec> cycle;
};

/// Integrates past the transient, extracts one period and returns `count`
/// attractor-flagged samples at approximately equal arc length.
LimitCycleSamples sample_limit_cycle(const SyntheticSystem& system, int count = 20,
                                     int trajectory_id = 0);

/// Corner starting points (±extent, ±extent).
std::vector<Vec> corner_states(double extent);

}  // namespace ddrbf
