#include "ddrbf/systems.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ddrbf/errors.hpp"
#include "ddrbf/random.hpp"

namespace ddrbf {
namespace {

constexpr double kDivergenceLimit = 1e6;

std::string format_state(const Vec& x) {
  std::ostringstream out;
  out << '(';
  for (Eigen::Index j = 0; j < x.size(); ++j) out << (j ? ", " : "") << x(j);
  out << ')';
  return out.str();
}

}  // namespace

int SyntheticSystem::dim() const {
  if (kind == SystemKind::kWarpedLinear && warp) return warp->dim();
  return 2;
}

Vec SyntheticSystem::field(const Vec& x) const {
  switch (kind) {
    case SystemKind::kLinear:
      return -x;
    case SystemKind::kWarpedLinear: {
      if (!warp) throw ArgumentError("warped-linear system has no warp");
      Vec psi = warp->forward(x) - warp_offset;
      if (rotation != 0.0) psi += rotation * (Vec(2) << -psi(1), psi(0)).finished();
      return -warp->jacobian(x).partialPivLu().solve(psi);
    }
    case SystemKind::kTwoAttractor: {
      // Gradient flow of U = (x² - 1)²/4 + y²/2 plus a rotation of ∇U; the
      // rotation leaves the equilibria (±1, 0) and (0, 0) unchanged.
      const Vec g = (Vec(2) << x(0) * x(0) * x(0) - x(0), x(1)).finished();
      return (Vec(2) << -g(0) + swirl * g(1), -g(1) - swirl * g(0)).finished();
    }
    case SystemKind::kVanDerPol:
      return (Vec(2) << x(1), mu * (1.0 - x(0) * x(0)) * x(1) - x(0)).finished();
  }
  return Vec::Zero(x.size());
}

const char* to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::kLinear:
      return "linear";
    case SystemKind::kWarpedLinear:
      return "warped_linear";
    case SystemKind::kTwoAttractor:
      return "two_attractor";
    case SystemKind::kVanDerPol:
      return "van_der_pol";
  }
  return "unknown";
}

SystemKind system_kind_from_string(const std::string& name) {
  if (name == "linear") return SystemKind::kLinear;
  if (name == "warped_linear") return SystemKind::kWarpedLinear;
  if (name == "two_attractor") return SystemKind::kTwoAttractor;
  if (name == "van_der_pol") return SystemKind::kVanDerPol;
  throw ArgumentError("unknown system kind '" + name + "'");
}

SyntheticSystem make_linear(double step) {
  SyntheticSystem s;
  s.kind = SystemKind::kLinear;
  s.step = step;
  return s;
}

SyntheticSystem make_two_attractor(double step) {
  SyntheticSystem s;
  s.kind = SystemKind::kTwoAttractor;
  s.step = step;
  s.duration = 15.0;
  return s;
}

SyntheticSystem make_van_der_pol(double mu, double step) {
  if (!(mu > 0.0)) throw ArgumentError("Van der Pol mu must be positive");
  SyntheticSystem s;
  s.kind = SystemKind::kVanDerPol;
  s.mu = mu;
  s.step = step;
  s.duration = 20.0;
  return s;
}

double WarpedLinearTruth::value(const Vec& x) const {
  return (warp.forward(x) - offset).squaredNorm();
}

Vec WarpedLinearTruth::grad(const Vec& x) const {
  return 2.0 * warp.jacobian(x).transpose() * (warp.forward(x) - offset);
}

WarpedLinear make_warped_linear(DiffeoNet warp, double rotation) {
  if (rotation != 0.0 && warp.dim() != 2) {
    throw ArgumentError("warped-linear rotation needs a 2-D warp");
  }
  WarpedLinear out{SyntheticSystem{}, WarpedLinearTruth{warp, warp.forward(Vec::Zero(warp.dim()))}};
  out.system.kind = SystemKind::kWarpedLinear;
  out.system.step = 0.01;
  out.system.duration = 8.0;
  out.system.warp = std::move(warp);
  out.system.warp_offset = out.truth.offset;
  out.system.rotation = rotation;
  return out;
}

WarpedLinear make_warped_linear(std::uint64_t seed, double rotation) {
  constexpr int kDim = 2;
  constexpr int kLayers = 3;
  constexpr int kNeurons = 5;
  constexpr double kSigma = 0.5;
  std::mt19937_64 rng(seed);
  DiffeoNet warp(kDim);
  for (int t = 0; t < kLayers; ++t) {
    KernelSpec spec = KernelSpec::isotropic(kDim, kSigma);
    Mat centers(kNeurons, kDim);
    for (int i = 0; i < kNeurons; ++i) {
      for (int j = 0; j < kDim; ++j) centers(i, j) = uniform(rng, -1.0, 1.0);
    }
    RbfLayer zero = RbfLayer::identity(spec, centers);
    const Vec box = zero.box();
    Mat weights(kDim, kNeurons);
    for (int j = 0; j < kDim; ++j) {
      for (int i = 0; i < kNeurons; ++i) weights(j, i) = uniform(rng, -box(j), box(j));
    }
    warp.push_back(zero.with_weights(weights));
  }
  return make_warped_linear(std::move(warp), rotation);
}

Vec rk4_step(const SyntheticSystem& system, const Vec& x, double h) {
  const Vec k1 = system.field(x);
  const Vec k2 = system.field(x + 0.5 * h * k1);
  const Vec k3 = system.field(x + 0.5 * h * k2);
  const Vec k4 = system.field(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

TrajectoryDataset simulate(const SyntheticSystem& system, const std::vector<Vec>& initial_states,
                           double duration) {
  if (!(system.step > 0.0)) throw ArgumentError("integration step must be positive");
  if (system.record_every < 1) throw ArgumentError("record_every must be >= 1");
  if (duration <= 0.0) duration = system.duration;
  const auto steps = static_cast<long>(std::llround(duration / system.step));
  TrajectoryDataset data;
  data.dim = system.dim();
  data.source = std::string("simulate:") + to_string(system.kind);
  int id = 0;
  for (const Vec& x0 : initial_states) {
    if (x0.size() != data.dim) throw ArgumentError("initial state has wrong dimension");
    ++id;
    Vec x = x0;
    for (long k = 0; k <= steps; ++k) {
      if (k % system.record_every == 0) {
        Sample s;
        s.x = x;
        s.xdot = system.field(x);
        s.trajectory_id = id;
        s.timestamp = static_cast<double>(k) * system.step;
        data.samples.push_back(std::move(s));
      }
      if (k == steps) break;
      x = rk4_step(system, x, system.step);
      if (!x.allFinite() || x.norm() > kDivergenceLimit) {
        throw NumericError("simulation diverged from initial state " + format_state(x0));
      }
    }
  }
  return data;
}

std::vector<Vec> two_attractor_initial_states() {
  return {(Vec(2) << -2.0, 1.5).finished(),  (Vec(2) << -2.0, -1.5).finished(),
          (Vec(2) << 2.0, 1.5).finished(),   (Vec(2) << 2.0, -1.5).finished(),
          (Vec(2) << -0.5, 2.0).finished(),  (Vec(2) << 0.5, -2.0).finished()};
}

std::vector<Vec> two_attractor_equilibria() {
  return {(Vec(2) << -1.0, 0.0).finished(), (Vec(2) << 1.0, 0.0).finished()};
}

LimitCycleSamples sample_limit_cycle(const SyntheticSystem& system, int count, int trajectory_id) {
  if (count < 2) throw ArgumentError("limit cycle sampling needs count >= 2");
  constexpr double kTransient = 60.0;
  constexpr double kMaxPeriod = 100.0;
  const double h = std::min(system.step, 1e-3);

  Vec x = (Vec(2) << 2.0, 0.0).finished();
  for (double t = 0.0; t < kTransient; t += h) x = rk4_step(system, x, h);

  // One revolution: between consecutive downward crossings of x₂ = 0 with x₁ > 0
  // (the flow turns clockwise).
  const auto crosses = [](const Vec& a, const Vec& b) {
    return a(1) > 0.0 && b(1) <= 0.0 && b(0) > 0.0;
  };
  Vec prev = x;
  double t = 0.0;
  do {
    prev = x;
    x = rk4_step(system, x, h);
    t += h;
    if (t > kMaxPeriod) throw NumericError("no periodic orbit detected");
  } while (!crosses(prev, x));

  LimitCycleSamples out;
  std::vector<double> times{0.0};
  out.cycle.push_back(x);
  double elapsed = 0.0;
  do {
    prev = x;
    x = rk4_step(system, x, h);
    elapsed += h;
    out.cycle.push_back(x);
    times.push_back(elapsed);
    if (elapsed > kMaxPeriod) throw NumericError("no periodic orbit detected");
  } while (!crosses(prev, x) || elapsed < 10 * h);
  // Linear interpolation of the crossing time refines the period estimate.
  const double frac = -prev(1) / (x(1) - prev(1));
  out.period = elapsed - h + frac * h;
  out.cycle.pop_back();
  times.pop_back();

  std::vector<double> arc(out.cycle.size(), 0.0);
  for (std::size_t i = 1; i < out.cycle.size(); ++i) {
    arc[i] = arc[i - 1] + (out.cycle[i] - out.cycle[i - 1]).norm();
  }
  const double total = arc.back() + (out.cycle.front() - out.cycle.back()).norm();

  out.samples.dim = 2;
  out.samples.source = "limit_cycle";
  std::size_t idx = 0;
  for (int k = 0; k < count; ++k) {
    const double target = total * k / count;
    while (idx + 1 < arc.size() && arc[idx + 1] <= target) ++idx;
    std::size_t best = idx;
    if (idx + 1 < arc.size() && arc[idx + 1] - target < target - arc[idx]) best = idx + 1;
    Sample s;
    s.x = out.cycle[best];
    s.xdot = system.field(s.x);
    s.trajectory_id = trajectory_id;
    s.timestamp = times[best];
    s.attractor = true;
    out.samples.samples.push_back(std::move(s));
  }
  return out;
}

std::vector<Vec> corner_states(double extent) {
  return {(Vec(2) << -extent, -extent).finished(), (Vec(2) << extent, -extent).finished(),
          (Vec(2) << extent, extent).finished(), (Vec(2) << -extent, extent).finished()};
}

}  // namespace ddrbf
