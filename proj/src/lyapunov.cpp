#include "ddrbf/lyapunov.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ddrbf/errors.hpp"

namespace ddrbf {

LyapunovCandidate::LyapunovCandidate(BaseFunction base, DiffeoNet net)
    : base_(std::move(base)), net_(std::move(net)) {
  if (base_.dim() != net_.dim()) {
    throw ArgumentError("base function dimension " + std::to_string(base_.dim()) +
                        " does not match net dimension " + std::to_string(net_.dim()));
  }
}

double lyap_value(const LyapunovCandidate& cand, const Vec& x) {
  return cand.base().value(cand.net().forward(x));
}

Vec lyap_grad(const LyapunovCandidate& cand, const Vec& x) {
  const Vec z = cand.net().forward(x);
  return cand.net().jacobian(x).transpose() * cand.base().grad(z);
}

double directional_derivative(const LyapunovCandidate& cand, const Vec& x, const Vec& xdot) {
  const auto [z, v] = cand.net().forward_tangent(x, xdot);
  return cand.base().grad(z).dot(v);
}

const char* to_string(RiskMode mode) { return mode == RiskMode::kRaw ? "raw" : "hinge"; }

RiskMode risk_mode_from_string(const std::string& name) {
  if (name == "raw") return RiskMode::kRaw;
  if (name == "hinge") return RiskMode::kHinge;
  throw ArgumentError("unknown risk mode '" + name + "'");
}

double lyapunov_risk(const LyapunovCandidate& cand, const TrajectoryDataset& data, RiskMode mode,
                     double hinge_margin) {
  if (data.empty()) throw ArgumentError("lyapunov_risk: empty dataset");
  double risk = 0.0;
  for (const auto& s : data.samples) {
    const double d = directional_derivative(cand, s.x, s.xdot);
    if (s.attractor) {
      risk += std::abs(d);
    } else if (mode == RiskMode::kRaw) {
      risk += d;
    } else {
      risk += std::max(0.0, d + hinge_margin * s.xdot.norm());
    }
  }
  return risk;
}

ViolationReport violation_rate(const LyapunovCandidate& cand, const TrajectoryDataset& data,
                               double exclusion_radius) {
  if (!(exclusion_radius >= 0.0)) throw ArgumentError("exclusion radius must be >= 0");
  ViolationReport report;
  report.directional_derivatives.assign(data.size(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  report.margin_min = std::numeric_limits<double>::infinity();
  report.margin_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sample& s = data.samples[i];
    const auto [z, v] = cand.net().forward_tangent(s.x, s.xdot);
    if (s.attractor || cand.base().distance_to_attractor(z) <= exclusion_radius) {
      ++report.excluded_points;
      continue;
    }
    const double d = cand.base().grad(z).dot(v);
    report.directional_derivatives[i] = d;
    ++report.total_points;
    if (d >= 0.0) ++report.violating_points;
    sum += d;
    report.margin_min = std::min(report.margin_min, d);
    report.margin_max = std::max(report.margin_max, d);
  }
  if (report.total_points > 0) {
    report.violation_rate = 100.0 * static_cast<double>(report.violating_points) /
                            static_cast<double>(report.total_points);
    report.margin_mean = sum / static_cast<double>(report.total_points);
  } else {
    report.margin_min = report.margin_max = 0.0;
  }
  return report;
}

GridData export_grid(const LyapunovCandidate& cand, const GridSpec& spec, const VectorField& field) {
  const auto n = static_cast<std::size_t>(cand.dim());
  if (spec.lo.size() != n || spec.hi.size() != n || spec.resolution.size() != n) {
    throw ArgumentError("grid spec must give bounds and resolution for every axis");
  }
  std::size_t total = 1;
  for (std::size_t a = 0; a < n; ++a) {
    if (!(spec.lo[a] < spec.hi[a])) throw ArgumentError("grid axis " + std::to_string(a) + ": lo >= hi");
    if (spec.resolution[a] < 2) {
      throw ArgumentError("grid axis " + std::to_string(a) + ": resolution < 2");
    }
    total *= static_cast<std::size_t>(spec.resolution[a]);
  }
  GridData grid;
  grid.spec = spec;
  grid.has_vdot = static_cast<bool>(field);
  grid.nodes.reserve(total);
  std::vector<int> index(n, 0);
  for (std::size_t k = 0; k < total; ++k) {
    Vec x(static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) {
      const double step = (spec.hi[a] - spec.lo[a]) / (spec.resolution[a] - 1);
      x(static_cast<Eigen::Index>(a)) =
          index[a] + 1 == spec.resolution[a] ? spec.hi[a] : spec.lo[a] + step * index[a];
    }
    const Vec z = cand.net().forward(x);
    const Vec g = cand.net().jacobian(x).transpose() * cand.base().grad(z);
    grid.nodes.push_back(x);
    grid.value.push_back(cand.base().value(z));
    grid.grad_norm.push_back(g.norm());
    if (field) grid.vdot.push_back(g.dot(field(x)));
    for (std::size_t a = 0; a < n; ++a) {
      if (++index[a] < spec.resolution[a]) break;
      index[a] = 0;
    }
  }
  return grid;
}

void write_grid(std::ostream& out, const GridData& grid) {
  const std::size_t n = grid.spec.lo.size();
  char buf[64];
  const auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "# ddrbf-grid v1\n# dim " << n << "\n# lo";
  for (double v : grid.spec.lo) out << ' ' << fmt(v);
  out << "\n# hi";
  for (double v : grid.spec.hi) out << ' ' << fmt(v);
  out << "\n# resolution";
  for (int r : grid.spec.resolution) out << ' ' << r;
  out << '\n';
  for (std::size_t a = 0; a < n; ++a) out << 'x' << a + 1 << ',';
  out << "V,gradnorm" << (grid.has_vdot ? ",Vdot" : "") << '\n';
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    for (std::size_t a = 0; a < n; ++a) out << fmt(grid.nodes[k](static_cast<Eigen::Index>(a))) << ',';
    out << fmt(grid.value[k]) << ',' << fmt(grid.grad_norm[k]);
    if (grid.has_vdot) out << ',' << fmt(grid.vdot[k]);
    out << '\n';
  }
}

void save_grid(const std::filesystem::path& path, const GridData& grid) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  write_grid(out, grid);
}

GridData read_grid(std::istream& in) {
  GridData grid;
  std::string line;
  std::size_t n = 0;
  const auto fail = [](const std::string& what) -> void { throw ParseError("grid file: " + what); };
  while (std::getline(in, line) && line.rfind("#", 0) == 0) {
    std::istringstream ss(line.substr(1));
    std::string key;
    ss >> key;
    if (key == "dim") {
      ss >> n;
    } else if (key == "lo" || key == "hi") {
      auto& dst = key == "lo" ? grid.spec.lo : grid.spec.hi;
      std::string tok;
      while (ss >> tok) dst.push_back(std::strtod(tok.c_str(), nullptr));
    } else if (key == "resolution") {
      int r;
      while (ss >> r) grid.spec.resolution.push_back(r);
    }
  }
  if (n == 0 || grid.spec.lo.size() != n || grid.spec.hi.size() != n ||
      grid.spec.resolution.size() != n) {
    fail("missing or inconsistent metadata block");
  }
  grid.has_vdot = line.find(",Vdot") != std::string::npos;
  const std::size_t cols = n + 2 + (grid.has_vdot ? 1 : 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::strtod(tok.c_str(), nullptr));
    if (vals.size() != cols) fail("row has " + std::to_string(vals.size()) + " fields");
    Vec x(static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) x(static_cast<Eigen::Index>(a)) = vals[a];
    grid.nodes.push_back(x);
    grid.value.push_back(vals[n]);
    grid.grad_norm.push_back(vals[n + 1]);
    if (grid.has_vdot) grid.vdot.push_back(vals[n + 2]);
  }
  return grid;
}

}  // namespace ddrbf
