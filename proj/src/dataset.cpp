#include "ddrbf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "ddrbf/errors.hpp"
#include "ddrbf/random.hpp"

namespace ddrbf {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

[[noreturn]] void parse_fail(const std::string& name, std::size_t line, const std::string& what) {
  throw ParseError(name + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& text, const std::string& name, std::size_t line) {
  const std::string t = trim(text);
  if (t.empty()) parse_fail(name, line, "empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) parse_fail(name, line, "invalid number '" + t + "'");
  return v;
}

struct Header {
  int dim = 0;
  bool has_velocity = false;
  bool has_attractor = false;
};

Header parse_header(const std::string& line, const std::string& name) {
  std::vector<std::string> cols = split(line);
  for (auto& c : cols) c = trim(c);
  if (cols.size() < 3 || cols[0] != "traj_id" || cols[1] != "t") {
    parse_fail(name, 1, "header must start with traj_id,t,x1");
  }
  Header h;
  std::size_t k = 2;
  while (k < cols.size() && cols[k] == "x" + std::to_string(h.dim + 1)) {
    ++h.dim;
    ++k;
  }
  if (h.dim == 0) parse_fail(name, 1, "no position columns x1..xn");
  if (k < cols.size() && cols[k] == "xd1") {
    for (int j = 0; j < h.dim; ++j, ++k) {
      if (k >= cols.size() || cols[k] != "xd" + std::to_string(j + 1)) {
        parse_fail(name, 1, "velocity columns must be xd1..xd" + std::to_string(h.dim));
      }
    }
    h.has_velocity = true;
  }
  if (k < cols.size() && cols[k] == "attractor") {
    h.has_attractor = true;
    ++k;
  }
  if (k != cols.size()) parse_fail(name, 1, "unexpected column '" + cols[k] + "'");
  return h;
}

void fill_velocities(TrajectoryDataset& data, bool lasa_targets) {
  std::map<int, std::vector<std::size_t>> by_traj;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    by_traj[data.samples[i].trajectory_id].push_back(i);
  }
  for (const auto& [id, idx] : by_traj) {
    std::vector<Vec> pos;
    std::vector<double> t;
    for (std::size_t i : idx) {
      pos.push_back(data.samples[i].x);
      t.push_back(data.samples[i].timestamp);
    }
    const std::vector<Vec> vel = compute_velocities(pos, t);
    for (std::size_t k = 0; k < idx.size(); ++k) data.samples[idx[k]].xdot = vel[k];
  }
  if (!lasa_targets) return;
  for (const auto& [id, idx] : by_traj) {
    Sample& last = data.samples[idx.back()];
    last.xdot = Vec::Zero(data.dim);
    last.attractor = true;
  }
}

}  // namespace

std::vector<int> TrajectoryDataset::trajectory_ids() const {
  std::vector<int> ids;
  for (const auto& s : samples) {
    if (std::find(ids.begin(), ids.end(), s.trajectory_id) == ids.end()) {
      ids.push_back(s.trajectory_id);
    }
  }
  return ids;
}

TrajectoryDataset TrajectoryDataset::select(const std::vector<int>& ids) const {
  TrajectoryDataset out;
  out.dim = dim;
  out.normalization = normalization;
  out.source = source;
  for (const auto& s : samples) {
    if (std::find(ids.begin(), ids.end(), s.trajectory_id) != ids.end()) {
      out.samples.push_back(s);
    }
  }
  return out;
}

void TrajectoryDataset::validate() const {
  if (dim < 1) throw ArgumentError("dataset dimension must be >= 1");
  std::unordered_map<int, double> last_time;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.x.size() != dim || s.xdot.size() != dim) {
      throw ArgumentError("sample " + std::to_string(i) + " has wrong dimension");
    }
    if (!s.x.allFinite() || !s.xdot.allFinite() || !std::isfinite(s.timestamp)) {
      throw ArgumentError("sample " + std::to_string(i) + " is not finite");
    }
    auto it = last_time.find(s.trajectory_id);
    if (it != last_time.end() && !(s.timestamp > it->second)) {
      throw ArgumentError("timestamps not strictly increasing in trajectory " +
                          std::to_string(s.trajectory_id) + " at sample " + std::to_string(i));
    }
    last_time[s.trajectory_id] = s.timestamp;
  }
}

TrajectoryDataset parse_trajectories(std::istream& in, const std::string& name,
                                     CsvFormat format) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(name, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Header header = parse_header(line, name);
  const std::size_t expected = 2 + static_cast<std::size_t>(header.dim) *
                                       (header.has_velocity ? 2 : 1) +
                               (header.has_attractor ? 1 : 0);

  TrajectoryDataset data;
  data.dim = header.dim;
  data.source = name;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != expected) {
      parse_fail(name, line_no,
                 "expected " + std::to_string(expected) + " fields, got " + std::to_string(f.size()));
    }
    Sample s;
    const double id = parse_double(f[0], name, line_no);
    if (id != std::floor(id)) parse_fail(name, line_no, "traj_id must be an integer");
    s.trajectory_id = static_cast<int>(id);
    s.timestamp = parse_double(f[1], name, line_no);
    s.x.resize(header.dim);
    for (int j = 0; j < header.dim; ++j) s.x(j) = parse_double(f[2 + j], name, line_no);
    std::size_t k = 2 + header.dim;
    if (header.has_velocity) {
      s.xdot.resize(header.dim);
      for (int j = 0; j < header.dim; ++j) s.xdot(j) = parse_double(f[k + j], name, line_no);
      k += header.dim;
    }
    if (header.has_attractor) {
      const std::string flag = trim(f[k]);
      if (flag != "0" && flag != "1") parse_fail(name, line_no, "attractor flag must be 0 or 1");
      s.attractor = flag == "1";
    }
    data.samples.push_back(std::move(s));
  }
  if (data.samples.empty()) parse_fail(name, line_no, "no samples");

  try {
    if (!header.has_velocity) {
      for (auto& s : data.samples) s.xdot = Vec::Zero(header.dim);
      data.validate();
      fill_velocities(data, format == CsvFormat::kLasa);
    } else if (format == CsvFormat::kLasa) {
      // Velocities from the file are kept, but the targets are still flagged.
      std::map<int, std::size_t> last;
      for (std::size_t i = 0; i < data.samples.size(); ++i) last[data.samples[i].trajectory_id] = i;
      for (const auto& [id, i] : last) {
        data.samples[i].xdot.setZero();
        data.samples[i].attractor = true;
      }
    }
    data.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(name + ": " + e.what());
  }
  return data;
}

TrajectoryDataset load_trajectories(const std::vector<std::filesystem::path>& files,
                                    CsvFormat format) {
  if (files.empty()) throw ArgumentError("no trajectory files given");
  TrajectoryDataset all;
  std::string sources;
  int id_offset = 0;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open file");
    TrajectoryDataset part = parse_trajectories(in, path.string(), format);
    if (all.dim == 0) {
      all.dim = part.dim;
    } else if (part.dim != all.dim) {
      throw ParseError(path.string() + ": dimension " + std::to_string(part.dim) +
                       " differs from earlier files (" + std::to_string(all.dim) + ")");
    }
    int max_id = id_offset - 1;
    for (auto& s : part.samples) {
      s.trajectory_id += id_offset;
      max_id = std::max(max_id, s.trajectory_id);
      all.samples.push_back(std::move(s));
    }
    id_offset = max_id + 1;
    if (!sources.empty()) sources += ";";
    sources += path.string();
  }
  all.source = sources;
  return all;
}

void write_trajectories(std::ostream& out, const TrajectoryDataset& data) {
  out << "traj_id,t";
  for (int j = 1; j <= data.dim; ++j) out << ",x" << j;
  for (int j = 1; j <= data.dim; ++j) out << ",xd" << j;
  out << ",attractor\n";
  char buf[64];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  };
  for (const auto& s : data.samples) {
    out << s.trajectory_id;
    put(s.timestamp);
    for (int j = 0; j < data.dim; ++j) put(s.x(j));
    for (int j = 0; j < data.dim; ++j) put(s.xdot(j));
    out << ',' << (s.attractor ? 1 : 0) << '\n';
  }
}

void save_trajectories(const std::filesystem::path& path, const TrajectoryDataset& data) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  write_trajectories(out, data);
}

std::vector<Vec> compute_velocities(const std::vector<Vec>& positions,
                                    const std::vector<double>& timestamps) {
  if (positions.size() != timestamps.size()) {
    throw ArgumentError("compute_velocities: positions and timestamps differ in length");
  }
  const std::size_t m = positions.size();
  std::vector<Vec> vel(m);
  if (m == 0) return vel;
  if (m == 1) {
    vel[0] = Vec::Zero(positions[0].size());
    return vel;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == m ? m - 1 : i + 1;
    const double dt = timestamps[hi] - timestamps[lo];
    if (!(dt > 0.0)) throw ArgumentError("compute_velocities: timestamps not increasing");
    vel[i] = (positions[hi] - positions[lo]) / dt;
  }
  return vel;
}

Normalization fit_normalization(const TrajectoryDataset& data, const Vec& equilibrium) {
  if (data.empty()) throw ArgumentError("cannot normalize an empty dataset");
  if (equilibrium.size() != data.dim) throw ArgumentError("equilibrium has wrong dimension");
  Vec extent = Vec::Zero(data.dim);
  for (const auto& s : data.samples) extent = extent.cwiseMax((s.x - equilibrium).cwiseAbs());
  Normalization norm;
  norm.offset = equilibrium;
  norm.scale = Vec::Ones(data.dim);
  for (int j = 0; j < data.dim; ++j) {
    if (extent(j) > 0.0) norm.scale(j) = 1.0 / extent(j);
  }
  return norm;
}

TrajectoryDataset apply_normalization(const TrajectoryDataset& data, const Normalization& norm) {
  if (data.normalization) throw ArgumentError("dataset is already normalized");
  TrajectoryDataset out = data;
  for (auto& s : out.samples) {
    s.x = norm.apply(s.x);
    s.xdot = norm.apply_velocity(s.xdot);
  }
  out.normalization = norm;
  return out;
}

TrajectoryDataset normalize(const TrajectoryDataset& data, const Vec& equilibrium) {
  return apply_normalization(data, fit_normalization(data, equilibrium));
}

TrajectoryDataset denormalize(const TrajectoryDataset& data) {
  if (!data.normalization) return data;
  TrajectoryDataset out = data;
  for (auto& s : out.samples) {
    s.x = data.normalization->invert(s.x);
    s.xdot = data.normalization->invert_velocity(s.xdot);
  }
  out.normalization.reset();
  return out;
}

Vec final_point_equilibrium(const TrajectoryDataset& data) {
  if (data.empty()) throw ArgumentError("empty dataset has no final points");
  std::map<int, std::size_t> last;
  for (std::size_t i = 0; i < data.samples.size(); ++i) last[data.samples[i].trajectory_id] = i;
  Vec sum = Vec::Zero(data.dim);
  for (const auto& [id, i] : last) sum += data.samples[i].x;
  return sum / static_cast<double>(last.size());
}

TrajectoryDataset subsample(const TrajectoryDataset& data, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> free;
  std::vector<char> keep(data.samples.size(), 0);
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    if (data.samples[i].attractor) {
      keep[i] = 1;
    } else {
      free.push_back(i);
    }
  }
  if (count < free.size()) {
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t r = k + uniform_index(rng, free.size() - k);
      std::swap(free[k], free[r]);
    }
    free.resize(count);
  }
  for (std::size_t i : free) keep[i] = 1;
  TrajectoryDataset out;
  out.dim = data.dim;
  out.normalization = data.normalization;
  out.source = data.source;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    if (keep[i]) out.samples.push_back(data.samples[i]);
  }
  return out;
}

TrajectoryDataset mark_final_samples(const TrajectoryDataset& data) {
  TrajectoryDataset out = data;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const bool last = i + 1 == out.samples.size() ||
                      out.samples[i + 1].trajectory_id != out.samples[i].trajectory_id;
    if (last) out.samples[i].attractor = true;
  }
  return out;
}

TrajectoryDataset unit_velocities(const TrajectoryDataset& data) {
  TrajectoryDataset out = data;
  for (Sample& s : out.samples) {
    const double norm = s.xdot.norm();
    if (norm > 0.0) s.xdot /= norm;
  }
  return out;
}

}  // namespace ddrbf
