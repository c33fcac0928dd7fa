#include "ddrbf/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "ddrbf/errors.hpp"

namespace ddrbf {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ParseError(where + ": must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ParseError(where + ": unknown key '" + item.key() + "'");
  }
}

double get_num(const json& j, const char* key, const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ParseError(where + "." + key + ": expected a number");
  return j[key].get<double>();
}

long long get_int(const json& j, const char* key, const std::string& where, long long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return j[key].get<long long>();
}

std::uint64_t get_seed(const json& j, const char* key, const std::string& where, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned()) {
    throw ParseError(where + "." + key + ": expected a non-negative integer");
  }
  return j[key].get<std::uint64_t>();
}

bool get_bool(const json& j, const char* key, const std::string& where, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ParseError(where + "." + key + ": expected true or false");
  return j[key].get<bool>();
}

std::string get_str(const json& j, const char* key, const std::string& where, std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ParseError(where + "." + key + ": expected a string");
  return j[key].get<std::string>();
}

Vec to_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(where + ": expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

BaseKind base_kind_from_string(const std::string& name, const std::string& where) {
  if (name == "point_attractor") return BaseKind::kPointAttractor;
  if (name == "multi_point") return BaseKind::kMultiPoint;
  if (name == "limit_cycle_ring") return BaseKind::kLimitCycleRing;
  throw ParseError(where + ": unknown base kind '" + name + "'");
}

template <typename F>
auto rethrow_as_parse(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ArgumentError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

DataConfig parse_data(const json& j) {
  const std::string where = "data";
  check_keys(j, where,
             {"format", "trajectories", "normalize", "subsample", "subsample_seed", "unit_velocity",
              "final_as_attractor"});
  DataConfig d;
  const std::string format = get_str(j, "format", where, "generic");
  if (format == "generic") {
    d.format = CsvFormat::kGeneric;
  } else if (format == "lasa") {
    d.format = CsvFormat::kLasa;
  } else {
    throw ParseError(where + ".format: expected 'generic' or 'lasa'");
  }
  if (j.contains("trajectories")) {
    if (!j["trajectories"].is_array()) throw ParseError(where + ".trajectories: expected an array");
    for (const auto& id : j["trajectories"]) {
      if (!id.is_number_integer()) throw ParseError(where + ".trajectories: expected integers");
      d.trajectories.push_back(id.get<int>());
    }
  }
  const std::string norm = get_str(j, "normalize", where, "none");
  if (norm == "none") {
    d.normalize = NormalizeMode::kNone;
  } else if (norm == "final_point") {
    d.normalize = NormalizeMode::kFinalPoint;
  } else if (norm == "origin") {
    d.normalize = NormalizeMode::kOrigin;
  } else {
    throw ParseError(where + ".normalize: expected 'none', 'final_point' or 'origin'");
  }
  const long long sub = get_int(j, "subsample", where, 0);
  if (sub < 0) throw ParseError(where + ".subsample: must be >= 0");
  d.subsample = static_cast<std::size_t>(sub);
  d.subsample_seed = get_seed(j, "subsample_seed", where, 0);
  d.unit_velocity = get_bool(j, "unit_velocity", where, false);
  d.final_as_attractor = get_bool(j, "final_as_attractor", where, false);
  return d;
}

BaseConfig parse_base_config(const json& j) {
  const std::string where = "base";
  check_keys(j, where, {"kind", "scale", "radius", "beta", "attractors"});
  BaseConfig b;
  b.kind = base_kind_from_string(get_str(j, "kind", where, "point_attractor"), where);
  b.scale = get_num(j, "scale", where, b.kind == BaseKind::kLimitCycleRing ? 1.0 : 0.1);
  b.radius = get_num(j, "radius", where, b.radius);
  b.beta = get_num(j, "beta", where, b.beta);
  if (j.contains("attractors")) {
    if (!j["attractors"].is_array()) throw ParseError(where + ".attractors: expected an array");
    for (const auto& a : j["attractors"]) b.attractors.push_back(to_vec(a, where + ".attractors"));
  }
  if (b.kind == BaseKind::kMultiPoint && b.attractors.empty()) {
    throw ParseError(where + ": multi_point needs attractors");
  }
  return b;
}

TrainConfig parse_train(const json& j) {
  const std::string where = "train";
  check_keys(j, where,
             {"horizon", "iterations", "neurons_per_layer", "sigma_policy", "kappa", "covariance",
              "kappa_schedule", "center_policy", "focus_active", "inner_step", "inner_max_steps",
              "inner_tol", "risk_mode", "hinge_margin", "attractor_value_weight", "margin", "seed",
              "stop_tolerance", "stop_at_zero_violations", "exclusion_radius", "batch_size"});
  TrainConfig c;
  c.horizon = static_cast<int>(get_int(j, "horizon", where, c.horizon));
  c.iterations = static_cast<int>(get_int(j, "iterations", where, c.iterations));
  c.neurons_per_layer = static_cast<int>(get_int(j, "neurons_per_layer", where, c.neurons_per_layer));
  rethrow_as_parse(where, [&] {
    c.sigma.policy = sigma_policy_from_string(
        get_str(j, "sigma_policy", where, to_string(c.sigma.policy)));
    c.center_policy = center_policy_from_string(
        get_str(j, "center_policy", where, to_string(c.center_policy)));
    c.risk_mode = risk_mode_from_string(get_str(j, "risk_mode", where, to_string(c.risk_mode)));
    return 0;
  });
  c.sigma.kappa = get_num(j, "kappa", where, c.sigma.kappa);
  if (j.contains("covariance")) {
    const json& cj = j["covariance"];
    if (!cj.is_array() || cj.empty()) throw ParseError(where + ".covariance: expected a matrix");
    const auto n = static_cast<Eigen::Index>(cj.size());
    c.sigma.covariance.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Vec row = to_vec(cj[static_cast<std::size_t>(r)], where + ".covariance");
      if (row.size() != n) throw ParseError(where + ".covariance: must be square");
      c.sigma.covariance.row(r) = row.transpose();
    }
  }
  if (j.contains("kappa_schedule")) {
    const Vec ks = to_vec(j["kappa_schedule"], where + ".kappa_schedule");
    c.kappa_schedule.assign(ks.data(), ks.data() + ks.size());
  }
  c.focus_active = get_bool(j, "focus_active", where, c.focus_active);
  c.inner.step = get_num(j, "inner_step", where, c.inner.step);
  c.inner.max_steps = static_cast<int>(get_int(j, "inner_max_steps", where, c.inner.max_steps));
  c.inner.tol = get_num(j, "inner_tol", where, c.inner.tol);
  c.hinge_margin = get_num(j, "hinge_margin", where, c.hinge_margin);
  c.attractor_value_weight = get_num(j, "attractor_value_weight", where, c.attractor_value_weight);
  c.margin = get_num(j, "margin", where, c.margin);
  c.seed = get_seed(j, "seed", where, c.seed);
  c.stop_tolerance = get_num(j, "stop_tolerance", where, c.stop_tolerance);
  c.stop_at_zero_violations =
      get_bool(j, "stop_at_zero_violations", where, c.stop_at_zero_violations);
  c.exclusion_radius = get_num(j, "exclusion_radius", where, c.exclusion_radius);
  const long long batch = get_int(j, "batch_size", where, 0);
  if (batch < 0) throw ParseError(where + ".batch_size: must be >= 0");
  c.batch_size = static_cast<std::size_t>(batch);
  rethrow_as_parse("config", [&] {
    c.validate();
    return 0;
  });
  return c;
}

}  // namespace

BaseFunction BaseConfig::make(int dim) const {
  switch (kind) {
    case BaseKind::kPointAttractor:
      return BaseFunction::point_attractor(dim, scale);
    case BaseKind::kLimitCycleRing:
      return BaseFunction::limit_cycle_ring(dim, radius, scale);
    case BaseKind::kMultiPoint:
      for (const Vec& a : attractors) {
        if (a.size() != dim) throw ArgumentError("base: attractor dimension differs from data");
      }
      return BaseFunction::multi_point(attractors, beta);
  }
  throw ArgumentError("base: unknown kind");
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw ParseError("manifest: missing config");
    j = j["config"];
  }
  check_keys(j, "config", {"data", "base", "train"});
  ExperimentConfig c;
  if (j.contains("data")) c.data = parse_data(j["data"]);
  if (j.contains("base")) c.base = parse_base_config(j["base"]);
  if (j.contains("train")) c.train = parse_train(j["train"]);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ordered_json config_to_json(const ExperimentConfig& config) {
  const DataConfig& d = config.data;
  ordered_json data;
  data["format"] = d.format == CsvFormat::kLasa ? "lasa" : "generic";
  data["trajectories"] = d.trajectories;
  data["normalize"] = d.normalize == NormalizeMode::kFinalPoint ? "final_point"
                      : d.normalize == NormalizeMode::kOrigin   ? "origin"
                                                                : "none";
  data["subsample"] = d.subsample;
  data["subsample_seed"] = d.subsample_seed;
  data["unit_velocity"] = d.unit_velocity;
  data["final_as_attractor"] = d.final_as_attractor;

  const BaseConfig& b = config.base;
  ordered_json base;
  base["kind"] = to_string(b.kind);
  base["scale"] = b.scale;
  base["radius"] = b.radius;
  base["beta"] = b.beta;
  base["attractors"] = ordered_json::array();
  for (const Vec& a : b.attractors) base["attractors"].push_back(vec_json(a));

  const TrainConfig& t = config.train;
  ordered_json train;
  train["horizon"] = t.horizon;
  train["iterations"] = t.iterations;
  train["neurons_per_layer"] = t.neurons_per_layer;
  train["sigma_policy"] = to_string(t.sigma.policy);
  train["kappa"] = t.sigma.kappa;
  if (t.sigma.covariance.size() > 0) {
    train["covariance"] = ordered_json::array();
    for (Eigen::Index r = 0; r < t.sigma.covariance.rows(); ++r) {
      train["covariance"].push_back(vec_json(t.sigma.covariance.row(r).transpose()));
    }
  }
  train["kappa_schedule"] = t.kappa_schedule;
  train["center_policy"] = to_string(t.center_policy);
  train["focus_active"] = t.focus_active;
  train["inner_step"] = t.inner.step;
  train["inner_max_steps"] = t.inner.max_steps;
  train["inner_tol"] = t.inner.tol;
  train["risk_mode"] = to_string(t.risk_mode);
  train["hinge_margin"] = t.hinge_margin;
  train["attractor_value_weight"] = t.attractor_value_weight;
  train["margin"] = t.margin;
  train["seed"] = t.seed;
  train["stop_tolerance"] = t.stop_tolerance;
  train["stop_at_zero_violations"] = t.stop_at_zero_violations;
  train["exclusion_radius"] = t.exclusion_radius;
  train["batch_size"] = t.batch_size;

  ordered_json out;
  out["data"] = std::move(data);
  out["base"] = std::move(base);
  out["train"] = std::move(train);
  return out;
}

BaseFunction parse_base_json(const json& j) {
  const std::string where = "base";
  check_keys(j, where, {"kind", "dim", "scale", "radius", "beta", "attractors"});
  const BaseConfig b = parse_base_config([&] {
    json copy = j;
    copy.erase("dim");
    return copy;
  }());
  if (b.kind == BaseKind::kMultiPoint) {
    const auto dim = static_cast<int>(b.attractors.front().size());
    return rethrow_as_parse(where, [&] { return b.make(dim); });
  }
  const long long dim = get_int(j, "dim", where, 0);
  if (dim < 1) throw ParseError(where + ": missing or invalid dim");
  return rethrow_as_parse(where, [&] { return b.make(static_cast<int>(dim)); });
}

ordered_json base_to_json(const BaseFunction& base) {
  ordered_json j;
  j["kind"] = to_string(base.kind());
  switch (base.kind()) {
    case BaseKind::kPointAttractor:
      j["dim"] = base.dim();
      j["scale"] = base.scale();
      break;
    case BaseKind::kLimitCycleRing:
      j["dim"] = base.dim();
      j["radius"] = base.radius();
      j["scale"] = base.scale();
      break;
    case BaseKind::kMultiPoint:
      j["beta"] = base.beta();
      j["attractors"] = ordered_json::array();
      for (const Vec& a : base.attractors()) j["attractors"].push_back(vec_json(a));
      break;
  }
  return j;
}

TrajectoryDataset prepare_training_data(const TrajectoryDataset& raw, const DataConfig& config) {
  TrajectoryDataset data = config.trajectories.empty() ? raw : raw.select(config.trajectories);
  if (data.empty()) throw ArgumentError("training data: no samples selected");
  if (config.final_as_attractor) data = mark_final_samples(data);
  if (config.normalize == NormalizeMode::kFinalPoint) {
    data = normalize(data, final_point_equilibrium(data));
  } else if (config.normalize == NormalizeMode::kOrigin) {
    data = normalize(data, Vec::Zero(data.dim));
  }
  if (config.subsample > 0) data = subsample(data, config.subsample, config.subsample_seed);
  if (config.unit_velocity) data = unit_velocities(data);
  return data;
}

}  // namespace ddrbf
