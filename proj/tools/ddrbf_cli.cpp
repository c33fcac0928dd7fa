// Command-line front end: train, eval, simulate, export-grid, bench-lasa.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddrbf/benchmark.hpp"
#include "ddrbf/config.hpp"
#include "ddrbf/errors.hpp"
#include "ddrbf/lyapunov.hpp"
#include "ddrbf/model_io.hpp"
#include "ddrbf/systems.hpp"
#include "ddrbf/trainer.hpp"
#include "json.hpp"

#ifndef DDRBF_VERSION
#define DDRBF_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace ddrbf;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write to a sibling temporary, then rename over the target.
void write_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError(path.string() + ": cannot write file");
    out << text;
    if (!out.flush()) throw IoError(path.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

ordered_json input_entries(const std::vector<fs::path>& paths) {
  ordered_json inputs = ordered_json::array();
  for (const fs::path& p : paths) {
    inputs.push_back({{"path", p.string()}, {"sha256", sha256_hex(read_file(p))}});
  }
  return inputs;
}

fs::path manifest_path_for(const fs::path& output) { return output.string() + ".manifest.json"; }

void write_manifest(const fs::path& path, const std::string& command, ordered_json config,
                    std::uint64_t seed, const std::vector<fs::path>& inputs, ordered_json outputs,
                    Clock::time_point start) {
  ordered_json m;
  m["manifest_version"] = 1;
  m["command"] = command;
  m["code_version"] = DDRBF_VERSION;
  m["config"] = std::move(config);
  m["seed"] = seed;
  m["inputs"] = input_entries(inputs);
  m["outputs"] = std::move(outputs);
  m["wall_time_seconds"] = seconds_since(start);
  write_atomic(path, m.dump(2) + "\n");
}

Vec parse_point(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError(what + ": cannot parse '" + text + "' as comma-separated numbers");
    }
  }
  if (values.empty()) throw ArgumentError(what + ": empty point");
  return Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<fs::path> to_paths(const std::vector<std::string>& names) {
  return {names.begin(), names.end()};
}

CsvFormat format_from_string(const std::string& name) {
  if (name == "generic") return CsvFormat::kGeneric;
  if (name == "lasa") return CsvFormat::kLasa;
  throw ArgumentError("unknown data format '" + name + "'");
}

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// ---------------------------------------------------------------- train

struct TrainOverrides {
  CLI::Option* seed = nullptr;
  CLI::Option* iterations = nullptr;
  CLI::Option* horizon = nullptr;
  CLI::Option* neurons = nullptr;
  CLI::Option* kappa = nullptr;
  CLI::Option* hinge_margin = nullptr;
  CLI::Option* subsample = nullptr;
  CLI::Option* subsample_seed = nullptr;
  CLI::Option* format = nullptr;
  std::uint64_t seed_value = 0;
  int iterations_value = 0;
  int horizon_value = 0;
  int neurons_value = 0;
  double kappa_value = 0.0;
  double hinge_margin_value = 0.0;
  std::size_t subsample_value = 0;
  std::uint64_t subsample_seed_value = 0;
  std::string format_value;

  void add_to(CLI::App* cmd) {
    seed = cmd->add_option("--seed", seed_value, "Training seed (overrides train.seed)");
    iterations = cmd->add_option("--iterations", iterations_value, "Outer iterations (overrides train.iterations)");
    horizon = cmd->add_option("--horizon", horizon_value, "Horizon H (overrides train.horizon)");
    neurons = cmd->add_option("--neurons", neurons_value, "Neurons per layer (overrides train.neurons_per_layer)");
    kappa = cmd->add_option("--kappa", kappa_value, "Bandwidth multiplier (overrides train.kappa)");
    hinge_margin = cmd->add_option("--hinge-margin", hinge_margin_value, "Hinge margin (overrides train.hinge_margin)");
    subsample = cmd->add_option("--subsample", subsample_value, "Training subset size, 0 = all (overrides data.subsample)");
    subsample_seed = cmd->add_option("--subsample-seed", subsample_seed_value, "Subset seed (overrides data.subsample_seed)");
    format = cmd->add_option("--format", format_value, "Input CSV format: generic or lasa (overrides data.format)")
                 ->check(CLI::IsMember({"generic", "lasa"}));
  }

  void apply(ExperimentConfig& c) const {
    if (seed->count()) c.train.seed = seed_value;
    if (iterations->count()) c.train.iterations = iterations_value;
    if (horizon->count()) c.train.horizon = horizon_value;
    if (neurons->count()) c.train.neurons_per_layer = neurons_value;
    if (kappa->count()) {
      c.train.sigma.kappa = kappa_value;
      c.train.kappa_schedule.clear();
    }
    if (hinge_margin->count()) c.train.hinge_margin = hinge_margin_value;
    if (subsample->count()) c.data.subsample = subsample_value;
    if (subsample_seed->count()) c.data.subsample_seed = subsample_seed_value;
    if (format->count()) c.data.format = format_from_string(format_value);
    c.train.validate();
  }
};

struct TrainArgs {
  std::string config;
  std::vector<std::string> data;
  std::string out;
  std::string log;
  std::string manifest;
  bool quiet = false;
  TrainOverrides overrides;
};

int cmd_train(const TrainArgs& args) {
  const auto start = Clock::now();
  ExperimentConfig config = args.config.empty() ? ExperimentConfig{} : load_config(args.config);
  std::vector<fs::path> data_paths = to_paths(args.data);
  if (data_paths.empty() && !args.config.empty()) {
    // A manifest names its own inputs.
    const auto j = nlohmann::json::parse(read_file(args.config));
    if (j.contains("manifest_version") && j.contains("inputs")) {
      for (const auto& in : j["inputs"]) data_paths.emplace_back(in.at("path").get<std::string>());
    }
  }
  if (data_paths.empty()) throw ArgumentError("train: no data files given (--data)");
  args.overrides.apply(config);

  const TrajectoryDataset raw = load_trajectories(data_paths, config.data.format);
  const TrajectoryDataset data = prepare_training_data(raw, config.data);
  const BaseFunction base = config.base.make(data.dim);
  const TrainResult result = train(config.train, base, data);

  const fs::path out = args.out;
  const fs::path log_path = args.log.empty() ? fs::path(out.string() + ".log.jsonl") : fs::path(args.log);
  const fs::path manifest = args.manifest.empty() ? manifest_path_for(out) : fs::path(args.manifest);

  std::string log;
  for (const IterationRecord& r : result.log) {
    ordered_json line;
    line["iteration"] = r.iteration;
    line["risk"] = r.risk;
    line["objective"] = r.objective;
    line["violation_rate"] = r.violation_rate;
    line["neurons"] = r.neurons;
    line["sigma"] = r.sigma;
    line["kappa"] = r.kappa;
    line["accept_scale"] = r.accept_scale;
    line["inner_steps"] = r.inner_steps;
    line["wall_time"] = r.wall_time;
    log += line.dump() + "\n";
  }
  write_atomic(out, serialize(ModelFile{result.net, base, data.normalization}));
  write_atomic(log_path, log);
  write_manifest(manifest, "train", config_to_json(config), config.train.seed, data_paths,
                 {{"model", out.string()}, {"log", log_path.string()}}, start);

  if (!args.quiet) {
    const LyapunovCandidate cand(base, result.net);
    const ViolationReport rep = violation_rate(cand, data, config.train.exclusion_radius);
    std::printf("trained %d layers on %zu samples: violation rate %.2f%% -> %.2f%%\n",
                result.net.depth(), data.size(), result.initial_violation_rate, rep.violation_rate);
    std::printf("model: %s\n", out.string().c_str());
  }
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::vector<std::string> data;
  std::string format = "generic";
  std::vector<int> trajectories;
  double exclusion_radius = kDefaultExclusionRadius;
  std::string json_out;
  bool raw_coordinates = false;
};

int cmd_eval(const EvalArgs& args) {
  const auto start = Clock::now();
  const ModelFile model = load_model(args.model);
  if (!model.base) throw ArgumentError("eval: model file has no base function");
  TrajectoryDataset data = load_trajectories(to_paths(args.data), format_from_string(args.format));
  if (!args.trajectories.empty()) data = data.select(args.trajectories);
  if (model.normalization && !args.raw_coordinates) data = apply_normalization(data, *model.normalization);
  if (data.dim != model.net.dim()) throw ArgumentError("eval: data and model dimensions differ");

  const LyapunovCandidate cand(*model.base, model.net);
  const ViolationReport rep = violation_rate(cand, data, args.exclusion_radius);
  std::printf("points: %zu counted, %zu violating, %zu excluded\n", rep.total_points,
              rep.violating_points, rep.excluded_points);
  std::printf("violation rate: %.4f%%\n", rep.violation_rate);
  std::printf("margin (dV/dt): min %.6g mean %.6g max %.6g\n", rep.margin_min, rep.margin_mean,
              rep.margin_max);

  if (!args.json_out.empty()) {
    ordered_json report;
    report["model"] = args.model;
    report["exclusion_radius"] = args.exclusion_radius;
    report["total_points"] = rep.total_points;
    report["violating_points"] = rep.violating_points;
    report["excluded_points"] = rep.excluded_points;
    report["violation_rate"] = rep.violation_rate;
    report["margin"] = {{"min", rep.margin_min}, {"mean", rep.margin_mean}, {"max", rep.margin_max}};
    ordered_json points = ordered_json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Sample& s = data.samples[i];
      const double d = rep.directional_derivatives[i];
      ordered_json p;
      p["trajectory_id"] = s.trajectory_id;
      p["t"] = s.timestamp;
      p["x"] = vec_json(s.x);
      p["xdot"] = vec_json(s.xdot);
      p["vdot"] = std::isnan(d) ? ordered_json(nullptr) : ordered_json(d);
      p["status"] = std::isnan(d) ? "excluded" : (d >= 0.0 ? "violating" : "ok");
      points.push_back(std::move(p));
    }
    report["points"] = std::move(points);
    const fs::path out = args.json_out;
    write_atomic(out, report.dump(1) + "\n");
    ordered_json cfg;
    cfg["format"] = args.format;
    cfg["trajectories"] = args.trajectories;
    cfg["exclusion_radius"] = args.exclusion_radius;
    cfg["raw_coordinates"] = args.raw_coordinates;
    std::vector<fs::path> inputs{args.model};
    for (const auto& d : args.data) inputs.emplace_back(d);
    write_manifest(manifest_path_for(out), "eval", cfg, 0, inputs, {{"report", out.string()}},
                   start);
  }
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SystemArgs {
  std::string system = "two_attractor";
  double mu = 1.0;
  double swirl = 0.5;
  std::uint64_t warp_seed = 0;
  double rotation = 0.0;
  double step = 0.01;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--system", system, "linear, two_attractor, van_der_pol or warped_linear")
        ->check(CLI::IsMember({"linear", "two_attractor", "van_der_pol", "warped_linear"}));
    cmd->add_option("--mu", mu, "Van der Pol damping")->capture_default_str();
    cmd->add_option("--swirl", swirl, "Two-attractor rotational part")->capture_default_str();
    cmd->add_option("--warp-seed", warp_seed, "Warped-linear warp seed")->capture_default_str();
    cmd->add_option("--rotation", rotation, "Warped-linear rotation")->capture_default_str();
    cmd->add_option("--step", step, "RK4 step")->capture_default_str();
  }

  SyntheticSystem make() const {
    SyntheticSystem s;
    switch (system_kind_from_string(system)) {
      case SystemKind::kLinear:
        s = make_linear(step);
        break;
      case SystemKind::kTwoAttractor:
        s = make_two_attractor(step);
        s.swirl = swirl;
        break;
      case SystemKind::kVanDerPol:
        s = make_van_der_pol(mu, step);
        break;
      case SystemKind::kWarpedLinear:
        s = make_warped_linear(warp_seed, rotation).system;
        s.step = step;
        break;
    }
    return s;
  }

  ordered_json to_json() const {
    return {{"system", system}, {"mu", mu},       {"swirl", swirl},
            {"warp_seed", warp_seed}, {"rotation", rotation}, {"step", step}};
  }
};

struct SimulateArgs {
  SystemArgs system;
  std::vector<std::string> initial;
  int ring = 0;
  double ring_radius = 1.0;
  double ring_phase = 0.0;
  double corners = 0.0;
  int cycle_samples = 0;
  double duration = 0.0;
  int record_every = 1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  const auto start = Clock::now();
  SyntheticSystem sys = args.system.make();
  sys.record_every = args.record_every;

  std::vector<Vec> states;
  for (const std::string& s : args.initial) states.push_back(parse_point(s, "--initial"));
  for (int k = 0; k < args.ring; ++k) {
    const double a = args.ring_phase + 2.0 * M_PI * k / args.ring;
    states.push_back((Vec(2) << args.ring_radius * std::cos(a), args.ring_radius * std::sin(a)).finished());
  }
  if (args.corners > 0.0) {
    for (const Vec& c : corner_states(args.corners)) states.push_back(c);
  }
  if (states.empty() && args.cycle_samples == 0) {
    if (sys.kind == SystemKind::kTwoAttractor) {
      states = two_attractor_initial_states();
    } else {
      throw ArgumentError("simulate: no initial states (--initial, --ring or --corners)");
    }
  }

  TrajectoryDataset data;
  data.dim = sys.dim();
  data.source = std::string("simulate:") + to_string(sys.kind);
  if (!states.empty()) data = simulate(sys, states, args.duration);
  if (args.cycle_samples > 0) {
    if (sys.kind != SystemKind::kVanDerPol) {
      throw ArgumentError("simulate: --cycle-samples needs the van_der_pol system");
    }
    const int id = static_cast<int>(states.size()) + 1;
    const LimitCycleSamples cycle = sample_limit_cycle(sys, args.cycle_samples, id);
    for (const Sample& s : cycle.samples.samples) data.samples.push_back(s);
  }

  std::ostringstream csv;
  write_trajectories(csv, data);
  const fs::path out = args.out;
  write_atomic(out, csv.str());
  ordered_json cfg = args.system.to_json();
  cfg["initial"] = args.initial;
  cfg["ring"] = args.ring;
  cfg["ring_radius"] = args.ring_radius;
  cfg["ring_phase"] = args.ring_phase;
  cfg["corners"] = args.corners;
  cfg["cycle_samples"] = args.cycle_samples;
  cfg["duration"] = args.duration;
  cfg["record_every"] = args.record_every;
  write_manifest(manifest_path_for(out), "simulate", cfg, args.system.warp_seed, {},
                 {{"data", out.string()}}, start);
  std::printf("wrote %zu samples in %zu trajectories to %s\n", data.size(),
              data.trajectory_ids().size(), out.string().c_str());
  return kOk;
}

// ---------------------------------------------------------------- export-grid

struct ExportArgs {
  std::string model;
  std::string lo;
  std::string hi;
  std::vector<int> resolution;
  std::string out;
  bool with_field = false;
  SystemArgs system;
};

int cmd_export(const ExportArgs& args) {
  const auto start = Clock::now();
  const ModelFile model = load_model(args.model);
  if (!model.base) throw ArgumentError("export-grid: model file has no base function");
  const Vec lo = parse_point(args.lo, "--lo");
  const Vec hi = parse_point(args.hi, "--hi");
  GridSpec spec;
  spec.lo.assign(lo.data(), lo.data() + lo.size());
  spec.hi.assign(hi.data(), hi.data() + hi.size());
  spec.resolution = args.resolution;
  if (spec.resolution.size() == 1) spec.resolution.assign(spec.lo.size(), args.resolution.front());

  const LyapunovCandidate cand(*model.base, model.net);
  VectorField field;
  SyntheticSystem sys;
  if (args.with_field) {
    sys = args.system.make();
    field = [&sys](const Vec& x) { return sys.field(x); };
  }
  const GridData grid = export_grid(cand, spec, field);
  std::ostringstream text;
  write_grid(text, grid);
  const fs::path out = args.out;
  write_atomic(out, text.str());
  ordered_json cfg;
  cfg["lo"] = spec.lo;
  cfg["hi"] = spec.hi;
  cfg["resolution"] = spec.resolution;
  cfg["field"] = args.with_field ? args.system.to_json() : ordered_json(nullptr);
  write_manifest(manifest_path_for(out), "export-grid", cfg, 0, {args.model},
                 {{"grid", out.string()}}, start);
  std::printf("wrote %zu grid nodes to %s\n", grid.nodes.size(), out.string().c_str());
  return kOk;
}

// ---------------------------------------------------------------- bench-lasa

struct BenchArgs {
  std::string config;
  std::string data_dir = "data/lasa";
  std::vector<std::string> shapes{"Angle", "CShape", "Zshape", "Sine"};
  int runs = 5;
  std::string out;
  std::string models_dir;
  TrainOverrides overrides;
};

int cmd_bench(const BenchArgs& args) {
  const auto start = Clock::now();
  ExperimentConfig config = args.config.empty() ? ExperimentConfig{} : load_config(args.config);
  config.data.format = CsvFormat::kLasa;
  args.overrides.apply(config);

  ordered_json shapes = ordered_json::array();
  std::vector<fs::path> inputs;
  if (!args.config.empty()) inputs.emplace_back(args.config);
  std::printf("%-12s %16s %10s %8s\n", "shape", "violations [%]", "identity", "time");
  for (const std::string& shape : args.shapes) {
    const auto t0 = Clock::now();
    const fs::path file = fs::path(args.data_dir) / (shape + ".csv");
    inputs.push_back(file);
    const TrajectoryDataset demos = load_trajectories({file}, CsvFormat::kLasa);
    const BenchResult r = run_demo_benchmark(demos, config, args.runs, shape);
    std::printf("%-12s %7.2f +- %5.2f %10.2f %7.1fs\n", shape.c_str(), r.mean, r.stddev,
                r.identity_violation_rate, seconds_since(t0));
    std::fflush(stdout);

    ordered_json s;
    s["shape"] = shape;
    s["mean"] = r.mean;
    s["std"] = r.stddev;
    s["identity_violation_rate"] = r.identity_violation_rate;
    ordered_json runs = ordered_json::array();
    for (std::size_t k = 0; k < r.runs.size(); ++k) {
      const BenchRun& run = r.runs[k];
      runs.push_back({{"seed", run.seed},
                      {"layers", run.layers},
                      {"train_violation_rate", run.train_violation_rate},
                      {"test_violation_rate", run.test_violation_rate}});
      if (!args.models_dir.empty()) {
        const fs::path model = fs::path(args.models_dir) / (shape + "_run" + std::to_string(k) + ".json");
        write_atomic(model, serialize(ModelFile{run.net, r.base, r.normalization}));
      }
    }
    s["runs"] = std::move(runs);
    shapes.push_back(std::move(s));
  }

  if (!args.out.empty()) {
    ordered_json report;
    report["runs_per_shape"] = args.runs;
    report["shapes"] = std::move(shapes);
    const fs::path out = args.out;
    write_atomic(out, report.dump(2) + "\n");
    write_manifest(manifest_path_for(out), "bench-lasa", config_to_json(config), config.train.seed,
                   inputs, {{"report", out.string()}}, start);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov function learning with deep diffeomorphic RBF networks"};
  app.set_version_flag("--version", DDRBF_VERSION);
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a candidate on trajectory data");
  train_cmd->add_option("--config", train_args.config, "JSON config file or run manifest")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--data", train_args.data, "Trajectory CSV file(s); taken from the manifest if omitted");
  train_cmd->add_option("--out", train_args.out, "Output model file")->required();
  train_cmd->add_option("--log", train_args.log, "JSON-lines training log (default <out>.log.jsonl)");
  train_cmd->add_option("--manifest", train_args.manifest, "Run manifest (default <out>.manifest.json)");
  train_cmd->add_flag("--quiet", train_args.quiet, "No summary on stdout");
  train_args.overrides.add_to(train_cmd);

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Violation report of a model on trajectory data");
  eval_cmd->add_option("--model", eval_args.model, "Model file")->required();
  eval_cmd->add_option("--data", eval_args.data, "Trajectory CSV file(s)")->required();
  eval_cmd->add_option("--format", eval_args.format, "generic or lasa")
      ->check(CLI::IsMember({"generic", "lasa"}))
      ->capture_default_str();
  eval_cmd->add_option("--trajectories", eval_args.trajectories, "Only these trajectory ids");
  eval_cmd->add_option("--exclusion-radius", eval_args.exclusion_radius,
                       "Skip samples whose image is this close to the attractor set")
      ->capture_default_str();
  eval_cmd->add_option("--json", eval_args.json_out, "Machine-readable report with per-point dV/dt");
  eval_cmd->add_flag("--raw-coordinates", eval_args.raw_coordinates,
                     "Do not apply the model's stored normalization to the data");

  SimulateArgs sim_args;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Simulate a benchmark system to a CSV dataset");
  sim_args.system.add_to(sim_cmd);
  sim_cmd->add_option("--initial", sim_args.initial, "Initial state 'x1,x2' (repeatable)");
  sim_cmd->add_option("--ring", sim_args.ring, "Add this many initial states on a circle");
  sim_cmd->add_option("--ring-radius", sim_args.ring_radius, "Circle radius")->capture_default_str();
  sim_cmd->add_option("--ring-phase", sim_args.ring_phase, "Angle of the first circle state")->capture_default_str();
  sim_cmd->add_option("--corners", sim_args.corners, "Add the four corners (+-e, +-e)");
  sim_cmd->add_option("--cycle-samples", sim_args.cycle_samples,
                      "Van der Pol: add this many attractor-flagged limit-cycle samples");
  sim_cmd->add_option("--duration", sim_args.duration, "Simulated time (system default if omitted)");
  sim_cmd->add_option("--record-every", sim_args.record_every, "Keep every k-th RK4 state")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--out", sim_args.out, "Output CSV")->required();

  ExportArgs export_args;
  CLI::App* export_cmd = app.add_subcommand("export-grid", "Tabulate V and |grad V| on a grid");
  export_cmd->add_option("--model", export_args.model, "Model file")->required();
  export_cmd->add_option("--lo", export_args.lo, "Lower corner 'a,b'")->required();
  export_cmd->add_option("--hi", export_args.hi, "Upper corner 'a,b'")->required();
  export_cmd->add_option("--resolution", export_args.resolution, "Nodes per axis (one value or one per axis)")
      ->required();
  export_cmd->add_option("--out", export_args.out, "Output grid file")->required();
  export_cmd->add_flag("--with-field", export_args.with_field,
                       "Also tabulate dV/dt along the system selected with --system");
  export_args.system.add_to(export_cmd);

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("bench-lasa", "Train on demonstration 1, evaluate on the rest");
  bench_cmd->add_option("--config", bench_args.config, "JSON config file")->check(CLI::ExistingFile);
  bench_cmd->add_option("--data-dir", bench_args.data_dir, "Directory with <shape>.csv")->capture_default_str();
  bench_cmd->add_option("--shape", bench_args.shapes, "Shape name (repeatable)")->capture_default_str();
  bench_cmd->add_option("--runs", bench_args.runs, "Runs (seeds) per shape")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "JSON report");
  bench_cmd->add_option("--models-dir", bench_args.models_dir, "Also save every trained model here");
  bench_args.overrides.add_to(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*sim_cmd) return cmd_simulate(sim_args);
    if (*export_cmd) return cmd_export(export_args);
    if (*bench_cmd) return cmd_bench(bench_args);
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumeric;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const IoError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
