#include "ddrbf/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddrbf/config.hpp"
#include "ddrbf/errors.hpp"
#include "json.hpp"

namespace ddrbf {
namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec_text(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v(i));
  return s + "]";
}

std::string mat_text(const Mat& m, const std::string& indent) {
  std::string s = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    s += (r ? ",\n" + indent + " " : "") + vec_text(m.row(r).transpose());
  }
  return s + "]";
}

std::string base_text(const BaseFunction& b) {
  std::string s = "{\"kind\": \"" + std::string(to_string(b.kind())) + "\"";
  switch (b.kind()) {
    case BaseKind::kPointAttractor:
      s += ", \"dim\": " + std::to_string(b.dim()) + ", \"scale\": " + num(b.scale());
      break;
    case BaseKind::kLimitCycleRing:
      s += ", \"dim\": " + std::to_string(b.dim()) + ", \"radius\": " + num(b.radius()) +
           ", \"scale\": " + num(b.scale());
      break;
    case BaseKind::kMultiPoint: {
      s += ", \"beta\": " + num(b.beta()) + ", \"attractors\": [";
      for (std::size_t i = 0; i < b.attractors().size(); ++i) {
        s += (i ? ", " : "") + vec_text(b.attractors()[i]);
      }
      s += "]";
      break;
    }
  }
  return s + "}";
}

Vec json_vec(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(what + " must contain numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat json_mat(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ParseError(what + " must have " + std::to_string(rows) + " rows");
  }
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec row = json_vec(j[static_cast<std::size_t>(r)], what);
    if (row.size() != cols) throw ParseError(what + " must have " + std::to_string(cols) + " columns");
    m.row(r) = row.transpose();
  }
  return m;
}

double json_num(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ParseError(what + ": missing numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

}  // namespace

std::string serialize(const ModelFile& model) {
  const DiffeoNet& net = model.net;
  std::string s = "{\n";
  s += "  \"version\": " + std::to_string(DiffeoNet::kFormatVersion) + ",\n";
  s += "  \"dim\": " + std::to_string(net.dim()) + ",\n";
  if (model.base) s += "  \"base\": " + base_text(*model.base) + ",\n";
  if (model.normalization) {
    s += "  \"normalization\": {\"offset\": " + vec_text(model.normalization->offset) +
         ", \"scale\": " + vec_text(model.normalization->scale) + "},\n";
  }
  s += "  \"layers\": [";
  const std::string indent = "      ";
  for (std::size_t t = 0; t < net.layers().size(); ++t) {
    const RbfLayer& layer = net.layers()[t];
    s += t ? ",\n    {\n" : "\n    {\n";
    s += indent + "\"margin\": " + num(layer.margin()) + ",\n";
    s += indent + "\"sigma\": " + mat_text(layer.spec().covariance(), indent + "          ") + ",\n";
    s += indent + "\"centers\": " + mat_text(layer.centers(), indent + "            ") + ",\n";
    s += indent + "\"weights\": " + mat_text(layer.weights(), indent + "            ") + "\n";
    s += "    }";
  }
  s += net.layers().empty() ? "]\n" : "\n  ]\n";
  return s + "}\n";
}

std::string serialize(const DiffeoNet& net) { return serialize(ModelFile{net, {}, {}}); }

ModelFile deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("model file: top level must be an object");
  const double version = json_num(j, "version", "model file");
  if (version != DiffeoNet::kFormatVersion) {
    throw ParseError("model file: unsupported version " + num(version));
  }
  const double dim_value = json_num(j, "dim", "model file");
  if (dim_value < 1 || dim_value != static_cast<int>(dim_value)) {
    throw ParseError("model file: dim must be a positive integer");
  }
  const int dim = static_cast<int>(dim_value);
  if (!j.contains("layers") || !j["layers"].is_array()) {
    throw ParseError("model file: missing layers array");
  }
  DiffeoNet net(dim);
  for (std::size_t t = 0; t < j["layers"].size(); ++t) {
    const json& lj = j["layers"][t];
    const std::string where = "layer " + std::to_string(t);
    if (!lj.is_object()) throw ParseError(where + ": must be an object");
    if (!lj.contains("centers") || !lj["centers"].is_array() || lj["centers"].empty()) {
      throw ParseError(where + ": missing centers");
    }
    const auto count = static_cast<Eigen::Index>(lj["centers"].size());
    Mat sigma = json_mat(lj.value("sigma", json()), dim, dim, where + " sigma");
    Mat centers = json_mat(lj["centers"], count, dim, where + " centers");
    Mat weights = json_mat(lj.value("weights", json()), dim, count, where + " weights");
    const double margin = json_num(lj, "margin", where);
    try {
      net.push_back(RbfLayer(KernelSpec(std::move(sigma)), std::move(centers), std::move(weights),
                             margin));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const ArgumentError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  ModelFile model{std::move(net), {}, {}};
  if (j.contains("base")) {
    model.base = parse_base_json(j["base"]);
    if (model.base->dim() != dim) throw ParseError("model file: base dimension mismatch");
  }
  if (j.contains("normalization")) {
    const json& nj = j["normalization"];
    if (!nj.is_object() || !nj.contains("offset") || !nj.contains("scale")) {
      throw ParseError("model file: normalization needs offset and scale");
    }
    Normalization norm{json_vec(nj["offset"], "normalization offset"),
                       json_vec(nj["scale"], "normalization scale")};
    if (norm.offset.size() != dim || norm.scale.size() != dim || (norm.scale.array() <= 0.0).any()) {
      throw ParseError("model file: invalid normalization");
    }
    model.normalization = std::move(norm);
  }
  return model;
}

DiffeoNet deserialize(std::string_view text) { return deserialize_model(text).net; }

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  const std::string text = serialize(model);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ArgumentError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ArgumentError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open model file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return deserialize_model(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace ddrbf
