#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ddrbf/base_function.hpp"
#include "ddrbf/dataset.hpp"
#include "ddrbf/diffeo_net.hpp"

namespace ddrbf {

/// Contents of a model file. `base` and `normalization` are optional
/// top-level fields that let `eval` and `export-grid` reproduce the training
/// coordinates without the original config.
struct ModelFile {
  DiffeoNet net;
  std::optional<BaseFunction> base;
  std::optional<Normalization> normalization;
};

/// JSON text with 17 significant digits per number:
/// {"version", "dim", "layers": [{"margin", "sigma", "centers", "weights"}]}.
/// Matrices are arrays of rows.
std::string serialize(const ModelFile& model);
std::string serialize(const DiffeoNet& net);

/// Throws ParseError on malformed text and ValidationError (naming layer and
/// entry) when a layer violates its box constraint.
ModelFile deserialize_model(std::string_view text);
DiffeoNet deserialize(std::string_view text);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace ddrbf
