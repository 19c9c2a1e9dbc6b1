#pragma once

#include "hetnet/nn/model.hpp"

#include <filesystem>

namespace hetnet::nn {

inline constexpr int kModelFormatVersion = 1;

/// Line 1: JSON header (architecture, layer list, scenario, normalization
/// statistics, grid levels, parameter count). Then one line per parameter
/// tensor: `w|b <layer> <count> <values...>` with values in shortest
/// round-trip decimal form.
void save_model(const Model& model, const std::filesystem::path& path);

/// Throws ParseError on malformed or truncated files and VersionError on an
/// unknown format version.
Model load_model(const std::filesystem::path& path);

} // namespace hetnet::nn
