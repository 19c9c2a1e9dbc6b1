#pragma once

#include "hetnet/dataset.hpp"
#include "hetnet/nn/model.hpp"
#include "hetnet/solvers.hpp"
#include "hetnet/system_model.hpp"

#include <span>
#include <vector>

namespace hetnet::nn {

/// Standardized log10 gains as an (N*K) x U matrix, row-major: entry
/// (n*K + k, u) = (log10 h[n][u][k] - mean) / std. Throws PreprocessError when
/// std is not positive.
std::vector<double> preprocess_input(const ChannelTensor& h, const NormalizationStats& stats);

/// p[n][k] / P_max(n).
std::vector<double> normalize_power(std::span<const double> power_w, const NetworkConfig& cfg);

/// clamp(t, 0, 1) * P_max(n), without the per-BS budget projection.
std::vector<double> scale_power(std::span<const double> power_norm, const NetworkConfig& cfg);

/// Turns a network output into a valid allocation: the catalog entry of the
/// most probable class (first on ties) and clamped, scaled powers, with each
/// BS's vector rescaled proportionally onto P_max when it overshoots.
/// With grid_levels > 0 the powers are then rounded to the nearest level of
/// that grid, trimming the entries rounded up the most while a BS exceeds L.
Allocation decode_allocation(const ModelOutput& output, const NetworkConfig& cfg, const solvers::AssignmentCatalog& catalog,
                             int grid_levels = 0);

/// preprocess, forward and decode with the model's own normalization and grid.
Allocation infer_allocation(const Model& model, const ChannelTensor& h, const NetworkConfig& cfg,
                            const solvers::AssignmentCatalog& catalog);

} // namespace hetnet::nn
