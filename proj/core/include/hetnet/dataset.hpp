#pragma once

#include "hetnet/system_model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace hetnet {

/// Mean and population standard deviation of log10 channel gains.
struct NormalizationStats {
    double mean = 0.0;
    double std = 0.0;

    bool operator==(const NormalizationStats&) const = default;
};

/// One channel realization with the oracle's decision.
struct LabeledSample {
    std::uint64_t seed = 0;
    ChannelTensor channel;
    std::size_t assignment_class = 0;
    std::vector<double> power_w;  ///< [n][k], N*K entries
    double ee_opt = 0.0;

    bool operator==(const LabeledSample&) const = default;
};

struct DatasetMetadata {
    static constexpr int kFormatVersion = 1;

    int version = kFormatVersion;
    NetworkConfig config;
    std::uint64_t master_seed = 0;
    int grid_levels = 10;
    std::size_t requested = 0;
    std::size_t sample_count = 0;
    std::size_t skipped_infeasible = 0;
    NormalizationStats normalization;

    bool operator==(const DatasetMetadata&) const = default;
};

struct Dataset {
    DatasetMetadata metadata;
    std::vector<LabeledSample> samples;

    bool operator==(const Dataset&) const = default;
};

struct OracleParams {
    int grid_levels = 10;
    /// Worker threads for generation; 0 picks hardware concurrency. The
    /// result does not depend on this value.
    unsigned threads = 1;
};

/// Seed of sample i: derive_seed(master_seed, i).
std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t index);

NormalizationStats compute_normalization(const std::vector<LabeledSample>& samples);

/// Draws `count` realizations and labels each with exhaustive_solve. Realizations
/// without a feasible scheme are dropped and counted in metadata. `progress`,
/// when set, is called with the number of finished realizations.
Dataset generate_dataset(const NetworkConfig& cfg, std::size_t count, std::uint64_t master_seed,
                         const OracleParams& oracle, const std::function<void(std::size_t)>& progress = {});

/// Line 1 holds a JSON metadata object; each further line holds one sample
/// object. Doubles are written in shortest round-trip form.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Throws ParseError for malformed or truncated files, VersionError for a
/// foreign format version or when the embedded config differs from `expected`.
Dataset load_dataset(const std::filesystem::path& path, const std::optional<NetworkConfig>& expected = std::nullopt);

/// JSON text of a config (used in file headers).
std::string config_to_json(const NetworkConfig& cfg);
NetworkConfig config_from_json(const std::string& text);

} // namespace hetnet
