#include "hetnet/dataset.hpp"

#include "hetnet/channel.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/random.hpp"
#include "hetnet/solvers.hpp"
#include "json_io.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

namespace hetnet {

namespace io {

nlohmann::json config_to_json_value(const NetworkConfig& cfg) {
    return {
        {"n_macro", cfg.n_macro},
        {"n_micro", cfg.n_micro},
        {"users_per_bs", cfg.users_per_bs},
        {"n_subchannels", cfg.n_subchannels},
        {"subchannel_bandwidth_hz", cfg.subchannel_bandwidth_hz},
        {"noise_power_w", cfg.noise_power_w},
        {"p_max_macro_w", cfg.p_max_macro_w},
        {"p_max_micro_w", cfg.p_max_micro_w},
        {"amplifier_inefficiency", cfg.amplifier_inefficiency},
        {"circuit_power_macro_w", cfg.circuit_power_macro_w},
        {"circuit_power_micro_w", cfg.circuit_power_micro_w},
        {"se_target_bps_per_hz", cfg.se_target_bps_per_hz},
        {"rate_formula", std::string(to_string(cfg.rate_formula))},
        {"geometry",
         {
             {"inter_cell_distance_km", cfg.geometry.inter_cell_distance_km},
             {"max_user_distance_km", cfg.geometry.max_user_distance_km},
             {"carrier_frequency_hz", cfg.geometry.carrier_frequency_hz},
             {"antenna_height_m", cfg.geometry.antenna_height_m},
         }},
    };
}

NetworkConfig config_from_json_value(const nlohmann::json& j) {
    try {
        NetworkConfig cfg;
        cfg.n_macro = j.at("n_macro").get<int>();
        cfg.n_micro = j.at("n_micro").get<int>();
        cfg.users_per_bs = j.at("users_per_bs").get<std::vector<int>>();
        cfg.n_subchannels = j.at("n_subchannels").get<int>();
        cfg.subchannel_bandwidth_hz = j.at("subchannel_bandwidth_hz").get<double>();
        cfg.noise_power_w = j.at("noise_power_w").get<double>();
        cfg.p_max_macro_w = j.at("p_max_macro_w").get<double>();
        cfg.p_max_micro_w = j.at("p_max_micro_w").get<double>();
        cfg.amplifier_inefficiency = j.at("amplifier_inefficiency").get<double>();
        cfg.circuit_power_macro_w = j.at("circuit_power_macro_w").get<double>();
        cfg.circuit_power_micro_w = j.at("circuit_power_micro_w").get<double>();
        cfg.se_target_bps_per_hz = j.at("se_target_bps_per_hz").get<double>();
        cfg.rate_formula = rate_formula_from_string(j.at("rate_formula").get<std::string>());
        const auto& g = j.at("geometry");
        cfg.geometry.inter_cell_distance_km = g.at("inter_cell_distance_km").get<double>();
        cfg.geometry.max_user_distance_km = g.at("max_user_distance_km").get<double>();
        cfg.geometry.carrier_frequency_hz = g.at("carrier_frequency_hz").get<double>();
        cfg.geometry.antenna_height_m = g.at("antenna_height_m").get<double>();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad config object: ") + e.what(), 1);
    }
}

} // namespace io

std::string config_to_json(const NetworkConfig& cfg) { return io::config_to_json_value(cfg).dump(); }

NetworkConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), 1, e.byte);
    }
    auto cfg = io::config_from_json_value(j);
    cfg.validate();
    return cfg;
}

std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t index) { return derive_seed(master_seed, index); }

NormalizationStats compute_normalization(const std::vector<LabeledSample>& samples) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : samples)
        for (double g : s.channel.gains()) {
            sum += std::log10(g);
            ++count;
        }
    if (count == 0) return {};
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (const auto& s : samples)
        for (double g : s.channel.gains()) {
            const double d = std::log10(g) - mean;
            sq += d * d;
        }
    return {mean, std::sqrt(sq / static_cast<double>(count))};
}

Dataset generate_dataset(const NetworkConfig& cfg, std::size_t count, std::uint64_t master_seed,
                         const OracleParams& oracle, const std::function<void(std::size_t)>& progress) {
    cfg.validate();
    if (oracle.grid_levels < 1) throw ContractError("oracle grid levels must be >= 1");

    std::vector<std::optional<LabeledSample>> slots(count);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            const auto seed = sample_seed(master_seed, i);
            auto h = channel::draw_realization(cfg, seed);
            auto sol = solvers::exhaustive_solve(h, cfg, oracle.grid_levels);
            if (sol.feasible)
                slots[i] = LabeledSample{seed, std::move(h), sol.assignment_index, std::move(sol.allocation.power_w), sol.ee};
            const auto finished = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(finished);
            }
        }
    };

    unsigned threads = oracle.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : oracle.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    Dataset ds;
    ds.metadata.config = cfg;
    ds.metadata.master_seed = master_seed;
    ds.metadata.grid_levels = oracle.grid_levels;
    ds.metadata.requested = count;
    for (auto& slot : slots) {
        if (slot)
            ds.samples.push_back(std::move(*slot));
        else
            ++ds.metadata.skipped_infeasible;
    }
    ds.metadata.sample_count = ds.samples.size();
    ds.metadata.normalization = compute_normalization(ds.samples);
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");

    const auto& m = ds.metadata;
    const nlohmann::json header = {
        {"format", "hetnet-dataset"},
        {"version", m.version},
        {"config", io::config_to_json_value(m.config)},
        {"master_seed", m.master_seed},
        {"grid_levels", m.grid_levels},
        {"requested", m.requested},
        {"sample_count", ds.samples.size()},
        {"skipped_infeasible", m.skipped_infeasible},
        {"normalization", {{"mean", m.normalization.mean}, {"std", m.normalization.std}}},
    };
    out << header.dump() << '\n';
    for (const auto& s : ds.samples) {
        const nlohmann::json row = {
            {"seed", s.seed},
            {"gains", std::vector<double>(s.channel.gains().begin(), s.channel.gains().end())},
            {"class", s.assignment_class},
            {"power_w", s.power_w},
            {"ee_opt", s.ee_opt},
        };
        out << row.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Dataset load_dataset(const std::filesystem::path& path, const std::optional<NetworkConfig>& expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset '" + path.string() + "'");

    auto parse_line = [](const std::string& text, std::size_t line) {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(e.what(), line, e.byte);
        }
    };

    std::string text;
    if (!std::getline(in, text)) throw ParseError("empty file, metadata header expected", 1);
    const auto header = parse_line(text, 1);
    if (!header.is_object()) throw ParseError("metadata header must be an object", 1);
    if (io::field<std::string>(header, "format", 1) != "hetnet-dataset") throw VersionError("not a hetnet dataset file");
    const int version = io::field<int>(header, "version", 1);
    if (version != DatasetMetadata::kFormatVersion)
        throw VersionError("dataset format version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(DatasetMetadata::kFormatVersion) + ")");

    Dataset ds;
    auto& m = ds.metadata;
    m.version = version;
    m.config = io::config_from_json_value(io::field<nlohmann::json>(header, "config", 1));
    try {
        m.config.validate();
    } catch (const ConfigError& e) {
        throw ParseError(std::string("invalid config: ") + e.what(), 1);
    }
    if (expected && !(*expected == m.config)) throw VersionError("dataset scenario does not match the expected config");
    m.master_seed = io::field<std::uint64_t>(header, "master_seed", 1);
    m.grid_levels = io::field<int>(header, "grid_levels", 1);
    m.requested = io::field<std::size_t>(header, "requested", 1);
    m.sample_count = io::field<std::size_t>(header, "sample_count", 1);
    m.skipped_infeasible = io::field<std::size_t>(header, "skipped_infeasible", 1);
    const auto norm = io::field<nlohmann::json>(header, "normalization", 1);
    m.normalization.mean = io::field<double>(norm, "mean", 1);
    m.normalization.std = io::field<double>(norm, "std", 1);

    const auto& cfg = m.config;
    const int N = cfg.n_bs();
    const int U = cfg.total_users();
    const int K = cfg.n_subchannels;
    const std::size_t classes = solvers::AssignmentCatalog(cfg).size();

    ds.samples.reserve(m.sample_count);
    std::size_t line = 1;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        if (ds.samples.size() == m.sample_count) throw ParseError("more samples than the header declares", line);
        const auto row = parse_line(text, line);
        LabeledSample s;
        s.seed = io::field<std::uint64_t>(row, "seed", line);
        auto gains = io::field<std::vector<double>>(row, "gains", line);
        if (gains.size() != static_cast<std::size_t>(N) * U * K) throw ParseError("gain count does not match scenario", line);
        for (double g : gains)
            if (!(g > 0.0) || !std::isfinite(g)) throw ParseError("channel gains must be positive and finite", line);
        s.channel = ChannelTensor(N, U, K, std::move(gains), s.seed);
        s.assignment_class = io::field<std::size_t>(row, "class", line);
        if (s.assignment_class >= classes) throw ParseError("assignment class out of range", line);
        s.power_w = io::field<std::vector<double>>(row, "power_w", line);
        if (s.power_w.size() != static_cast<std::size_t>(N) * K) throw ParseError("power count does not match scenario", line);
        s.ee_opt = io::field<double>(row, "ee_opt", line);
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.size() != m.sample_count)
        throw ParseError("truncated dataset: header declares " + std::to_string(m.sample_count) + " samples, found " +
                             std::to_string(ds.samples.size()),
                         line);
    return ds;
}

} // namespace hetnet
