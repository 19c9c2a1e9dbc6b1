#include "hetnet/nn/allocator.hpp"

#include "hetnet/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hetnet::nn {

std::vector<double> preprocess_input(const ChannelTensor& h, const NormalizationStats& stats) {
    if (!(stats.std > 0.0) || !std::isfinite(stats.std) || !std::isfinite(stats.mean))
        throw PreprocessError("normalization std must be positive and finite");
    const int N = h.n_bs(), U = h.n_users(), K = h.n_subchannels();
    std::vector<double> out(static_cast<std::size_t>(N) * K * U);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < K; ++k)
            for (int u = 0; u < U; ++u)
                out[(static_cast<std::size_t>(n) * K + k) * U + u] = (std::log10(h.at(n, u, k)) - stats.mean) / stats.std;
    return out;
}

std::vector<double> normalize_power(std::span<const double> power_w, const NetworkConfig& cfg) {
    const int K = cfg.n_subchannels;
    if (power_w.size() != static_cast<std::size_t>(cfg.n_bs()) * K) throw ContractError("power vector has wrong length");
    std::vector<double> out(power_w.size());
    for (int n = 0; n < cfg.n_bs(); ++n)
        for (int k = 0; k < K; ++k) {
            const auto i = static_cast<std::size_t>(n) * K + k;
            out[i] = power_w[i] / cfg.p_max(n);
        }
    return out;
}

std::vector<double> scale_power(std::span<const double> power_norm, const NetworkConfig& cfg) {
    const int K = cfg.n_subchannels;
    if (power_norm.size() != static_cast<std::size_t>(cfg.n_bs()) * K) throw ContractError("power vector has wrong length");
    std::vector<double> out(power_norm.size());
    for (int n = 0; n < cfg.n_bs(); ++n)
        for (int k = 0; k < K; ++k) {
            const auto i = static_cast<std::size_t>(n) * K + k;
            const double t = std::isnan(power_norm[i]) ? 0.0 : std::clamp(power_norm[i], 0.0, 1.0);
            out[i] = t * cfg.p_max(n);
        }
    return out;
}

Allocation decode_allocation(const ModelOutput& output, const NetworkConfig& cfg, const solvers::AssignmentCatalog& catalog,
                             int grid_levels) {
    if (output.class_probs.size() != catalog.size()) throw ContractError("class head width does not match the catalog");
    if (grid_levels < 0) throw ContractError("grid levels must be >= 0");
    const int K = cfg.n_subchannels;

    std::size_t best = 0;
    for (std::size_t a = 1; a < output.class_probs.size(); ++a)
        if (output.class_probs[a] > output.class_probs[best]) best = a;

    auto alloc = catalog.allocation(best);
    alloc.power_w = scale_power(output.power_norm, cfg);

    for (int n = 0; n < cfg.n_bs(); ++n) {
        const double p_max = cfg.p_max(n);
        double* p = alloc.power_w.data() + static_cast<std::size_t>(n) * K;
        double sum = 0.0;
        for (int k = 0; k < K; ++k) sum += p[k];
        if (sum > p_max)
            for (int k = 0; k < K; ++k) p[k] *= p_max / sum;

        if (grid_levels == 0) continue;
        std::vector<int> level(static_cast<std::size_t>(K));
        std::vector<double> exact(static_cast<std::size_t>(K));
        int total = 0;
        for (int k = 0; k < K; ++k) {
            exact[static_cast<std::size_t>(k)] = p[k] / p_max * grid_levels;
            level[static_cast<std::size_t>(k)] = static_cast<int>(std::lround(exact[static_cast<std::size_t>(k)]));
            total += level[static_cast<std::size_t>(k)];
        }
        while (total > grid_levels) {
            int pick = -1;
            double worst = 0.0;
            for (int k = 0; k < K; ++k) {
                if (level[static_cast<std::size_t>(k)] == 0) continue;
                const double excess = level[static_cast<std::size_t>(k)] - exact[static_cast<std::size_t>(k)];
                if (pick < 0 || excess > worst) {
                    pick = k;
                    worst = excess;
                }
            }
            --level[static_cast<std::size_t>(pick)];
            --total;
        }
        // Same expression as the oracle's grid so snapped powers are bit-identical.
        for (int k = 0; k < K; ++k) p[k] = static_cast<double>(level[static_cast<std::size_t>(k)]) * p_max / grid_levels;
    }
    return alloc;
}

Allocation infer_allocation(const Model& model, const ChannelTensor& h, const NetworkConfig& cfg,
                            const solvers::AssignmentCatalog& catalog) {
    const auto input = preprocess_input(h, model.normalization);
    return decode_allocation(forward(model, input), cfg, catalog, model.grid_levels);
}

} // namespace hetnet::nn
