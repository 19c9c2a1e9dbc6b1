#pragma once

#include "hetnet/random.hpp"
#include "hetnet/system_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hetnet::solvers {

/// Subchannel assignment of one BS: owner[k] is the local user index holding
/// subchannel k, or -1 when the subchannel is left unused.
struct LocalAssignment {
    std::vector<int> owner;

    bool operator==(const LocalAssignment&) const = default;
};

/// Every indicator tensor that satisfies the subchannel constraints, in
/// canonical order. A joint assignment is a mixed-radix number over the
/// per-BS local indices with BS 0 as the most significant digit. Local
/// assignments are ordered lexicographically over owner[0..K) with -1 first.
class AssignmentCatalog {
public:
    explicit AssignmentCatalog(const NetworkConfig& cfg);

    std::size_t size() const { return size_; }
    const std::vector<std::vector<LocalAssignment>>& per_bs() const { return per_bs_; }

    std::vector<std::size_t> local_indices(std::size_t joint) const;
    std::size_t joint_index(std::span<const std::size_t> local) const;

    /// Writes the indicator of `joint` into `alloc`, clearing previous entries.
    void apply(std::size_t joint, Allocation& alloc) const;
    /// Allocation with the indicator of `joint` and zero power.
    Allocation allocation(std::size_t joint) const;
    /// Catalog index of the indicator in `alloc`, if it is a valid assignment.
    std::optional<std::size_t> index_of(const Allocation& alloc) const;

    const NetworkConfig& config() const { return cfg_; }

private:
    NetworkConfig cfg_;
    std::vector<std::vector<LocalAssignment>> per_bs_;
    std::size_t size_ = 1;
};

AssignmentCatalog enumerate_assignments(const NetworkConfig& cfg);

/// Discretized per-BS power vectors: every level vector in {0..L}^K with
/// sum <= L, in lexicographic order. Watts for BS n are level * P_max(n) / L.
struct PowerGrid {
    int levels = 1;
    std::vector<std::vector<int>> level_vectors;
    std::vector<double> p_max_w;

    std::size_t count() const { return level_vectors.size(); }
    double watts(int bs, int level) const { return static_cast<double>(level) * p_max_w[static_cast<std::size_t>(bs)] / levels; }
    std::vector<double> vector_w(int bs, std::size_t index) const;
};

PowerGrid power_grid(const NetworkConfig& cfg, int levels);

struct Solution {
    Allocation allocation;
    double ee = 0.0;
    bool feasible = false;
    std::uint64_t evaluations = 0;
    std::size_t assignment_index = 0;
};

/// Scans every (assignment, grid power) pair, keeping the feasible EE
/// maximizer. Ties go to lower total transmit power, then to the earlier pair
/// in canonical order (assignment-major, then power combination with BS 0's
/// grid index most significant). The reported EE is bit-identical to
/// energy_efficiency() on the returned allocation.
Solution exhaustive_solve(const ChannelTensor& h, const NetworkConfig& cfg, int levels, double se_target);

/// Same, with the SE target taken from `cfg`.
inline Solution exhaustive_solve(const ChannelTensor& h, const NetworkConfig& cfg, int levels) {
    return exhaustive_solve(h, cfg, levels, cfg.se_target_bps_per_hz);
}

/// Uniform catalog entry; per-subchannel powers Uniform[0, P_max), scaled
/// down proportionally when their sum exceeds P_max.
Allocation random_power(const ChannelTensor& h, const NetworkConfig& cfg, Rng& rng);

/// P_max/K on every subchannel with the catalog entry that maximizes EE at
/// that power (first index on ties).
Allocation max_power(const ChannelTensor& h, const NetworkConfig& cfg);

} // namespace hetnet::solvers
