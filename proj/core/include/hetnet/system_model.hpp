#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hetnet {

/// Converts a power level in dBm to watts.
double dbm_to_watts(double dbm);

enum class RateFormula {
    shannon,        ///< B log2(1 + SINR)
    paper_literal,  ///< B log2(SINR), negative below SINR = 1, -inf at zero power
};

std::string_view to_string(RateFormula f);
RateFormula rate_formula_from_string(std::string_view s);

/// Deployment geometry. Carrier frequency and antenna height enter no formula;
/// they are kept so a config snapshot fully describes the scenario.
struct Geometry {
    double inter_cell_distance_km = 0.2;
    double max_user_distance_km = 0.12;
    double carrier_frequency_hz = 2.0e9;
    double antenna_height_m = 15.0;

    bool operator==(const Geometry&) const = default;
};

/// Scenario constants. BS indices [0, n_macro) are macrocells, the rest microcells.
/// Users are numbered globally, BS-major: the users of BS 0 come first.
struct NetworkConfig {
    int n_macro = 1;
    int n_micro = 2;
    std::vector<int> users_per_bs{2, 2, 2};
    int n_subchannels = 2;
    double subchannel_bandwidth_hz = 1.0e6;
    double noise_power_w = dbm_to_watts(-128.1);
    double p_max_macro_w = 12.0;
    double p_max_micro_w = 1.2;
    double amplifier_inefficiency = 0.3;
    double circuit_power_macro_w = 10.0;
    double circuit_power_micro_w = 0.1;
    double se_target_bps_per_hz = 0.0;
    RateFormula rate_formula = RateFormula::shannon;
    Geometry geometry;

    int n_bs() const { return n_macro + n_micro; }
    int total_users() const;
    int users_of(int bs) const { return users_per_bs.at(static_cast<std::size_t>(bs)); }
    /// Global index of the first user served by `bs`.
    int first_user(int bs) const;
    /// BS serving global user `u`.
    int serving_bs(int u) const;
    bool is_macro(int bs) const { return bs < n_macro; }
    double p_max(int bs) const { return is_macro(bs) ? p_max_macro_w : p_max_micro_w; }
    double circuit_power_w() const { return n_macro * circuit_power_macro_w + n_micro * circuit_power_micro_w; }
    double system_bandwidth_hz() const { return n_subchannels * subchannel_bandwidth_hz; }

    /// Throws ConfigError on the first violated invariant.
    void validate() const;

    bool operator==(const NetworkConfig&) const = default;
};

/// Channel gains h[n][u][k]: linear power gain from BS n to global user u on subchannel k.
class ChannelTensor {
public:
    ChannelTensor() = default;
    ChannelTensor(int n_bs, int n_users, int n_subchannels, std::uint64_t seed = 0);
    ChannelTensor(int n_bs, int n_users, int n_subchannels, std::vector<double> gains, std::uint64_t seed);

    double& at(int n, int u, int k) { return gains_[index(n, u, k)]; }
    double at(int n, int u, int k) const { return gains_[index(n, u, k)]; }

    int n_bs() const { return n_bs_; }
    int n_users() const { return n_users_; }
    int n_subchannels() const { return n_subchannels_; }
    std::uint64_t seed() const { return seed_; }
    void set_seed(std::uint64_t seed) { seed_ = seed; }
    std::span<const double> gains() const { return gains_; }
    std::span<double> gains() { return gains_; }

    bool matches(const NetworkConfig& cfg) const;

    bool operator==(const ChannelTensor&) const = default;

private:
    std::size_t index(int n, int u, int k) const {
        return (static_cast<std::size_t>(n) * n_users_ + u) * n_subchannels_ + k;
    }

    int n_bs_ = 0;
    int n_users_ = 0;
    int n_subchannels_ = 0;
    std::vector<double> gains_;
    std::uint64_t seed_ = 0;
};

/// Subchannel indicator l[n][u][k] (global user index) and transmit power p[n][k] in watts.
struct Allocation {
    int n_bs = 0;
    int n_users = 0;
    int n_subchannels = 0;
    std::vector<std::uint8_t> indicator;
    std::vector<double> power_w;

    static Allocation zeros(const NetworkConfig& cfg);

    std::uint8_t& l(int n, int u, int k) { return indicator[(static_cast<std::size_t>(n) * n_users + u) * n_subchannels + k]; }
    std::uint8_t l(int n, int u, int k) const { return indicator[(static_cast<std::size_t>(n) * n_users + u) * n_subchannels + k]; }
    double& p(int n, int k) { return power_w[static_cast<std::size_t>(n) * n_subchannels + k]; }
    double p(int n, int k) const { return power_w[static_cast<std::size_t>(n) * n_subchannels + k]; }

    bool matches(const NetworkConfig& cfg) const;

    bool operator==(const Allocation&) const = default;
};

struct Metrics {
    double throughput_bps = 0.0;
    double total_power_w = 0.0;
    double ee_bps_per_joule = 0.0;
    double se_bps_per_hz = 0.0;
};

/// Rate of global user u served by BS n on subchannel k. `power_w` is the
/// [n][k] matrix. Throws ContractError on out-of-range indices or negative power.
double link_rate(const ChannelTensor& h, std::span<const double> power_w, const NetworkConfig& cfg, int n, int u, int k);

/// Network throughput. Throws ConstraintError if `alloc` violates the subchannel constraints.
double throughput(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg);

/// Consumed power: transmit power scaled by 1/rho plus all circuit power.
double total_power(std::span<const double> power_w, const NetworkConfig& cfg);

double energy_efficiency(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg);
double spectral_efficiency(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg);
Metrics evaluate_metrics(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg);

enum class Constraint {
    none,
    indicator_domain,    ///< l not in {0,1} or set for a user the BS does not serve
    subchannel_exclusive, ///< a subchannel of a BS given to more than one user
    user_coverage,       ///< a user without any subchannel
    macro_power,         ///< macro BS power negative or over its budget
    micro_power,         ///< micro BS power negative or over its budget
    spectral_efficiency, ///< SE below target
};

std::string_view to_string(Constraint c);

struct Feasibility {
    Constraint violated = Constraint::none;
    int bs = -1;     ///< offending BS, when applicable
    int index = -1;  ///< offending user or subchannel, when applicable

    bool ok() const { return violated == Constraint::none; }
    explicit operator bool() const { return ok(); }
};

/// Checks subchannel, power and SE constraints in that order and reports the
/// first one violated. Power budgets allow a relative slack of 1e-9 for
/// rescaled vectors. Throws ContractError only on shape mismatch.
Feasibility check_feasible(const Allocation& alloc, const NetworkConfig& cfg, const ChannelTensor& h);

/// Subchannel constraints only; no channel needed.
Feasibility check_assignment(const Allocation& alloc, const NetworkConfig& cfg);

namespace detail {
/// Throughput without validation; sums l=1 links in (n, u, k) order.
double throughput_unchecked(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg);
/// p_tot given the summed transmit power.
inline double consumed_power(double transmit_sum_w, const NetworkConfig& cfg) {
    return transmit_sum_w / cfg.amplifier_inefficiency + cfg.circuit_power_w();
}
/// Power relative slack used by feasibility checks.
inline constexpr double kPowerSlack = 1e-9;
} // namespace detail

} // namespace hetnet
