#include "hetnet/system_model.hpp"

#include "hetnet/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace hetnet {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::string_view to_string(RateFormula f) {
    switch (f) {
    case RateFormula::shannon: return "shannon";
    case RateFormula::paper_literal: return "paper_literal";
    }
    return "unknown";
}

RateFormula rate_formula_from_string(std::string_view s) {
    if (s == "shannon") return RateFormula::shannon;
    if (s == "paper_literal") return RateFormula::paper_literal;
    throw ConfigError("unknown rate formula '" + std::string(s) + "'");
}

int NetworkConfig::total_users() const { return std::accumulate(users_per_bs.begin(), users_per_bs.end(), 0); }

int NetworkConfig::first_user(int bs) const {
    if (bs < 0 || bs >= n_bs()) throw ContractError("BS index out of range");
    return std::accumulate(users_per_bs.begin(), users_per_bs.begin() + bs, 0);
}

int NetworkConfig::serving_bs(int u) const {
    int first = 0;
    for (int n = 0; n < n_bs(); ++n) {
        first += users_per_bs[static_cast<std::size_t>(n)];
        if (u < first) return n;
    }
    throw ContractError("user index out of range");
}

void NetworkConfig::validate() const {
    if (n_macro < 1) throw ConfigError("n_macro must be >= 1");
    if (n_micro < 0) throw ConfigError("n_micro must be >= 0");
    if (static_cast<int>(users_per_bs.size()) != n_bs()) throw ConfigError("users_per_bs must have one entry per BS");
    for (int u : users_per_bs)
        if (u < 1) throw ConfigError("every BS needs at least one user");
    if (n_subchannels < 1) throw ConfigError("n_subchannels must be >= 1");
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(subchannel_bandwidth_hz)) throw ConfigError("subchannel bandwidth must be positive");
    if (!positive(noise_power_w)) throw ConfigError("noise power must be positive");
    if (!positive(p_max_macro_w) || !positive(p_max_micro_w)) throw ConfigError("maximum powers must be positive");
    if (n_micro > 0 && !(p_max_macro_w > p_max_micro_w))
        throw ConfigError("macro maximum power must exceed micro maximum power");
    if (!(amplifier_inefficiency > 0.0 && amplifier_inefficiency <= 1.0))
        throw ConfigError("amplifier inefficiency must lie in (0, 1]");
    if (!(circuit_power_macro_w >= 0.0) || !(circuit_power_micro_w >= 0.0))
        throw ConfigError("circuit powers must be nonnegative");
    if (!(circuit_power_w() > 0.0)) throw ConfigError("total circuit power must be positive");
    if (!(se_target_bps_per_hz >= 0.0)) throw ConfigError("SE target must be >= 0");
    if (!positive(geometry.inter_cell_distance_km) || !positive(geometry.max_user_distance_km))
        throw ConfigError("geometry distances must be positive");
}

ChannelTensor::ChannelTensor(int n_bs, int n_users, int n_subchannels, std::uint64_t seed)
    : n_bs_(n_bs), n_users_(n_users), n_subchannels_(n_subchannels),
      gains_(static_cast<std::size_t>(n_bs) * n_users * n_subchannels, 0.0), seed_(seed) {
    if (n_bs < 1 || n_users < 1 || n_subchannels < 1) throw ContractError("channel tensor dimensions must be >= 1");
}

ChannelTensor::ChannelTensor(int n_bs, int n_users, int n_subchannels, std::vector<double> gains, std::uint64_t seed)
    : n_bs_(n_bs), n_users_(n_users), n_subchannels_(n_subchannels), gains_(std::move(gains)), seed_(seed) {
    if (n_bs < 1 || n_users < 1 || n_subchannels < 1) throw ContractError("channel tensor dimensions must be >= 1");
    if (gains_.size() != static_cast<std::size_t>(n_bs) * n_users * n_subchannels)
        throw ContractError("channel gain count does not match shape");
}

bool ChannelTensor::matches(const NetworkConfig& cfg) const {
    return n_bs_ == cfg.n_bs() && n_users_ == cfg.total_users() && n_subchannels_ == cfg.n_subchannels;
}

Allocation Allocation::zeros(const NetworkConfig& cfg) {
    Allocation a;
    a.n_bs = cfg.n_bs();
    a.n_users = cfg.total_users();
    a.n_subchannels = cfg.n_subchannels;
    a.indicator.assign(static_cast<std::size_t>(a.n_bs) * a.n_users * a.n_subchannels, 0);
    a.power_w.assign(static_cast<std::size_t>(a.n_bs) * a.n_subchannels, 0.0);
    return a;
}

bool Allocation::matches(const NetworkConfig& cfg) const {
    return n_bs == cfg.n_bs() && n_users == cfg.total_users() && n_subchannels == cfg.n_subchannels &&
           indicator.size() == static_cast<std::size_t>(n_bs) * n_users * n_subchannels &&
           power_w.size() == static_cast<std::size_t>(n_bs) * n_subchannels;
}

namespace {

void require_shapes(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg) {
    if (!h.matches(cfg)) throw ContractError("channel tensor shape does not match config");
    if (!alloc.matches(cfg)) throw ContractError("allocation shape does not match config");
}

// Inlined body of link_rate without index validation. Kept as the single
// arithmetic path so every caller gets bit-identical rates.
inline double rate_unchecked(const ChannelTensor& h, std::span<const double> p, const NetworkConfig& cfg, int n, int u,
                             int k) {
    const int K = cfg.n_subchannels;
    double interference = 0.0;
    for (int j = 0; j < cfg.n_bs(); ++j) {
        if (j == n) continue;
        interference += h.at(j, u, k) * p[static_cast<std::size_t>(j) * K + k];
    }
    const double sinr = h.at(n, u, k) * p[static_cast<std::size_t>(n) * K + k] / (interference + cfg.noise_power_w);
    if (cfg.rate_formula == RateFormula::paper_literal) return cfg.subchannel_bandwidth_hz * std::log2(sinr);
    return cfg.subchannel_bandwidth_hz * std::log2(1.0 + sinr);
}

} // namespace

double link_rate(const ChannelTensor& h, std::span<const double> power_w, const NetworkConfig& cfg, int n, int u,
                 int k) {
    if (!h.matches(cfg)) throw ContractError("channel tensor shape does not match config");
    if (power_w.size() != static_cast<std::size_t>(cfg.n_bs()) * cfg.n_subchannels)
        throw ContractError("power matrix shape does not match config");
    if (n < 0 || n >= cfg.n_bs() || u < 0 || u >= cfg.total_users() || k < 0 || k >= cfg.n_subchannels)
        throw ContractError("link index out of range");
    for (double v : power_w)
        if (!(v >= 0.0)) throw ContractError("transmit power must be nonnegative");
    return rate_unchecked(h, power_w, cfg, n, u, k);
}

namespace detail {

double throughput_unchecked(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg) {
    double total = 0.0;
    for (int n = 0; n < cfg.n_bs(); ++n) {
        const int first = cfg.first_user(n);
        for (int u = first; u < first + cfg.users_of(n); ++u)
            for (int k = 0; k < cfg.n_subchannels; ++k)
                if (alloc.l(n, u, k)) total += rate_unchecked(h, alloc.power_w, cfg, n, u, k);
    }
    return total;
}

} // namespace detail

double throughput(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg) {
    require_shapes(h, alloc, cfg);
    for (double v : alloc.power_w)
        if (!(v >= 0.0)) throw ContractError("transmit power must be nonnegative");
    if (const auto f = check_assignment(alloc, cfg); !f)
        throw ConstraintError("invalid subchannel indicator: " + std::string(to_string(f.violated)));
    return detail::throughput_unchecked(h, alloc, cfg);
}

double total_power(std::span<const double> power_w, const NetworkConfig& cfg) {
    if (power_w.size() != static_cast<std::size_t>(cfg.n_bs()) * cfg.n_subchannels)
        throw ContractError("power matrix shape does not match config");
    double sum = 0.0;
    for (double v : power_w) sum += v;
    return detail::consumed_power(sum, cfg);
}

double energy_efficiency(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg) {
    return throughput(h, alloc, cfg) / total_power(alloc.power_w, cfg);
}

double spectral_efficiency(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg) {
    return throughput(h, alloc, cfg) / cfg.system_bandwidth_hz();
}

Metrics evaluate_metrics(const ChannelTensor& h, const Allocation& alloc, const NetworkConfig& cfg) {
    Metrics m;
    m.throughput_bps = throughput(h, alloc, cfg);
    m.total_power_w = total_power(alloc.power_w, cfg);
    m.ee_bps_per_joule = m.throughput_bps / m.total_power_w;
    m.se_bps_per_hz = m.throughput_bps / cfg.system_bandwidth_hz();
    return m;
}

std::string_view to_string(Constraint c) {
    switch (c) {
    case Constraint::none: return "none";
    case Constraint::indicator_domain: return "indicator_domain";
    case Constraint::subchannel_exclusive: return "subchannel_exclusive";
    case Constraint::user_coverage: return "user_coverage";
    case Constraint::macro_power: return "macro_power";
    case Constraint::micro_power: return "micro_power";
    case Constraint::spectral_efficiency: return "spectral_efficiency";
    }
    return "unknown";
}

Feasibility check_assignment(const Allocation& alloc, const NetworkConfig& cfg) {
    if (!alloc.matches(cfg)) throw ContractError("allocation shape does not match config");
    const int N = cfg.n_bs();
    const int K = cfg.n_subchannels;
    for (int n = 0; n < N; ++n) {
        const int first = cfg.first_user(n);
        const int last = first + cfg.users_of(n);
        for (int u = 0; u < alloc.n_users; ++u)
            for (int k = 0; k < K; ++k) {
                const auto v = alloc.l(n, u, k);
                if (v > 1 || (v == 1 && (u < first || u >= last))) return {Constraint::indicator_domain, n, u};
            }
    }
    for (int n = 0; n < N; ++n) {
        const int first = cfg.first_user(n);
        for (int k = 0; k < K; ++k) {
            int owners = 0;
            for (int u = first; u < first + cfg.users_of(n); ++u) owners += alloc.l(n, u, k);
            if (owners > 1) return {Constraint::subchannel_exclusive, n, k};
        }
    }
    for (int n = 0; n < N; ++n) {
        const int first = cfg.first_user(n);
        for (int u = first; u < first + cfg.users_of(n); ++u) {
            int held = 0;
            for (int k = 0; k < K; ++k) held += alloc.l(n, u, k);
            if (held < 1) return {Constraint::user_coverage, n, u};
        }
    }
    return {};
}

Feasibility check_feasible(const Allocation& alloc, const NetworkConfig& cfg, const ChannelTensor& h) {
    require_shapes(h, alloc, cfg);
    if (const auto f = check_assignment(alloc, cfg); !f) return f;
    for (int n = 0; n < cfg.n_bs(); ++n) {
        const auto which = cfg.is_macro(n) ? Constraint::macro_power : Constraint::micro_power;
        double sum = 0.0;
        for (int k = 0; k < cfg.n_subchannels; ++k) {
            const double v = alloc.p(n, k);
            if (!(v >= 0.0) || !std::isfinite(v)) return {which, n, k};
            sum += v;
        }
        if (sum > cfg.p_max(n) * (1.0 + detail::kPowerSlack)) return {which, n, -1};
    }
    const double se = detail::throughput_unchecked(h, alloc, cfg) / cfg.system_bandwidth_hz();
    if (!(se >= cfg.se_target_bps_per_hz)) return {Constraint::spectral_efficiency, -1, -1};
    return {};
}

} // namespace hetnet
