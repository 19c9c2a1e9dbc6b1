#include "hetnet/channel.hpp"

#include "hetnet/errors.hpp"

#include <cmath>
#include <numbers>

namespace hetnet::channel {

double distance_km(Point a, Point b) { return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km); }

Layout place_users(const NetworkConfig& cfg, Rng& rng) {
    cfg.validate();
    const double d_ic = cfg.geometry.inter_cell_distance_km;
    const double d_max = cfg.geometry.max_user_distance_km;

    Layout layout;
    layout.bs_positions.reserve(static_cast<std::size_t>(cfg.n_bs()));
    for (int m = 0; m < cfg.n_macro; ++m) layout.bs_positions.push_back({2.0 * d_ic * m, 0.0});
    for (int s = 0; s < cfg.n_micro; ++s) {
        const double angle = 2.0 * std::numbers::pi * s / cfg.n_micro;
        layout.bs_positions.push_back({d_ic * std::cos(angle), d_ic * std::sin(angle)});
    }

    for (int n = 0; n < cfg.n_bs(); ++n) {
        const Point bs = layout.bs_positions[static_cast<std::size_t>(n)];
        for (int i = 0; i < cfg.users_of(n); ++i) {
            const double r = d_max * uniform01_open_low(rng);
            const double theta = 2.0 * std::numbers::pi * uniform01(rng);
            layout.user_positions.push_back({bs.x_km + r * std::cos(theta), bs.y_km + r * std::sin(theta)});
            layout.serving_bs.push_back(n);
        }
    }
    return layout;
}

double pathloss_db(BsKind kind, double distance_km) {
    if (!(distance_km > 0.0)) throw ContractError("pathloss distance must be positive");
    if (kind == BsKind::macro) return 128.1 + 37.6 * std::log10(distance_km);
    return 140.7 + 36.7 * std::log10(distance_km);
}

ChannelTensor draw_channel(const NetworkConfig& cfg, const Layout& layout, Rng& rng) {
    const int N = cfg.n_bs();
    const int U = cfg.total_users();
    const int K = cfg.n_subchannels;
    if (static_cast<int>(layout.bs_positions.size()) != N || static_cast<int>(layout.user_positions.size()) != U)
        throw ContractError("layout does not match config");

    ChannelTensor h(N, U, K);
    for (int n = 0; n < N; ++n) {
        const auto kind = cfg.is_macro(n) ? BsKind::macro : BsKind::micro;
        for (int u = 0; u < U; ++u) {
            const double d = distance_km(layout.bs_positions[static_cast<std::size_t>(n)],
                                         layout.user_positions[static_cast<std::size_t>(u)]);
            const double attenuation = std::pow(10.0, -pathloss_db(kind, d) / 10.0);
            for (int k = 0; k < K; ++k) {
                const double re = standard_normal(rng);
                const double im = standard_normal(rng);
                h.at(n, u, k) = attenuation * 0.5 * (re * re + im * im);
            }
        }
    }
    return h;
}

ChannelTensor draw_realization(const NetworkConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const auto layout = place_users(cfg, rng);
    auto h = draw_channel(cfg, layout, rng);
    h.set_seed(seed);
    return h;
}

} // namespace hetnet::channel
