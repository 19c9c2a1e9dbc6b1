#pragma once

#include "hetnet/random.hpp"
#include "hetnet/system_model.hpp"

#include <vector>

namespace hetnet::channel {

struct Point {
    double x_km = 0.0;
    double y_km = 0.0;
};

double distance_km(Point a, Point b);

/// BS and user positions for one realization. Users are in global (BS-major) order.
struct Layout {
    std::vector<Point> bs_positions;
    std::vector<Point> user_positions;
    std::vector<int> serving_bs;
};

enum class BsKind { macro, micro };

/// Macro BS 0 sits at the origin, further macros on the x axis at twice the
/// inter-cell distance apart. Micros lie on a ring of radius inter-cell
/// distance around the origin at equally spaced angles starting from 0.
/// Each user is placed around its serving BS at distance Uniform(0, d_max]
/// and angle Uniform[0, 2pi).
Layout place_users(const NetworkConfig& cfg, Rng& rng);

/// Distance-dependent pathloss in dB, distance in km.
///   macro: 128.1 + 37.6 log10(R)
///   micro: 140.7 + 36.7 log10(R)
double pathloss_db(BsKind kind, double distance_km);

/// h = 10^(-PL/10) |g|^2 with g ~ CN(0, 1) drawn per (n, u, k) in that loop order.
ChannelTensor draw_channel(const NetworkConfig& cfg, const Layout& layout, Rng& rng);

/// Layout and channel drawn from a fresh engine seeded with `seed`.
ChannelTensor draw_realization(const NetworkConfig& cfg, std::uint64_t seed);

} // namespace hetnet::channel
