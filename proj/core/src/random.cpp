#include "hetnet/random.hpp"

#include <cmath>
#include <numbers>

namespace hetnet {

double standard_normal(Rng& rng) {
    const double r = std::sqrt(-2.0 * std::log(uniform01_open_low(rng)));
    const double theta = 2.0 * std::numbers::pi * uniform01(rng);
    return r * std::cos(theta);
}

} // namespace hetnet
