#include "ttv/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace ttv {

double GammaSampler::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GammaSampler::normal() {
    // u1 shifted into (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double GammaSampler::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw std::invalid_argument("GammaSampler::gamma: shape and scale must be positive");

    if (shape < 1.0) {
        // Gamma(a) = Gamma(a+1) * U^(1/a)
        const double g = gamma(shape + 1.0, 1.0);
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return scale * g * std::pow(u, 1.0 / shape);
    }

    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return scale * d * v;
    }
}

ImageGrid apply_speckle(const ImageGrid& img, const NoiseSpec& spec) {
    if (spec.looks < 1)
        throw std::invalid_argument("apply_speckle: looks must be >= 1");
    if (img.data.empty())
        throw std::invalid_argument("apply_speckle: empty image");

    const double shape = static_cast<double>(spec.looks);
    const double scale = 1.0 / shape;
    GammaSampler rng(spec.seed);

    ImageGrid out = img;
    // Sequential single stream keeps the draw order pinned to pixel order.
    for (double& v : out.data) {
        const double n = rng.gamma(shape, scale);
        v = std::max(0.0, v * n);
    }
    return out;
}

}  // namespace ttv
