#ifndef TTV_NOISE_HPP
#define TTV_NOISE_HPP

#include <cstdint>
#include <random>

#include "ttv/image.hpp"

namespace ttv {

/// L-look multiplicative speckle: each pixel is scaled by an independent
/// Gamma(L, 1/L) draw (unit mean, variance 1/L).
struct NoiseSpec {
    int looks = 1;
    std::uint64_t seed = 0;
};

/// Seed-reproducible gamma variate generator. The uniform, normal, and gamma
/// algorithms are spelled out here instead of using std::*_distribution so
/// that a given seed produces the same stream on every platform; only the
/// mt19937_64 engine (whose output is fixed by the standard) is reused.
class GammaSampler {
public:
    explicit GammaSampler(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform();

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal();

    /// Gamma(shape, scale) via Marsaglia-Tsang squeeze, with the usual
    /// power-of-uniform boost for shape < 1.
    double gamma(double shape, double scale);

private:
    std::mt19937_64 engine_;
};

/// Multiply img by an i.i.d. Gamma(L, 1/L) field drawn from spec.seed.
/// Pixels are consumed in row-major order from a single stream, so identical
/// (img, spec) pairs give bitwise-identical results.
ImageGrid apply_speckle(const ImageGrid& img, const NoiseSpec& spec);

}  // namespace ttv

#endif
