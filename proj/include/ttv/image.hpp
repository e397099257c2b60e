#ifndef TTV_IMAGE_HPP
#define TTV_IMAGE_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttv {

/// Dense 2-D grid of nonnegative intensities, row-major, double precision.
/// max_level is the nominal intensity ceiling of the source (255 for 8-bit
/// input, 1 for normalized data); pixel values may transiently exceed it
/// during iteration and are only clamped at export.
struct ImageGrid {
    int width = 0;
    int height = 0;
    std::vector<double> data;
    double max_level = 255.0;

    ImageGrid() = default;
    ImageGrid(int w, int h, double fill = 0.0, double maxlev = 255.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill),
          max_level(maxlev) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("ImageGrid: dimensions must be positive");
        if (maxlev <= 0.0)
            throw std::invalid_argument("ImageGrid: max_level must be positive");
    }

    std::size_t size() const { return data.size(); }

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool same_shape(const ImageGrid& other) const {
        return width == other.width && height == other.height;
    }
};

/// Square convolution kernel of side 2*radius+1, weights normalized to sum 1.
struct Kernel2D {
    int radius = 0;
    std::vector<double> weights;  // (2r+1)^2, row-major

    int side() const { return 2 * radius + 1; }
    double at(int dx, int dy) const {
        return weights[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
    }
};

/// Per-pixel (x, y) derivative pair, same shape as the source image.
struct VectorField {
    int width = 0;
    int height = 0;
    std::vector<double> dx;
    std::vector<double> dy;

    VectorField() = default;
    VectorField(int w, int h)
        : width(w), height(h), dx(static_cast<std::size_t>(w) * h, 0.0),
          dy(static_cast<std::size_t>(w) * h, 0.0) {}
};

/// Thrown when a time step produces a nonfinite value; carries the first
/// offending pixel and the iteration at which it appeared.
class blowup_error : public std::runtime_error {
public:
    blowup_error(int x, int y, int iteration, const std::string& solver)
        : std::runtime_error(solver + ": nonfinite value at pixel (" +
                             std::to_string(x) + ", " + std::to_string(y) +
                             ") on iteration " + std::to_string(iteration)),
          px(x), py(y), iter(iteration) {}
    int px, py, iter;
};

/// Sample with the symmetric (replicating) boundary rule. Indices may reach
/// exactly one pixel beyond each edge; anything deeper is a stencil bug and
/// throws rather than silently extending.
inline double reflect_sample(const ImageGrid& img, int x, int y) {
    if (img.data.empty())
        throw std::invalid_argument("reflect_sample: empty image");
    if (x < -1 || x > img.width || y < -1 || y > img.height)
        throw std::out_of_range("reflect_sample: index more than one pixel out of range");
    if (x < 0) x = 0;
    if (x >= img.width) x = img.width - 1;
    if (y < 0) y = 0;
    if (y >= img.height) y = img.height - 1;
    return img.at(x, y);
}

/// Unchecked replicate-boundary sample for kernel interiors; clamping to the
/// nearest edge pixel extends the one-layer rule to arbitrary depth.
inline double clamp_sample(const ImageGrid& img, int x, int y) {
    if (x < 0) x = 0;
    if (x >= img.width) x = img.width - 1;
    if (y < 0) y = 0;
    if (y >= img.height) y = img.height - 1;
    return img.at(x, y);
}

/// Floor used wherever a quotient by the image is taken (fidelity term,
/// ratio image, local means).
inline double positivity_floor(double max_level) { return 1e-6 * max_level; }

}  // namespace ttv

#endif
