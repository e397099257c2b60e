#ifndef TTV_CORE_OPS_HPP
#define TTV_CORE_OPS_HPP

#include <cmath>

#include "ttv/image.hpp"

namespace ttv {

/// Normalized Gaussian kernel of width xi truncated at the given radius.
Kernel2D gaussian_kernel(double xi, int radius);

/// Truncation radius capturing essentially all of the Gaussian mass.
inline int default_kernel_radius(double xi) {
    return static_cast<int>(std::ceil(3.0 * xi));
}

/// Dense convolution with replicate borders; output shape equals input shape.
ImageGrid convolve(const ImageGrid& img, const Kernel2D& k);

/// Central differences (I[x+1]-I[x-1])/(2h) with replicate borders.
VectorField central_gradient(const ImageGrid& img, double h = 1.0);

/// Deterministic full-grid sum: per-row partials accumulated in row order,
/// so the result is independent of the number of OpenMP workers.
double grid_sum(const ImageGrid& img);

/// Sum of squared entries, same deterministic reduction as grid_sum.
double grid_sum_squares(const ImageGrid& img);

/// Sum of squared differences between two same-shape grids.
double grid_sum_squared_diff(const ImageGrid& a, const ImageGrid& b);

}  // namespace ttv

#endif
