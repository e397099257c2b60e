#ifndef TTV_METRICS_HPP
#define TTV_METRICS_HPP

#include <limits>
#include <utility>
#include <vector>

#include "ttv/image.hpp"

namespace ttv {

/// One quality row as serialized into reports.
struct MetricsReport {
    double psnr_db = std::numeric_limits<double>::infinity();
    double mssim = 1.0;
    double speckle_index = 0.0;
    int iterations = 0;
    double wall_seconds = 0.0;
};

/// Peak signal-to-noise ratio 10 log10(max_level^2 / MSE) in dB; the images
/// must share shape and max_level. Returns +infinity when identical.
double psnr(const ImageGrid& ref, const ImageGrid& test);

/// Mean structural similarity: local SSIM under a Gaussian-weighted window
/// (default 11x11, sigma 1.5) at every pixel with replicated borders.
/// Stabilizers C1 = (0.01 max_level)^2, C2 = (0.03 max_level)^2. The window
/// must be odd and no larger than the smaller image dimension.
double mssim(const ImageGrid& ref, const ImageGrid& test, int window = 11);

/// Mean over pixels of the local (population) standard deviation divided by
/// the local mean over an odd window (default 3x3), replicated borders.
/// Windows whose mean falls below the positivity floor contribute 0.
double speckle_index(const ImageGrid& img, int window = 3);

/// All three measures of test against ref; iterations and wall_seconds are
/// left for the caller to fill.
MetricsReport evaluate_metrics(const ImageGrid& ref, const ImageGrid& test);

/// Pointwise noisy / restored with the restored value floored at the
/// positivity floor. Pure speckle removal leaves unit-mean noise here, so
/// the result is exported on a [0, 2] scale (max_level = 2).
ImageGrid ratio_image(const ImageGrid& noisy, const ImageGrid& restored);

/// One image row as (column, intensity) pairs, left to right.
std::vector<std::pair<int, double>> line_profile(const ImageGrid& img, int row);

}  // namespace ttv

#endif
