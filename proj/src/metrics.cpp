#include "ttv/metrics.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ttv/core_ops.hpp"

namespace ttv {

namespace {

void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": image shapes differ");
}

void require_odd_window(int window, const char* what) {
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument(std::string(what) + ": window must be a positive odd width");
}

/// Normalized Gaussian window weights, row-major (window x window).
std::vector<double> gaussian_window(int window, double sigma) {
    const int r = window / 2;
    std::vector<double> w(static_cast<std::size_t>(window) * window);
    double sum = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            w[static_cast<std::size_t>(dy + r) * window + (dx + r)] = v;
            sum += v;
        }
    for (double& v : w) v /= sum;
    return w;
}

double mean_over_pixels(const std::vector<double>& per_pixel, int width, int height) {
    std::vector<double> rows(static_cast<std::size_t>(height), 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        double acc = 0.0;
        for (int x = 0; x < width; ++x) acc += per_pixel[static_cast<std::size_t>(y) * width + x];
        rows[static_cast<std::size_t>(y)] = acc;
    }
    const double total = std::accumulate(rows.begin(), rows.end(), 0.0);
    return total / (static_cast<double>(width) * height);
}

}  // namespace

double psnr(const ImageGrid& ref, const ImageGrid& test) {
    require_same_shape(ref, test, "psnr");
    if (ref.max_level != test.max_level)
        throw std::invalid_argument("psnr: images use different gray scales");
    const double mse = grid_sum_squared_diff(ref, test) / static_cast<double>(ref.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ref.max_level * ref.max_level / mse);
}

double mssim(const ImageGrid& ref, const ImageGrid& test, int window) {
    require_same_shape(ref, test, "mssim");
    require_odd_window(window, "mssim");
    if (window > ref.width || window > ref.height)
        throw std::invalid_argument("mssim: window exceeds image size");

    const std::vector<double> w = gaussian_window(window, 1.5);
    const int r = window / 2;
    const double c1 = (0.01 * ref.max_level) * (0.01 * ref.max_level);
    const double c2 = (0.03 * ref.max_level) * (0.03 * ref.max_level);

    const int width = ref.width, height = ref.height;
    std::vector<double> ssim_map(ref.size());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double wk = w[static_cast<std::size_t>(dy + r) * window + (dx + r)];
                    const double a = clamp_sample(ref, x + dx, y + dy);
                    const double b = clamp_sample(test, x + dx, y + dy);
                    mx += wk * a;
                    my += wk * b;
                    sxx += wk * a * a;
                    syy += wk * b * b;
                    sxy += wk * a * b;
                }
            // Weighted central moments; identical windows make sxx == sxy
            // exactly, so the quotient is exactly 1.
            sxx -= mx * mx;
            syy -= my * my;
            sxy -= mx * my;
            const double num = (2.0 * mx * my + c1) * (2.0 * sxy + c2);
            const double den = (mx * mx + my * my + c1) * (sxx + syy + c2);
            ssim_map[static_cast<std::size_t>(y) * width + x] = num / den;
        }
    }
    return mean_over_pixels(ssim_map, width, height);
}

double speckle_index(const ImageGrid& img, int window) {
    require_odd_window(window, "speckle_index");
    const int r = window / 2;
    const double n = static_cast<double>(window) * window;
    const double eta = positivity_floor(img.max_level);

    const int width = img.width, height = img.height;
    std::vector<double> ratio(img.size());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double s1 = 0.0, s2 = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double v = clamp_sample(img, x + dx, y + dy);
                    s1 += v;
                    s2 += v * v;
                }
            const double m = s1 / n;
            const double var = std::max(s2 / n - m * m, 0.0);
            ratio[static_cast<std::size_t>(y) * width + x] = m < eta ? 0.0 : std::sqrt(var) / m;
        }
    }
    return mean_over_pixels(ratio, width, height);
}

MetricsReport evaluate_metrics(const ImageGrid& ref, const ImageGrid& test) {
    MetricsReport rep;
    rep.psnr_db = psnr(ref, test);
    rep.mssim = mssim(ref, test);
    rep.speckle_index = speckle_index(test);
    return rep;
}

ImageGrid ratio_image(const ImageGrid& noisy, const ImageGrid& restored) {
    require_same_shape(noisy, restored, "ratio_image");
    const double eta = positivity_floor(restored.max_level);
    // Unit-mean field; export maps [0, 2] onto the gray range.
    ImageGrid out(noisy.width, noisy.height, 0.0, 2.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < noisy.height; ++y)
        for (int x = 0; x < noisy.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * noisy.width + x;
            out.data[i] = noisy.data[i] / std::max(restored.data[i], eta);
        }
    return out;
}

std::vector<std::pair<int, double>> line_profile(const ImageGrid& img, int row) {
    if (row < 0 || row >= img.height)
        throw std::out_of_range("line_profile: row outside image");
    std::vector<std::pair<int, double>> out;
    out.reserve(static_cast<std::size_t>(img.width));
    for (int x = 0; x < img.width; ++x)
        out.emplace_back(x, img.data[static_cast<std::size_t>(row) * img.width + x]);
    return out;
}

}  // namespace ttv
