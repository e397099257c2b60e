#include "ttv/core_ops.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ttv {

Kernel2D gaussian_kernel(double xi, int radius) {
    if (!(xi > 0.0))
        throw std::invalid_argument("gaussian_kernel: xi must be positive");
    if (radius < 1)
        throw std::invalid_argument("gaussian_kernel: radius must be >= 1");

    Kernel2D k;
    k.radius = radius;
    const int side = 2 * radius + 1;
    k.weights.resize(static_cast<std::size_t>(side) * side);
    const double inv2xi2 = 1.0 / (2.0 * xi * xi);
    double sum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double w = std::exp(-(dx * dx + dy * dy) * inv2xi2);
            k.weights[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] = w;
            sum += w;
        }
    }
    for (double& w : k.weights) w /= sum;
    return k;
}

ImageGrid convolve(const ImageGrid& img, const Kernel2D& k) {
    if (img.data.empty())
        throw std::invalid_argument("convolve: empty image");
    ImageGrid out(img.width, img.height, 0.0, img.max_level);
    const int r = k.radius;
    const int side = 2 * r + 1;

#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const double* wrow = &k.weights[static_cast<std::size_t>(dy + r) * side];
                for (int dx = -r; dx <= r; ++dx) {
                    acc += wrow[dx + r] * clamp_sample(img, x + dx, y + dy);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

VectorField central_gradient(const ImageGrid& img, double h) {
    if (!(h > 0.0))
        throw std::invalid_argument("central_gradient: h must be positive");
    VectorField g(img.width, img.height);
    const double inv2h = 1.0 / (2.0 * h);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            g.dx[i] = (clamp_sample(img, x + 1, y) - clamp_sample(img, x - 1, y)) * inv2h;
            g.dy[i] = (clamp_sample(img, x, y + 1) - clamp_sample(img, x, y - 1)) * inv2h;
        }
    }
    return g;
}

double grid_sum(const ImageGrid& img) {
    std::vector<double> partial(img.height, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        double acc = 0.0;
        const double* row = &img.data[static_cast<std::size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x) acc += row[x];
        partial[y] = acc;
    }
    return std::accumulate(partial.begin(), partial.end(), 0.0);
}

double grid_sum_squares(const ImageGrid& img) {
    std::vector<double> partial(img.height, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        double acc = 0.0;
        const double* row = &img.data[static_cast<std::size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x) acc += row[x] * row[x];
        partial[y] = acc;
    }
    return std::accumulate(partial.begin(), partial.end(), 0.0);
}

double grid_sum_squared_diff(const ImageGrid& a, const ImageGrid& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("grid_sum_squared_diff: shape mismatch");
    std::vector<double> partial(a.height, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < a.height; ++y) {
        double acc = 0.0;
        const double* ra = &a.data[static_cast<std::size_t>(y) * a.width];
        const double* rb = &b.data[static_cast<std::size_t>(y) * b.width];
        for (int x = 0; x < a.width; ++x) {
            const double d = ra[x] - rb[x];
            acc += d * d;
        }
        partial[y] = acc;
    }
    return std::accumulate(partial.begin(), partial.end(), 0.0);
}

}  // namespace ttv
