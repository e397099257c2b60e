#include "ttv/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ttv::reference {

namespace {

// Image with an r-deep replicated margin; indices may range over
// [-r, w-1+r] x [-r, h-1+r].
struct Padded {
    int w = 0, h = 0, r = 0, stride = 0;
    std::vector<double> v;

    double at(int x, int y) const {
        return v[static_cast<std::size_t>(y + r) * stride + (x + r)];
    }
};

Padded pad(const std::vector<double>& data, int w, int h, int r) {
    Padded p;
    p.w = w;
    p.h = h;
    p.r = r;
    p.stride = w + 2 * r;
    p.v.resize(static_cast<std::size_t>(p.stride) * (h + 2 * r));
    for (int y = -r; y < h + r; ++y)
        for (int x = -r; x < w + r; ++x) {
            const int cx = std::clamp(x, 0, w - 1);
            const int cy = std::clamp(y, 0, h - 1);
            p.v[static_cast<std::size_t>(y + r) * p.stride + (x + r)] =
                data[static_cast<std::size_t>(cy) * w + cx];
        }
    return p;
}

Padded pad(const ImageGrid& img, int r) { return pad(img.data, img.width, img.height, r); }

double divergence_formula(double a, double b) {
    return 2.0 - (1.0 - a + b) * std::exp(a - b) - (1.0 - b + a) * std::exp(b - a);
}

}  // namespace

ImageGrid convolve(const ImageGrid& img, const Kernel2D& k) {
    ImageGrid out = img;
    const Padded p = pad(img, k.radius);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -k.radius; dy <= k.radius; ++dy)
                for (int dx = -k.radius; dx <= k.radius; ++dx)
                    acc += k.at(dx, dy) * p.at(x + dx, y + dy);
            out.at(x, y) = acc;
        }
    return out;
}

VectorField central_gradient(const ImageGrid& img, double h) {
    VectorField g(img.width, img.height);
    const Padded p = pad(img, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            g.dx[i] = (p.at(x + 1, y) - p.at(x - 1, y)) / (2.0 * h);
            g.dy[i] = (p.at(x, y + 1) - p.at(x, y - 1)) / (2.0 * h);
        }
    return g;
}

EdgeIndicatorField edge_indicator(const ImageGrid& img,
                                  const std::vector<FuzzyTemplate>& templates,
                                  const EdgeDetectorConfig& cfg) {
    if (templates.empty())
        throw std::invalid_argument("reference::edge_indicator: no templates");
    std::vector<double> mu(img.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        double m = std::clamp(img.data[i] / img.max_level, 0.0, 1.0);
        const double nu = (1.0 - m) / (1.0 + cfg.hesitation_lambda * m);
        m = m + (1.0 - m - nu);
        mu[i] = m;
    }
    const Padded p = pad(mu, img.width, img.height, 1);

    EdgeIndicatorField field;
    field.width = img.width;
    field.height = img.height;
    field.delta_floor = cfg.delta_floor;
    field.theta.resize(img.size());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double best = 0.0;
            for (const FuzzyTemplate& t : templates) {
                double worst = std::numeric_limits<double>::infinity();
                for (int e = 0; e < 9; ++e) {
                    const int dx = e % 3 - 1, dy = e / 3 - 1;
                    const double d = divergence_formula(p.at(x + dx, y + dy), t.entries[e]);
                    worst = std::min(worst, d);
                }
                best = std::max(best, worst);
            }
            const double theta = 1.0 - best / kMaxDivergence;
            field.theta[static_cast<std::size_t>(y) * img.width + x] =
                std::clamp(theta, cfg.delta_floor, 1.0);
        }
    return field;
}

ImageGrid tv_divergence(const ImageGrid& img, const EdgeIndicatorField& theta,
                        double eps_tv, FluxForm form) {
    const int w = img.width, h = img.height;
    const Padded p = pad(img, 1);
    const Padded th = pad(theta.theta, w, h, 1);
    const double e2 = eps_tv * eps_tv;
    ImageGrid out = img;

    if (form == FluxForm::conservative) {
        // face fluxes indexed by the cell on the face's negative side;
        // replication makes the outermost faces vanish on their own
        std::vector<double> fx(static_cast<std::size_t>(w + 1) * h);
        std::vector<double> fy(static_cast<std::size_t>(w) * (h + 1));
        for (int y = 0; y < h; ++y)
            for (int x = -1; x < w; ++x) {
                const double gx = p.at(x + 1, y) - p.at(x, y);
                const double gy = 0.25 * (p.at(x, y + 1) - p.at(x, y - 1) +
                                          p.at(x + 1, y + 1) - p.at(x + 1, y - 1));
                const double c = 0.5 * (th.at(x, y) + th.at(x + 1, y));
                fx[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] =
                    c * gx / std::sqrt(gx * gx + gy * gy + e2);
            }
        for (int y = -1; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double gy = p.at(x, y + 1) - p.at(x, y);
                const double gx = 0.25 * (p.at(x + 1, y) - p.at(x - 1, y) +
                                          p.at(x + 1, y + 1) - p.at(x - 1, y + 1));
                const double c = 0.5 * (th.at(x, y) + th.at(x, y + 1));
                fy[static_cast<std::size_t>(y + 1) * w + x] =
                    c * gy / std::sqrt(gx * gx + gy * gy + e2);
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(x, y) = fx[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] -
                               fx[static_cast<std::size_t>(y) * (w + 1) + x] +
                               fy[static_cast<std::size_t>(y + 1) * w + x] -
                               fy[static_cast<std::size_t>(y) * w + x];
        return out;
    }

    std::vector<double> fp(img.size()), fq(img.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = 0.5 * (p.at(x + 1, y) - p.at(x - 1, y));
            const double gy = 0.5 * (p.at(x, y + 1) - p.at(x, y - 1));
            const double c = th.at(x, y) / std::sqrt(gx * gx + gy * gy + e2);
            fp[static_cast<std::size_t>(y) * w + x] = c * gx;
            fq[static_cast<std::size_t>(y) * w + x] = c * gy;
        }
    const Padded pp = pad(fp, w, h, 1);
    const Padded pq = pad(fq, w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = 0.5 * (pp.at(x + 1, y) - pp.at(x - 1, y)) +
                           0.5 * (pq.at(x, y + 1) - pq.at(x, y - 1));
    return out;
}

double psnr(const ImageGrid& ref, const ImageGrid& test) {
    double sq = 0.0;
    for (std::size_t i = 0; i < ref.data.size(); ++i) {
        const double d = ref.data[i] - test.data[i];
        sq += d * d;
    }
    if (sq == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sq / static_cast<double>(ref.size());
    return 10.0 * std::log10(ref.max_level * ref.max_level / mse);
}

double mssim(const ImageGrid& ref, const ImageGrid& test, int window) {
    const int r = window / 2;
    const double sigma = 1.5;
    std::vector<double> wgt(static_cast<std::size_t>(window) * window);
    double wsum = 0.0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            wgt[static_cast<std::size_t>(dy + r) * window + (dx + r)] = v;
            wsum += v;
        }
    for (double& v : wgt) v /= wsum;

    const double c1 = std::pow(0.01 * ref.max_level, 2);
    const double c2 = std::pow(0.03 * ref.max_level, 2);
    const Padded pa = pad(ref, r);
    const Padded pb = pad(test, r);
    double total = 0.0;
    for (int y = 0; y < ref.height; ++y)
        for (int x = 0; x < ref.width; ++x) {
            double ma = 0.0, mb = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double w = wgt[static_cast<std::size_t>(dy + r) * window + (dx + r)];
                    ma += w * pa.at(x + dx, y + dy);
                    mb += w * pb.at(x + dx, y + dy);
                }
            // second pass over the window for the central moments
            double va = 0.0, vb = 0.0, cov = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double w = wgt[static_cast<std::size_t>(dy + r) * window + (dx + r)];
                    const double da = pa.at(x + dx, y + dy) - ma;
                    const double db = pb.at(x + dx, y + dy) - mb;
                    va += w * da * da;
                    vb += w * db * db;
                    cov += w * da * db;
                }
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    return total / static_cast<double>(ref.size());
}

double speckle_index(const ImageGrid& img, int window) {
    const int r = window / 2;
    const double n = static_cast<double>(window) * window;
    const Padded p = pad(img, r);
    const double eta = positivity_floor(img.max_level);
    double total = 0.0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double mean = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) mean += p.at(x + dx, y + dy);
            mean /= n;
            if (mean < eta) continue;  // dark windows contribute zero
            double var = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const double d = p.at(x + dx, y + dy) - mean;
                    var += d * d;
                }
            var /= n;
            total += std::sqrt(var) / mean;
        }
    return total / static_cast<double>(img.size());
}

}  // namespace ttv::reference
