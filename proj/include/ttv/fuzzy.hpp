#ifndef TTV_FUZZY_HPP
#define TTV_FUZZY_HPP

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "ttv/image.hpp"

namespace ttv {

/// Per-pixel membership values in [0, 1].
struct MembershipGrid {
    int width = 0;
    int height = 0;
    std::vector<double> mu;

    double at(int x, int y) const { return mu[static_cast<std::size_t>(y) * width + x]; }
};

/// 3x3 membership template used by the divergence edge detector.
struct FuzzyTemplate {
    std::string label;
    std::array<double, 9> entries{};  // row-major, all in [0,1]
};

/// Per-pixel smoothing weight theta in [delta_floor, 1]: near the floor on
/// edges, near 1 in homogeneous regions.
struct EdgeIndicatorField {
    int width = 0;
    int height = 0;
    std::vector<double> theta;
    double delta_floor = 0.05;

    double at(int x, int y) const { return theta[static_cast<std::size_t>(y) * width + x]; }
};

/// Supremum of the pairwise divergence on [0,1]^2, attained at |a-b| = 1.
inline constexpr double kMaxDivergence = 1.2642411176571153;  // 2 - 2/e

/// Exponential divergence between two membership values:
///   2 - (1 - a + b) e^(a-b) - (1 - b + a) e^(b-a).
/// Symmetric, zero iff a == b, increasing in |a - b|.
double fuzzy_divergence(double mu_p, double mu_q);

/// Same quantity as a function of the membership difference t = a - b,
/// valid for t in [-1, 1]. One exp instead of two; kept separate from
/// fuzzy_divergence so the checked entry point stays the printed formula.
inline double divergence_of_difference(double t) {
    const double e = std::exp(t);
    return 2.0 - (1.0 - t) * e - (1.0 + t) / e;
}

/// Max over templates of the min elementwise divergence between the window
/// and the template.
double ifd_measure(const std::array<double, 9>& window,
                   const std::vector<FuzzyTemplate>& templates);

/// Membership image: mu = I / max_level clamped to [0,1].
MembershipGrid to_membership(const ImageGrid& img);

struct EdgeDetectorConfig {
    double delta_floor = 0.05;     // lower clamp for theta, in (0,1]
    double hesitation_lambda = 0;  // > 0 enables the Sugeno-type adjustment
};

/// Sugeno-type intuitionistic adjustment: nu = (1-mu)/(1+lambda*mu),
/// pi = 1 - mu - nu, returns mu + pi. Identity at lambda = 0.
double with_hesitation(double mu, double lambda);

/// Per-pixel edge indicator: the divergence measure over the reflect-padded
/// 3x3 membership window, normalized by kMaxDivergence, then
/// theta = clamp(1 - F, delta_floor, 1).
EdgeIndicatorField edge_indicator(const ImageGrid& img,
                                  const std::vector<FuzzyTemplate>& templates,
                                  const EdgeDetectorConfig& cfg = {});

/// 16 binary step templates: vertical, horizontal, and both diagonals, each
/// in two polarities and two step offsets.
const std::vector<FuzzyTemplate>& default_templates();

/// Template file format: per block, a label line followed by three lines of
/// three reals in [0,1]; blocks separated by blank lines, '#' starts a
/// comment line.
std::vector<FuzzyTemplate> parse_templates(std::istream& in);
std::vector<FuzzyTemplate> load_templates(const std::string& path);

}  // namespace ttv

#endif
