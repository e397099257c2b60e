#include "ttv/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ttv {

double fuzzy_divergence(double mu_p, double mu_q) {
    if (!(mu_p >= 0.0 && mu_p <= 1.0) || !(mu_q >= 0.0 && mu_q <= 1.0))
        throw std::domain_error("fuzzy_divergence: memberships must lie in [0,1]");
    return 2.0 - (1.0 - mu_p + mu_q) * std::exp(mu_p - mu_q) -
           (1.0 - mu_q + mu_p) * std::exp(mu_q - mu_p);
}

double ifd_measure(const std::array<double, 9>& window,
                   const std::vector<FuzzyTemplate>& templates) {
    if (templates.empty())
        throw std::invalid_argument("ifd_measure: template list is empty");
    double best = 0.0;
    for (const FuzzyTemplate& t : templates) {
        double m = fuzzy_divergence(window[0], t.entries[0]);
        for (int e = 1; e < 9 && m > best; ++e)
            m = std::min(m, fuzzy_divergence(window[e], t.entries[e]));
        best = std::max(best, m);
    }
    return best;
}

MembershipGrid to_membership(const ImageGrid& img) {
    MembershipGrid m;
    m.width = img.width;
    m.height = img.height;
    m.mu.resize(img.size());
    const double inv = 1.0 / img.max_level;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            m.mu[i] = std::clamp(img.data[i] * inv, 0.0, 1.0);
        }
    }
    return m;
}

double with_hesitation(double mu, double lambda) {
    const double nu = (1.0 - mu) / (1.0 + lambda * mu);
    const double pi = 1.0 - mu - nu;
    return std::clamp(mu + pi, 0.0, 1.0);
}

EdgeIndicatorField edge_indicator(const ImageGrid& img,
                                  const std::vector<FuzzyTemplate>& templates,
                                  const EdgeDetectorConfig& cfg) {
    if (!(cfg.delta_floor > 0.0 && cfg.delta_floor <= 1.0))
        throw std::invalid_argument("edge_indicator: delta_floor must lie in (0,1]");
    if (templates.empty())
        throw std::invalid_argument("edge_indicator: template list is empty");

    MembershipGrid mem = to_membership(img);
    if (cfg.hesitation_lambda > 0.0) {
        for (double& v : mem.mu) v = with_hesitation(v, cfg.hesitation_lambda);
    }

    // Templates usually reuse the same few membership levels (0 and 1 for the
    // default set), so precompute one divergence field per distinct level and
    // run the max-min scan on lookups instead of re-evaluating exponentials
    // per (pixel, template, element).
    std::vector<double> levels;
    std::vector<std::array<int, 9>> level_index(templates.size());
    for (std::size_t t = 0; t < templates.size(); ++t) {
        for (int e = 0; e < 9; ++e) {
            const double q = templates[t].entries[e];
            auto it = std::find(levels.begin(), levels.end(), q);
            if (it == levels.end()) {
                levels.push_back(q);
                it = levels.end() - 1;
            }
            level_index[t][e] = static_cast<int>(it - levels.begin());
        }
    }

    const int w = img.width, h = img.height;
    const std::size_t n = img.size();
    std::vector<std::vector<double>> div_field(levels.size(), std::vector<double>(n));
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            for (std::size_t d = 0; d < levels.size(); ++d)
                div_field[d][i] = divergence_of_difference(mem.mu[i] - levels[d]);
        }
    }

    EdgeIndicatorField out;
    out.width = w;
    out.height = h;
    out.delta_floor = cfg.delta_floor;
    out.theta.resize(n);
    const double inv_dmax = 1.0 / kMaxDivergence;

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        std::array<std::size_t, 9> nb;  // window pixel indices, replicated at borders
        for (int x = 0; x < w; ++x) {
            int e = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    nb[e++] = static_cast<std::size_t>(yy) * w + xx;
                }
            }
            double best = 0.0;
            for (std::size_t t = 0; t < templates.size(); ++t) {
                const std::array<int, 9>& idx = level_index[t];
                double m = div_field[idx[0]][nb[0]];
                for (int k = 1; k < 9 && m > best; ++k)
                    m = std::min(m, div_field[idx[k]][nb[k]]);
                best = std::max(best, m);
            }
            const double f_norm = std::min(best * inv_dmax, 1.0);
            out.theta[static_cast<std::size_t>(y) * w + x] =
                std::clamp(1.0 - f_norm, cfg.delta_floor, 1.0);
        }
    }
    return out;
}

namespace {

FuzzyTemplate make_template(const char* label, std::array<double, 9> e) {
    FuzzyTemplate t;
    t.label = label;
    t.entries = e;
    return t;
}

}  // namespace

const std::vector<FuzzyTemplate>& default_templates() {
    static const std::vector<FuzzyTemplate> set = {
        // vertical steps
        make_template("v1", {0, 1, 1, 0, 1, 1, 0, 1, 1}),
        make_template("v2", {0, 0, 1, 0, 0, 1, 0, 0, 1}),
        make_template("v3", {1, 0, 0, 1, 0, 0, 1, 0, 0}),
        make_template("v4", {1, 1, 0, 1, 1, 0, 1, 1, 0}),
        // horizontal steps
        make_template("h1", {0, 0, 0, 1, 1, 1, 1, 1, 1}),
        make_template("h2", {0, 0, 0, 0, 0, 0, 1, 1, 1}),
        make_template("h3", {1, 1, 1, 0, 0, 0, 0, 0, 0}),
        make_template("h4", {1, 1, 1, 1, 1, 1, 0, 0, 0}),
        // main-diagonal steps
        make_template("d1", {0, 0, 0, 1, 0, 0, 1, 1, 0}),
        make_template("d2", {1, 0, 0, 1, 1, 0, 1, 1, 1}),
        make_template("d3", {1, 1, 1, 0, 1, 1, 0, 0, 1}),
        make_template("d4", {0, 1, 1, 0, 0, 1, 0, 0, 0}),
        // anti-diagonal steps
        make_template("a1", {0, 0, 0, 0, 0, 1, 0, 1, 1}),
        make_template("a2", {0, 0, 1, 0, 1, 1, 1, 1, 1}),
        make_template("a3", {1, 1, 1, 1, 1, 0, 1, 0, 0}),
        make_template("a4", {1, 1, 0, 1, 0, 0, 0, 0, 0}),
    };
    return set;
}

std::vector<FuzzyTemplate> parse_templates(std::istream& in) {
    std::vector<FuzzyTemplate> out;
    std::string line;
    int lineno = 0;

    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("templates: line " + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = line;
        const auto pos = trimmed.find('#');
        if (pos != std::string::npos) trimmed.erase(pos);
        while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
            trimmed.pop_back();
        if (trimmed.empty()) continue;

        FuzzyTemplate t;
        t.label = trimmed;
        for (int r = 0; r < 3; ++r) {
            if (!std::getline(in, line)) fail("unexpected end of file inside template '" + t.label + "'");
            ++lineno;
            std::istringstream row(line);
            for (int c = 0; c < 3; ++c) {
                double v;
                if (!(row >> v)) fail("expected 3 numbers");
                if (!(v >= 0.0 && v <= 1.0)) fail("entry outside [0,1]");
                t.entries[static_cast<std::size_t>(r) * 3 + c] = v;
            }
            double extra;
            if (row >> extra) fail("more than 3 numbers on a row");
        }
        out.push_back(std::move(t));
    }
    if (out.empty()) throw std::runtime_error("templates: no templates found");
    return out;
}

std::vector<FuzzyTemplate> load_templates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("templates: cannot open " + path);
    return parse_templates(in);
}

}  // namespace ttv
