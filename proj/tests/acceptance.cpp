// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Each criterion is self-contained and keeps running after
// failures so the full scorecard always prints.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <utility>
#include <vector>

#include "ttv/core_ops.hpp"
#include "ttv/fuzzy.hpp"
#include "ttv/io.hpp"
#include "ttv/metrics.hpp"
#include "ttv/noise.hpp"
#include "ttv/phantom.hpp"
#include "ttv/reference.hpp"
#include "ttv/solvers.hpp"

using namespace ttv;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void criterion(int n, const std::string& label,
               const std::function<std::pair<bool, std::string>()>& body) {
    bool ok = false;
    std::string detail;
    try {
        auto [passed, text] = body();
        ok = passed;
        detail = std::move(text);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    std::printf("%s - criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n,
                label.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

ImageGrid random_positive(int w, int h, std::uint64_t seed) {
    GammaSampler rng(seed);
    ImageGrid img(w, h);
    for (double& v : img.data) v = 1.0 + 254.0 * rng.uniform();
    return img;
}

ImageGrid noisy_circle(std::uint64_t seed) {
    return apply_speckle(make_circle(128), NoiseSpec{10, seed});
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

}  // namespace

int main() {
    // ---- 1: divergence axioms over 10^4 random membership pairs ----------
    criterion(1, "divergence axioms on 10^4 random pairs", [] {
        const auto t0 = Clock::now();
        GammaSampler rng(20260825);
        int bad = 0;
        for (int i = 0; i < 10000 && bad == 0; ++i) {
            const double a = rng.uniform();
            const double b = rng.uniform();
            const double d = fuzzy_divergence(a, b);
            if (!(d >= -1e-15)) ++bad;                                // nonnegative
            if (!(std::abs(d - fuzzy_divergence(b, a)) <= 1e-15)) ++bad;  // symmetric
            if (!(fuzzy_divergence(a, a) <= 1e-12)) ++bad;            // zero if equal
            if (std::abs(a - b) > 1e-3 && !(d > 1e-12)) ++bad;        // only if equal
            if (!(d <= 2.0 - 2.0 / std::exp(1.0) + 1e-12)) ++bad;     // bounded
        }
        const double dt = seconds_since(t0);
        return std::make_pair(bad == 0 && dt < 1.0,
                              fmt("violations=%d, %.3f s", bad, dt));
    });

    // ---- 2: scalar anchor against the pre-build oracle --------------------
    criterion(2, "fuzzy_divergence(0.3, 0.7) = 0.166457 +/- 1e-6", [] {
        const double d = fuzzy_divergence(0.3, 0.7);
        return std::make_pair(std::abs(d - 0.166457) <= 1e-6, fmt("value=%.9f", d));
    });

    // ---- 3: constant images are fixed points of all three solvers ---------
    criterion(3, "constant image is a one-step fixed point of every solver", [] {
        const ImageGrid flat(128, 128, 100.0);
        std::string detail;
        bool ok = true;
        for (const Filter f : {Filter::proposed, Filter::tdm, Filter::dong}) {
            const DespeckleResult r = run_filter(f, flat, default_params(f));
            double worst = 0.0;
            for (double v : r.image.data) worst = std::max(worst, std::abs(v - 100.0));
            const bool one_step = r.log.records.size() == 1 &&
                                  r.log.stop_reason == RunLog::StopReason::threshold;
            ok = ok && one_step && worst <= 1e-12;
            detail += fmt("%s: drift=%.2e it=%zu; ", filter_name(f), worst,
                          r.log.records.size());
        }
        return std::make_pair(ok, detail);
    });

    // ---- 4: conservative flux conserves mass without fidelity -------------
    criterion(4, "mass conservation over 100 steps (lambda=0, conservative)", [] {
        const ImageGrid img = random_positive(64, 64, 404);
        SolverParams p = default_params(Filter::proposed);
        p.lambda_fid = 0.0;
        p.flux_form = FluxForm::conservative;
        p.max_iter = 100;
        p.eps_stop = 1e-300;  // run all 100 steps
        const DespeckleResult r = run_proposed(img, p);
        const double before = grid_sum(img);
        const double after = grid_sum(r.image);
        const double drift = std::abs(after - before) / before;
        return std::make_pair(r.log.records.size() == 100 && drift <= 1e-9,
                              fmt("steps=%zu, relative drift=%.3e",
                                  r.log.records.size(), drift));
    });

    // ---- 5: speckle multiplier moments for L in {1,3,5,10,33} -------------
    criterion(5, "speckle moments: mean within 1% of 1, var within 5% of 1/L", [] {
        const auto t0 = Clock::now();
        const ImageGrid ones(256, 256, 1.0, 1.0);
        bool ok = true;
        std::string detail;
        for (const int looks : {1, 3, 5, 10, 33}) {
            const ImageGrid field = apply_speckle(
                ones, NoiseSpec{looks, static_cast<std::uint64_t>(1000 + looks)});
            double s = 0.0, ss = 0.0;
            for (double v : field.data) {
                s += v;
                ss += v * v;
            }
            const double n = static_cast<double>(field.size());
            const double mean = s / n;
            const double var = ss / n - mean * mean;
            const bool here = std::abs(mean - 1.0) <= 0.01 &&
                              std::abs(var - 1.0 / looks) <= 0.05 / looks;
            ok = ok && here;
            detail += fmt("L=%d:%s ", looks, here ? "ok" : "BAD");
        }
        const double dt = seconds_since(t0);
        detail += fmt("%.2f s", dt);
        return std::make_pair(ok && dt < 5.0, detail);
    });

    // Criterion-6 fixture, shared with 8, 9, and 11: Circle 128x128, L=10,
    // seed 42, proposed-filter defaults (tau=0.1, eps_stop=1e-4).
    const ImageGrid clean = make_circle(128);
    const ImageGrid noisy = noisy_circle(42);
    const SolverParams defaults = default_params(Filter::proposed);
    DespeckleResult run6;
    bool have6 = false;
    double run6_seconds = 0.0;
    {
        const auto t0 = Clock::now();
        try {
            run6 = run_proposed(noisy, defaults);
            have6 = true;
        } catch (const std::exception&) {
        }
        run6_seconds = seconds_since(t0);
    }

    // ---- 6: despeckling efficacy on the circle fixture --------------------
    criterion(6, "efficacy: PSNR +5 dB, MSSIM +0.10, SI down in under 30 s", [&] {
        if (!have6) return std::make_pair(false, std::string("solver threw"));
        const double psnr_n = psnr(clean, noisy);
        const double psnr_r = psnr(clean, run6.image);
        const double ms_n = mssim(clean, noisy);
        const double ms_r = mssim(clean, run6.image);
        const double si_n = speckle_index(noisy);
        const double si_r = speckle_index(run6.image);
        const bool ok = psnr_r >= psnr_n + 5.0 && ms_r >= ms_n + 0.10 &&
                        si_r < si_n && run6_seconds < 30.0;
        return std::make_pair(
            ok, fmt("PSNR %.2f->%.2f, MSSIM %.3f->%.3f, SI %.3f->%.3f, %.1f s",
                    psnr_n, psnr_r, ms_n, ms_r, si_n, si_r, run6_seconds));
    });

    // ---- 7: proposed beats TDM on PSNR for at least 3 of 4 seeds ----------
    criterion(7, "ordering: proposed PSNR > TDM PSNR on >=3 of 4 seeds", [&] {
        int wins = 0;
        std::string detail;
        for (const std::uint64_t seed : {42ULL, 43ULL, 44ULL, 45ULL}) {
            const ImageGrid noisy_s = noisy_circle(seed);
            const DespeckleResult a = run_proposed(noisy_s, defaults);
            const DespeckleResult b = run_tdm(noisy_s, default_params(Filter::tdm));
            const double pa = psnr(clean, a.image);
            const double pb = psnr(clean, b.image);
            if (pa > pb) ++wins;
            detail += fmt("s%llu: %.2f vs %.2f; ", static_cast<unsigned long long>(seed),
                          pa, pb);
        }
        return std::make_pair(wins >= 3, detail + fmt("wins=%d", wins));
    });

    // ---- 8: threshold stop with a verifiable logged ratio -----------------
    criterion(8, "stopping: threshold before 2000 and the logged ratio recomputes", [&] {
        if (!have6) return std::make_pair(false, std::string("solver threw"));
        const bool by_threshold =
            run6.log.stop_reason == RunLog::StopReason::threshold &&
            static_cast<int>(run6.log.records.size()) < defaults.max_iter;
        if (!by_threshold)
            return std::make_pair(false,
                                  fmt("stopped by %s after %zu iterations",
                                      run6.log.stop_reason == RunLog::StopReason::threshold
                                          ? "threshold"
                                          : "max_iter",
                                      run6.log.records.size()));

        // deterministic replay up to the penultimate iterate, then an
        // independent evaluation of ||I_final - I_prev||^2 / ||I_prev||^2
        SolverParams replay = defaults;
        replay.max_iter = static_cast<int>(run6.log.records.size()) - 1;
        const DespeckleResult prev = run_proposed(noisy, replay);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < run6.image.size(); ++i) {
            const double d = run6.image.data[i] - prev.image.data[i];
            num += d * d;
            den += prev.image.data[i] * prev.image.data[i];
        }
        const double recomputed = num / den;
        const double logged = run6.log.records.back().rel_change;
        const double gap = std::abs(recomputed - logged);
        return std::make_pair(gap <= 1e-12,
                              fmt("iterations=%zu, logged=%.6e, recomputed=%.6e, |diff|=%.2e",
                                  run6.log.records.size(), logged, recomputed, gap));
    });

    // ---- 9: theta bounds and edge response on the circle ------------------
    criterion(9, "theta in [delta,1] everywhere; boundary mean below interior mean", [&] {
        const EdgeDetectorConfig cfg{defaults.delta_floor, 0.0};
        bool in_bounds = true;
        for (const ImageGrid* img : {&noisy, &clean}) {
            const EdgeIndicatorField th = edge_indicator(*img, default_templates(), cfg);
            for (double t : th.theta)
                in_bounds = in_bounds && t >= cfg.delta_floor && t <= 1.0;
        }

        const EdgeIndicatorField th = edge_indicator(clean, default_templates(), cfg);
        const double c = 0.5 * (128 - 1), radius = 32.0;
        double band = 0.0, interior = 0.0;
        int nb = 0, ni = 0;
        for (int y = 0; y < 128; ++y)
            for (int x = 0; x < 128; ++x) {
                const double dist = std::hypot(x - c, y - c);
                if (std::abs(dist - radius) <= 1.5) {
                    band += th.at(x, y);
                    ++nb;
                } else if (dist <= radius - 5.0) {
                    interior += th.at(x, y);
                    ++ni;
                }
            }
        band /= nb;
        interior /= ni;
        return std::make_pair(in_bounds && band < interior,
                              fmt("bounds %s, band mean=%.4f, interior mean=%.4f",
                                  in_bounds ? "ok" : "violated", band, interior));
    });

    // ---- 10: production kernels match serial brute-force oracles ----------
    criterion(10, "kernel outputs match brute-force oracles within 1e-8", [] {
        const ImageGrid a = random_positive(32, 32, 77);
        const ImageGrid b = random_positive(32, 32, 78);
        const ImageGrid c = random_positive(17, 23, 79);
        double worst = 0.0;
        auto track = [&worst](double got, double want) {
            worst = std::max(worst, std::abs(got - want));
        };

        const Kernel2D k = gaussian_kernel(1.0, 3);
        const ImageGrid conv = convolve(c, k);
        const ImageGrid conv_ref = reference::convolve(c, k);
        for (std::size_t i = 0; i < conv.size(); ++i) track(conv.data[i], conv_ref.data[i]);

        const VectorField g = central_gradient(c);
        const VectorField g_ref = reference::central_gradient(c);
        for (std::size_t i = 0; i < g.dx.size(); ++i) {
            track(g.dx[i], g_ref.dx[i]);
            track(g.dy[i], g_ref.dy[i]);
        }

        EdgeIndicatorField th;
        th.width = a.width;
        th.height = a.height;
        GammaSampler rng(80);
        th.theta.resize(a.size());
        for (double& t : th.theta) t = 0.05 + 0.95 * rng.uniform();
        for (const FluxForm form : {FluxForm::conservative, FluxForm::literal}) {
            const ImageGrid dv = tv_divergence(a, th, 0.02, form);
            const ImageGrid dv_ref = reference::tv_divergence(a, th, 0.02, form);
            for (std::size_t i = 0; i < dv.size(); ++i) track(dv.data[i], dv_ref.data[i]);
        }

        track(mssim(a, b), reference::mssim(a, b));
        track(speckle_index(a), reference::speckle_index(a));
        return std::make_pair(worst <= 1e-8, fmt("worst |diff|=%.3e", worst));
    });

    // ---- 11: the full pipeline is byte-deterministic ----------------------
    criterion(11, "end-to-end reruns are byte-identical", [] {
        const fs::path root =
            fs::temp_directory_path() / ("ttv_accept_" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
        const std::string args =
            " despeckle phantom:circle:128 --looks 10 --seed 42 --out-dir ";
        const std::string run1 = "\"" + std::string(CLI_BIN) + "\"" + args +
                                 (root / "r1").string() + " > /dev/null 2>&1";
        const std::string run2 = "OMP_NUM_THREADS=2 \"" + std::string(CLI_BIN) + "\"" +
                                 args + (root / "r2").string() + " > /dev/null 2>&1";
        int rc1 = std::system(run1.c_str());
        int rc2 = std::system(run2.c_str());
        if (!WIFEXITED(rc1) || WEXITSTATUS(rc1) != 0 || !WIFEXITED(rc2) ||
            WEXITSTATUS(rc2) != 0) {
            fs::remove_all(root);
            return std::make_pair(false, std::string("pipeline run failed"));
        }
        bool ok = true;
        std::string detail;
        const std::string stem = "phantom-circle-128-proposed";
        for (const char* name :
             {"-restored.png", "-ratio.png", "-noisy.png", "-convergence.csv",
              "-metrics.json"}) {
            const bool same = slurp((root / "r1" / (stem + std::string(name))).string()) ==
                              slurp((root / "r2" / (stem + std::string(name))).string());
            ok = ok && same;
            if (!same) detail += fmt("%s differs; ", name);
        }
        fs::remove_all(root);
        return std::make_pair(ok, ok ? std::string("all artifacts identical") : detail);
    });

    std::printf("%s: %d of 11 criteria failed\n", failures == 0 ? "OK" : "GATE FAILED",
                failures);
    return failures == 0 ? 0 : 1;
}
