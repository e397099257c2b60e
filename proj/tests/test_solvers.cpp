#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ttv/core_ops.hpp"
#include "ttv/metrics.hpp"
#include "ttv/noise.hpp"
#include "ttv/phantom.hpp"
#include "ttv/reference.hpp"
#include "ttv/solvers.hpp"

using namespace ttv;

namespace {

ImageGrid random_image(int w, int h, std::uint64_t seed, double lo, double hi) {
    GammaSampler rng(seed);
    ImageGrid img(w, h);
    for (double& v : img.data) v = lo + (hi - lo) * rng.uniform();
    return img;
}

EdgeIndicatorField constant_theta(int w, int h, double value) {
    EdgeIndicatorField th;
    th.width = w;
    th.height = h;
    th.theta.assign(static_cast<std::size_t>(w) * h, value);
    return th;
}

}  // namespace

TEST_CASE("parameter validation rejects out-of-range values") {
    SolverParams p;
    p.validate();  // defaults are valid

    auto bad = [](auto&& tweak) {
        SolverParams q;
        tweak(q);
        CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    };
    bad([](SolverParams& q) { q.tau = 0.0; });
    bad([](SolverParams& q) { q.gamma = -0.1; });
    bad([](SolverParams& q) { q.lambda_fid = -1.0; });
    bad([](SolverParams& q) { q.eps_tv = 0.0; });
    bad([](SolverParams& q) { q.eps_stop = 0.0; });
    bad([](SolverParams& q) { q.max_iter = 0; });
    bad([](SolverParams& q) { q.xi = 0.0; });
    bad([](SolverParams& q) { q.k_edge = -0.5; });
    bad([](SolverParams& q) { q.delta_floor = 0.0; });
    bad([](SolverParams& q) { q.delta_floor = 1.5; });
    bad([](SolverParams& q) { q.hesitation_lambda = -1.0; });
}

TEST_CASE("per-filter defaults") {
    const SolverParams p = default_params(Filter::proposed);
    CHECK(p.tau == 0.1);
    CHECK(p.gamma == 1.0);
    CHECK(p.lambda_fid == 1.0);
    CHECK(p.eps_stop == 1e-4);
    CHECK(p.max_iter == 2000);
    CHECK(p.theta_schedule == ThetaSchedule::per_step);
    CHECK(p.flux_form == FluxForm::conservative);

    CHECK(default_params(Filter::tdm).k_edge > p.k_edge);
    CHECK(default_params(Filter::dong).tau < p.tau);
}

TEST_CASE("filter names round-trip") {
    Filter f{};
    for (const char* n : {"proposed", "tdm", "dong"}) {
        CHECK(parse_filter(n, f));
        CHECK(filter_name(f) == std::string(n));
    }
    CHECK_FALSE(parse_filter("median", f));
}

TEST_CASE("tv divergence matches the serial oracle in both forms") {
    const ImageGrid img = random_image(9, 7, 11, 10.0, 240.0);
    GammaSampler rng(12);
    EdgeIndicatorField th = constant_theta(9, 7, 1.0);
    for (double& t : th.theta) t = 0.05 + 0.95 * rng.uniform();

    for (const FluxForm form : {FluxForm::conservative, FluxForm::literal}) {
        const ImageGrid a = tv_divergence(img, th, 1e-3, form);
        const ImageGrid b = reference::tv_divergence(img, th, 1e-3, form);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-10));
    }
}

TEST_CASE("conservative tv divergence sums to zero") {
    const ImageGrid img = random_image(23, 14, 3, 1.0, 255.0);
    const EdgeIndicatorField th = constant_theta(23, 14, 1.0);
    const ImageGrid div = tv_divergence(img, th, 1e-3, FluxForm::conservative);
    double sum = 0.0;
    for (double v : div.data) sum += v;
    CHECK(std::abs(sum) <= 1e-9 * static_cast<double>(div.size()));
}

TEST_CASE("tv divergence of a constant image is zero") {
    const ImageGrid img(11, 11, 42.0);
    const EdgeIndicatorField th = constant_theta(11, 11, 0.6);
    for (const FluxForm form : {FluxForm::conservative, FluxForm::literal}) {
        const ImageGrid div = tv_divergence(img, th, 1e-3, form);
        for (double v : div.data) CHECK(v == 0.0);
    }
}

TEST_CASE("tv divergence validates its inputs") {
    const ImageGrid img(4, 4, 1.0);
    const EdgeIndicatorField th = constant_theta(4, 4, 1.0);
    CHECK_THROWS_AS(tv_divergence(img, constant_theta(3, 4, 1.0), 1e-3),
                    std::invalid_argument);
    CHECK_THROWS_AS(tv_divergence(img, th, 0.0), std::invalid_argument);
}

TEST_CASE("pm diffusivity shape") {
    CHECK(pm_diffusivity(0.0, 0.3) == 1.0);
    CHECK(pm_diffusivity(0.3, 0.3) == doctest::Approx(0.5));
    CHECK(pm_diffusivity(0.6, 0.3) < pm_diffusivity(0.3, 0.3));
}

TEST_CASE("constant images are fixed points of all three solvers") {
    const ImageGrid img(32, 32, 100.0);
    for (const Filter f : {Filter::proposed, Filter::tdm, Filter::dong}) {
        const DespeckleResult r = run_filter(f, img, default_params(f));
        REQUIRE(r.log.records.size() == 1);
        CHECK(r.log.records[0].iteration == 1);
        CHECK(r.log.records[0].rel_change == 0.0);
        CHECK(r.log.stop_reason == RunLog::StopReason::threshold);
        for (double v : r.image.data) CHECK(v == doctest::Approx(100.0).epsilon(1e-14));
    }
}

TEST_CASE("proposed and dong solvers conserve mass when the fidelity term is off") {
    const ImageGrid img = random_image(16, 16, 21, 5.0, 250.0);
    const double before = grid_sum(img);
    for (const Filter f : {Filter::proposed, Filter::dong}) {
        SolverParams p = default_params(f);
        p.lambda_fid = 0.0;
        p.flux_form = FluxForm::conservative;
        p.max_iter = 100;
        p.eps_stop = 1e-300;  // run all 100 steps
        const DespeckleResult r = run_filter(f, img, p);
        CHECK(r.log.records.size() == 100);
        const double after = grid_sum(r.image);
        CHECK(std::abs(after - before) <= 1e-9 * before);
    }
}

TEST_CASE("run log iterations are contiguous and the reason matches the tail") {
    const ImageGrid noisy =
        apply_speckle(make_circle(32), NoiseSpec{10, 3});
    SolverParams p = default_params(Filter::proposed);
    p.max_iter = 40;
    const DespeckleResult r = run_proposed(noisy, p);
    REQUIRE(!r.log.records.empty());
    for (std::size_t i = 0; i < r.log.records.size(); ++i)
        CHECK(r.log.records[i].iteration == static_cast<int>(i) + 1);
    const double last = r.log.records.back().rel_change;
    if (r.log.stop_reason == RunLog::StopReason::threshold)
        CHECK(last <= p.eps_stop);
    else
        CHECK(r.log.records.size() == 40);
}

TEST_CASE("solver output is invariant under intensity rescaling") {
    const ImageGrid noisy = apply_speckle(make_circle(24), NoiseSpec{5, 8});
    ImageGrid unit = noisy;
    for (double& v : unit.data) v /= 255.0;
    unit.max_level = 1.0;

    SolverParams p = default_params(Filter::proposed);
    p.max_iter = 25;
    const DespeckleResult a = run_proposed(noisy, p);
    const DespeckleResult b = run_proposed(unit, p);
    CHECK(a.log.records.size() == b.log.records.size());
    for (std::size_t i = 0; i < a.image.size(); ++i)
        CHECK(a.image.data[i] == doctest::Approx(255.0 * b.image.data[i]).epsilon(1e-11));
}

TEST_CASE("tdm ignores the fidelity weight entirely") {
    const ImageGrid noisy = apply_speckle(make_circle(24), NoiseSpec{4, 2});
    SolverParams p = default_params(Filter::tdm);
    p.max_iter = 15;
    const DespeckleResult a = run_tdm(noisy, p);
    p.lambda_fid = 25.0;
    const DespeckleResult b = run_tdm(noisy, p);
    CHECK(a.image.data == b.image.data);
}

TEST_CASE("dispatch routes to the same implementations") {
    const ImageGrid noisy = apply_speckle(make_circle(20), NoiseSpec{4, 6});
    SolverParams p = default_params(Filter::tdm);
    p.max_iter = 10;
    const DespeckleResult via_dispatch = run_filter(Filter::tdm, noisy, p);
    const DespeckleResult direct = run_tdm(noisy, p);
    CHECK(via_dispatch.image.data == direct.image.data);
}

TEST_CASE("frozen and per-step schedules genuinely differ on noisy input") {
    const ImageGrid noisy = apply_speckle(make_circle(24), NoiseSpec{3, 4});
    SolverParams p = default_params(Filter::proposed);
    p.max_iter = 12;
    p.eps_stop = 1e-300;
    const DespeckleResult live = run_proposed(noisy, p);
    p.theta_schedule = ThetaSchedule::frozen;
    const DespeckleResult frz = run_proposed(noisy, p);
    CHECK(live.image.data != frz.image.data);
}

TEST_CASE("regularized mode and literal flux run to completion") {
    const ImageGrid noisy = apply_speckle(make_circle(24), NoiseSpec{4, 9});
    SolverParams p = default_params(Filter::proposed);
    p.max_iter = 12;

    p.mode = SolverMode::regularized;
    const DespeckleResult reg = run_proposed(noisy, p);
    for (double v : reg.image.data) CHECK(std::isfinite(v));

    p.mode = SolverMode::direct;
    p.flux_form = FluxForm::literal;
    const DespeckleResult lit = run_proposed(noisy, p);
    for (double v : lit.image.data) CHECK(std::isfinite(v));
}

TEST_CASE("regularized conductance respects its analytic bounds") {
    const ImageGrid noisy = apply_speckle(make_circle(32), NoiseSpec{2, 13});
    const SolverParams p = default_params(Filter::proposed);
    const std::vector<double> g = regularized_coefficient(noisy, p);

    // kappa = delta / (1 + max |grad G*I|) on the unit intensity scale
    ImageGrid unit = noisy;
    for (double& v : unit.data) v /= unit.max_level;
    unit.max_level = 1.0;
    const ImageGrid smooth =
        convolve(unit, gaussian_kernel(p.xi, default_kernel_radius(p.xi)));
    const VectorField grad = central_gradient(smooth);
    double gmax = 0.0;
    for (std::size_t i = 0; i < grad.dx.size(); ++i)
        gmax = std::max(gmax, std::hypot(grad.dx[i], grad.dy[i]));
    const double kappa = p.delta_floor / (1.0 + gmax);

    REQUIRE(g.size() == noisy.size());
    for (double v : g) {
        CHECK(v >= kappa - 1e-12);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("fidelity keeps iterates positive on dark inputs") {
    ImageGrid img = random_image(16, 16, 31, 0.0, 30.0);
    img.at(0, 0) = 0.0;
    SolverParams p = default_params(Filter::proposed);
    p.max_iter = 30;
    const DespeckleResult r = run_proposed(img, p);
    for (double v : r.image.data) CHECK(v > 0.0);
}

TEST_CASE("gray level indicator properties") {
    const ImageGrid flat(16, 16, 80.0);
    const ImageGrid a = gray_level_indicator(flat, 0.01, 1.0);
    for (double v : a.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    const ImageGrid img = random_image(24, 24, 17, 1.0, 255.0);
    const ImageGrid b = gray_level_indicator(img, 0.01, 1.0);
    double top = 0.0;
    for (double v : b.data) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-12);
        top = std::max(top, v);
    }
    CHECK(top == doctest::Approx(1.0).epsilon(1e-12));  // attained at the max

    CHECK_THROWS_AS(gray_level_indicator(ImageGrid(4, 4, 0.0), 0.01, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(gray_level_indicator(flat, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("gray level indicator matches the direct formula on a two-level phantom") {
    const ImageGrid circle = make_circle(48);  // 50 background, 200 disk
    const double k = 1e-3, xi = 1.0;
    const ImageGrid alpha = gray_level_indicator(circle, k, xi);

    // independent path: serial convolution plus the scalar formula per pixel
    const ImageGrid s =
        reference::convolve(circle, gaussian_kernel(xi, default_kernel_radius(xi)));
    double m = 0.0;
    for (double v : s.data) m = std::max(m, v);
    const double boost = (1.0 + k * m * m) / (k * m * m);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double want = (1.0 - 1.0 / (1.0 + k * s.data[i] * s.data[i])) * boost;
        CHECK(alpha.data[i] == doctest::Approx(want).epsilon(1e-12));
    }

    // diffusion speed follows gray level: dark background below bright disk
    CHECK(alpha.at(2, 2) < alpha.at(23, 23));
}

TEST_CASE("dong solver reduces the speckle index on a noisy phantom") {
    const ImageGrid noisy = apply_speckle(make_circle(48), NoiseSpec{4, 19});
    SolverParams p = default_params(Filter::dong);
    p.max_iter = 200;
    const DespeckleResult r = run_dong(noisy, p);
    for (double v : r.image.data) {
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }
    CHECK(speckle_index(r.image) < speckle_index(noisy));
}

TEST_CASE("an absurd time step surfaces as a blowup diagnostic") {
    const ImageGrid noisy = apply_speckle(make_circle(16), NoiseSpec{1, 1});
    SolverParams p = default_params(Filter::proposed);
    // tau^2 ~ 1e308: the first saturated-flux divergence already overflows
    p.tau = 1e154;
    p.gamma = 0.0;
    p.lambda_fid = 0.0;
    p.max_iter = 5;
    p.eps_stop = 1e-300;
    try {
        run_proposed(noisy, p);
        FAIL("expected blowup_error");
    } catch (const blowup_error& e) {
        CHECK(e.px >= 0);
        CHECK(e.px < 16);
        CHECK(e.py >= 0);
        CHECK(e.py < 16);
        CHECK(e.iter >= 1);
        CHECK(doctest::String(e.what()) == doctest::Contains("proposed"));
    }
}

TEST_CASE("telegraph_step applies one explicit update") {
    const ImageGrid noisy = random_image(8, 8, 41, 10.0, 200.0);
    ImageGrid unit = noisy;
    for (double& v : unit.data) v /= 255.0;
    unit.max_level = 1.0;

    SolverState st;
    st.curr = unit;
    st.prev = unit;
    SolverParams p;
    p.lambda_fid = 0.0;
    const EdgeIndicatorField th = constant_theta(8, 8, 1.0);
    telegraph_step(st, th, unit, p);
    CHECK(st.iteration == 1);

    // same update spelled out with the public pieces:
    // (1+gt) I' = (2+gt) I - I_prev + tau^2 div
    const ImageGrid div = tv_divergence(unit, th, p.eps_tv, p.flux_form);
    for (std::size_t i = 0; i < unit.size(); ++i) {
        const double expect = ((2.0 + p.gamma * p.tau) * unit.data[i] - unit.data[i] +
                               p.tau * p.tau * div.data[i]) /
                              (1.0 + p.gamma * p.tau);
        CHECK(st.curr.data[i] == doctest::Approx(expect).epsilon(1e-13));
    }
}
