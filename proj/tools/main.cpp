// Command-line front end: synthesize speckle, run the despeckling filters,
// sweep experiment plans, and extract profiles/phantoms for figures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ttv/io.hpp"
#include "ttv/metrics.hpp"
#include "ttv/noise.hpp"
#include "ttv/phantom.hpp"
#include "ttv/plan.hpp"
#include "ttv/solvers.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// File stem for artifact names: basename without extension, or the phantom
// spec with ':' flattened.
std::string stem_of(const std::string& input) {
    if (ttv::is_phantom_spec(input)) {
        std::string s = input;
        for (char& c : s)
            if (c == ':') c = '-';
        return s;
    }
    return fs::path(input).stem().string();
}

const char* stop_name(ttv::RunLog::StopReason r) {
    return r == ttv::RunLog::StopReason::threshold ? "threshold" : "max_iter";
}

void write_convergence_csv(const ttv::RunLog& log, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "iteration,rel_change\n";
    for (const auto& rec : log.records)
        out << rec.iteration << "," << num(rec.rel_change) << "\n";
}

ordered_json params_json(const ttv::SolverParams& p) {
    ordered_json j;
    j["tau"] = p.tau;
    j["gamma"] = p.gamma;
    j["lambda"] = p.lambda_fid;
    j["eps_tv"] = p.eps_tv;
    j["eps_stop"] = p.eps_stop;
    j["max_iter"] = p.max_iter;
    j["mode"] = p.mode == ttv::SolverMode::direct ? "direct" : "regularized";
    j["xi"] = p.xi;
    j["k_edge"] = p.k_edge;
    j["theta"] = p.theta_schedule == ttv::ThetaSchedule::per_step ? "per-step" : "frozen";
    j["flux"] = p.flux_form == ttv::FluxForm::conservative ? "conservative" : "literal";
    j["delta"] = p.delta_floor;
    j["hesitation"] = p.hesitation_lambda;
    j["lambda_decay"] = p.lambda_decay;
    return j;
}

// JSON has no infinity; identical images are reported as null PSNR.
ordered_json json_db(double v) {
    if (std::isinf(v)) return nullptr;
    return v;
}

struct RunOutcome {
    ttv::DespeckleResult res;
    double si_noisy = 0.0, si_restored = 0.0;
    std::optional<double> psnr_noisy, psnr_restored;
    std::optional<double> mssim_noisy, mssim_restored;
    double wall_seconds = 0.0;
};

RunOutcome run_one(ttv::Filter f, const ttv::ImageGrid& noisy,
                   const ttv::ImageGrid* clean, const ttv::SolverParams& p,
                   const std::vector<ttv::FuzzyTemplate>& templates) {
    RunOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    out.res = ttv::run_filter(f, noisy, p, templates);
    out.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    out.si_noisy = ttv::speckle_index(noisy);
    out.si_restored = ttv::speckle_index(out.res.image);
    if (clean) {
        out.psnr_noisy = ttv::psnr(*clean, noisy);
        out.psnr_restored = ttv::psnr(*clean, out.res.image);
        out.mssim_noisy = ttv::mssim(*clean, noisy);
        out.mssim_restored = ttv::mssim(*clean, out.res.image);
    }
    return out;
}

ordered_json metrics_json(const RunOutcome& o) {
    ordered_json m;
    if (o.psnr_noisy) {
        m["psnr_noisy"] = json_db(*o.psnr_noisy);
        m["psnr_restored"] = json_db(*o.psnr_restored);
        m["mssim_noisy"] = *o.mssim_noisy;
        m["mssim_restored"] = *o.mssim_restored;
    }
    m["si_noisy"] = o.si_noisy;
    m["si_restored"] = o.si_restored;
    return m;
}

// Per-filter solver flags shared by despeckle and (as plan overrides) batch.
// Values land in optionals so that unset flags fall back to the filter's own
// defaults rather than one shared constant.
struct ParamFlags {
    std::optional<double> tau, gamma, lambda, eps_tv, eps_stop, delta, k_edge, xi,
        hesitation;
    std::optional<int> max_iter;
    std::optional<std::string> mode, theta, flux;
    bool lambda_decay = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--tau", tau, "Time step (default 0.1; 0.02 for dong)");
        cmd->add_option("--gamma", gamma, "Telegraph damping (default 1)");
        cmd->add_option("--lambda", lambda, "Fidelity weight (default 1; 0.5 for dong)");
        cmd->add_option("--eps-tv", eps_tv,
                        "TV norm guard on the unit intensity scale");
        cmd->add_option("--eps-stop", eps_stop,
                        "Relative-change stopping threshold (default 1e-4)");
        cmd->add_option("--delta", delta, "Edge indicator floor (default 0.05)");
        cmd->add_option("--k-edge", k_edge, "Diffusivity / gray-indicator constant");
        cmd->add_option("--xi", xi, "Gaussian width for smoothed variants (default 1)");
        cmd->add_option("--hesitation", hesitation,
                        "Sugeno hesitation parameter (default 0 = off)");
        cmd->add_option("--max-iter", max_iter, "Iteration cap (default 2000)");
        cmd->add_option("--mode", mode, "direct or regularized")
            ->check(CLI::IsMember({"direct", "regularized"}));
        cmd->add_option("--theta", theta, "Edge indicator schedule: per-step or frozen")
            ->check(CLI::IsMember({"per-step", "per_step", "frozen"}));
        cmd->add_option("--flux", flux, "Divergence stencil: conservative or literal")
            ->check(CLI::IsMember({"conservative", "literal"}));
        cmd->add_flag("--lambda-decay", lambda_decay,
                      "Fade the fidelity weight linearly to zero");
    }

    // Overwrite only the fields whose flags were actually given, so values
    // from a plan file (or a filter's defaults) survive otherwise.
    void apply_to(ttv::SolverParams& p) const {
        if (tau) p.tau = *tau;
        if (gamma) p.gamma = *gamma;
        if (lambda) p.lambda_fid = *lambda;
        if (eps_tv) p.eps_tv = *eps_tv;
        if (eps_stop) p.eps_stop = *eps_stop;
        if (delta) p.delta_floor = *delta;
        if (k_edge) p.k_edge = *k_edge;
        if (xi) p.xi = *xi;
        if (hesitation) p.hesitation_lambda = *hesitation;
        if (max_iter) p.max_iter = *max_iter;
        if (mode) ttv::apply_param(p, "mode", *mode);
        if (theta) ttv::apply_param(p, "theta", *theta);
        if (flux) ttv::apply_param(p, "flux", *flux);
        if (lambda_decay) p.lambda_decay = true;
    }

    ttv::SolverParams resolve(ttv::Filter f) const {
        ttv::SolverParams p = ttv::default_params(f);
        apply_to(p);
        return p;
    }
};

std::vector<ttv::FuzzyTemplate> templates_from(const std::string& path) {
    if (path.empty()) return ttv::default_templates();
    return ttv::load_templates(path);
}

int cmd_noise(const std::string& input, const std::string& out, int looks,
              std::uint64_t seed) {
    const ttv::ImageGrid clean = ttv::load_plan_image(input);
    const ttv::ImageGrid noisy = ttv::apply_speckle(clean, ttv::NoiseSpec{looks, seed});
    ttv::write_image(noisy, out);
    std::printf("speckled %s with looks=%d seed=%llu -> %s\n", input.c_str(), looks,
                static_cast<unsigned long long>(seed), out.c_str());
    return 0;
}

int cmd_phantom(const std::string& shape, int size, int tile, double lo, double hi,
                const std::string& out) {
    ttv::ImageGrid img;
    if (shape == "circle") img = ttv::make_circle(size, lo, hi);
    else if (shape == "checkerboard") img = ttv::make_checkerboard(size, tile ? tile : size / 8, lo, hi);
    else img = ttv::make_ramp(size, lo, hi);
    ttv::write_image(img, out);
    return 0;
}

struct DespeckleArgs {
    std::string input, filter = "proposed", clean_path, templates_path, out_dir = ".",
                format = "png";
    int looks = 1;
    std::uint64_t seed = 0;
    bool timing = false;
    ParamFlags flags;
    bool lambda_given = false;
};

int cmd_despeckle(const DespeckleArgs& a) {
    if (!ttv::is_phantom_spec(a.input) && !fs::exists(a.input)) {
        std::fprintf(stderr, "error: %s: no such input\n", a.input.c_str());
        return 2;
    }
    ttv::Filter f;
    ttv::parse_filter(a.filter, f);
    if (f == ttv::Filter::tdm && a.lambda_given)
        std::fprintf(stderr,
                     "warning: the tdm filter has no fidelity term; --lambda ignored\n");

    std::optional<ttv::ImageGrid> clean;
    ttv::ImageGrid noisy;
    if (ttv::is_phantom_spec(a.input)) {
        clean = ttv::make_phantom(a.input);
        noisy = ttv::apply_speckle(*clean, ttv::NoiseSpec{a.looks, a.seed});
    } else {
        noisy = ttv::read_image(a.input);
        if (!a.clean_path.empty()) clean = ttv::read_image(a.clean_path);
    }

    const ttv::SolverParams p = a.flags.resolve(f);
    const auto templates = templates_from(a.templates_path);
    const RunOutcome o = run_one(f, noisy, clean ? &*clean : nullptr, p, templates);
    std::fprintf(stderr, "%s: %d iteration(s), %s stop, %.3fs\n", a.filter.c_str(),
                 o.res.log.records.empty() ? 0 : o.res.log.records.back().iteration,
                 stop_name(o.res.log.stop_reason), o.wall_seconds);

    fs::create_directories(a.out_dir);
    const std::string stem = stem_of(a.input) + "-" + a.filter;
    const fs::path dir(a.out_dir);
    ttv::write_image(o.res.image, (dir / (stem + "-restored." + a.format)).string());
    ttv::write_image(ttv::ratio_image(noisy, o.res.image),
                     (dir / (stem + "-ratio." + a.format)).string());
    write_convergence_csv(o.res.log, dir / (stem + "-convergence.csv"));
    if (ttv::is_phantom_spec(a.input))
        ttv::write_image(noisy, (dir / (stem + "-noisy." + a.format)).string());

    ordered_json j;
    j["input"] = a.input;
    j["filter"] = a.filter;
    if (ttv::is_phantom_spec(a.input)) {
        j["looks"] = a.looks;
        j["seed"] = a.seed;
    }
    j["params"] = params_json(p);
    j["iterations"] = o.res.log.records.empty() ? 0 : o.res.log.records.back().iteration;
    j["stop_reason"] = stop_name(o.res.log.stop_reason);
    j["last_rel_change"] =
        o.res.log.records.empty() ? 0.0 : o.res.log.records.back().rel_change;
    j["wall_seconds"] = a.timing ? o.wall_seconds : 0.0;
    j["metrics"] = metrics_json(o);
    std::ofstream jf(dir / (stem + "-metrics.json"));
    if (!jf) throw std::runtime_error("cannot write metrics json");
    jf << j.dump(2) << "\n";
    return 0;
}

int cmd_batch(const std::string& plan_path, const std::string& templates_path,
              bool timing, const ParamFlags& flags) {
    ttv::ExperimentPlan plan;
    try {
        plan = ttv::load_plan(plan_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    const auto templates = templates_from(templates_path);
    fs::create_directories(plan.out_dir);
    const fs::path dir(plan.out_dir);

    std::ofstream csv(dir / "summary.csv");
    if (!csv) throw std::runtime_error("cannot write summary.csv");
    csv << "image,filter,looks,seed,psnr_noisy,psnr_restored,mssim_noisy,"
           "mssim_restored,si_noisy,si_restored,iterations,stop_reason,"
           "wall_seconds\n";

    // Every (image, look, seed, filter) cell produces exactly one CSV row and
    // one report record, failed cells included, so tables always line up.
    bool all_ok = true;
    ordered_json runs = ordered_json::array();
    for (const std::string& image : plan.images) {
        std::optional<ttv::ImageGrid> clean;
        std::string image_error;
        try {
            clean = ttv::load_plan_image(image);
        } catch (const std::exception& e) {
            image_error = e.what();
        }
        for (const int looks : plan.looks)
            for (const std::uint64_t seed : plan.seeds) {
                std::optional<ttv::ImageGrid> noisy;
                if (clean)
                    noisy = ttv::apply_speckle(*clean, ttv::NoiseSpec{looks, seed});
                for (const ttv::Filter f : plan.filters) {
                    char tag[64];
                    std::snprintf(tag, sizeof tag, "-L%d-s%llu-", looks,
                                  static_cast<unsigned long long>(seed));
                    const std::string stem = stem_of(image) + tag + ttv::filter_name(f);

                    ordered_json r;
                    r["image"] = image;
                    r["filter"] = ttv::filter_name(f);
                    r["looks"] = looks;
                    r["seed"] = seed;

                    std::string cell_error = image_error;
                    if (cell_error.empty()) {
                        try {
                            ttv::SolverParams p = ttv::resolve_params(plan, f);
                            flags.apply_to(p);
                            const RunOutcome o = run_one(f, *noisy, &*clean, p, templates);
                            const int iters = o.res.log.records.empty()
                                                  ? 0
                                                  : o.res.log.records.back().iteration;
                            const double wall = timing ? o.wall_seconds : 0.0;
                            std::fprintf(stderr, "%s L=%d seed=%llu %s: %d it, %s, %.3fs\n",
                                         image.c_str(), looks,
                                         static_cast<unsigned long long>(seed),
                                         ttv::filter_name(f), iters,
                                         stop_name(o.res.log.stop_reason), o.wall_seconds);

                            ttv::write_image(o.res.image,
                                             (dir / (stem + "-restored.png")).string());
                            write_convergence_csv(o.res.log,
                                                  dir / (stem + "-convergence.csv"));

                            csv << image << "," << ttv::filter_name(f) << "," << looks
                                << "," << seed << "," << num(*o.psnr_noisy) << ","
                                << num(*o.psnr_restored) << "," << num(*o.mssim_noisy)
                                << "," << num(*o.mssim_restored) << ","
                                << num(o.si_noisy) << "," << num(o.si_restored) << ","
                                << iters << "," << stop_name(o.res.log.stop_reason)
                                << "," << num(wall) << "\n";

                            r["params"] = params_json(p);
                            r["iterations"] = iters;
                            r["stop_reason"] = stop_name(o.res.log.stop_reason);
                            r["wall_seconds"] = wall;
                            r["metrics"] = metrics_json(o);
                        } catch (const std::exception& e) {
                            cell_error = e.what();
                        }
                    }
                    if (!cell_error.empty()) {
                        all_ok = false;
                        std::fprintf(stderr, "%s L=%d seed=%llu %s: failed: %s\n",
                                     image.c_str(), looks,
                                     static_cast<unsigned long long>(seed),
                                     ttv::filter_name(f), cell_error.c_str());
                        csv << image << "," << ttv::filter_name(f) << "," << looks
                            << "," << seed << ",nan,nan,nan,nan,nan,nan,0,error,0\n";
                        r["stop_reason"] = "error";
                        r["error"] = cell_error;
                    }
                    runs.push_back(std::move(r));
                }
            }
    }
    ordered_json report;
    report["plan"] = plan_path;
    report["runs"] = std::move(runs);
    std::ofstream jf(dir / "report.json");
    if (!jf) throw std::runtime_error("cannot write report.json");
    jf << report.dump(2) << "\n";
    return all_ok ? 0 : 1;
}

int cmd_profile(const std::vector<std::string>& inputs, std::optional<int> row,
                const std::string& out) {
    std::vector<ttv::ImageGrid> imgs;
    for (const auto& s : inputs) imgs.push_back(ttv::load_plan_image(s));
    for (std::size_t i = 1; i < imgs.size(); ++i)
        if (imgs[i].width != imgs[0].width)
            throw std::runtime_error("profile: images have different widths");
    const int r = row ? *row : imgs[0].height / 2;
    for (const auto& img : imgs)
        if (r < 0 || r >= img.height) {
            std::fprintf(stderr, "error: row %d outside image of height %d\n", r,
                         img.height);
            return 2;
        }

    std::vector<std::vector<std::pair<int, double>>> cols;
    for (const auto& img : imgs) cols.push_back(ttv::line_profile(img, r));

    std::ofstream csv(out);
    if (!csv) throw std::runtime_error(out + ": cannot open for writing");
    csv << "column";
    for (const auto& s : inputs) csv << "," << stem_of(s);
    csv << "\n";
    for (int x = 0; x < imgs[0].width; ++x) {
        csv << x;
        for (const auto& c : cols) csv << "," << num(c[static_cast<std::size_t>(x)].second);
        csv << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuzzy-edge telegraph TV despeckling toolkit"};
    app.require_subcommand(1);

    // noise
    std::string n_input, n_out;
    int n_looks = 1;
    std::uint64_t n_seed = 0;
    auto* noise = app.add_subcommand("noise", "Apply L-look gamma speckle to an image");
    noise->add_option("input", n_input, "Image path or phantom:<shape>:<size>")->required();
    noise->add_option("--out", n_out, "Output image (.pgm or .png)")->required();
    noise->add_option("--looks", n_looks, "Number of looks L (variance 1/L)")
        ->check(CLI::PositiveNumber);
    noise->add_option("--seed", n_seed, "Noise seed");

    // despeckle
    DespeckleArgs d;
    auto* desp = app.add_subcommand("despeckle", "Run one despeckling filter");
    desp->add_option("input", d.input, "Noisy image, or phantom:<spec> to synthesize")
        ->required();
    desp->add_option("--filter", d.filter, "proposed, tdm, or dong")
        ->check(CLI::IsMember({"proposed", "tdm", "dong"}));
    desp->add_option("--clean", d.clean_path, "Clean reference for PSNR/MSSIM");
    desp->add_option("--looks", d.looks, "Looks for phantom input")
        ->check(CLI::PositiveNumber);
    desp->add_option("--seed", d.seed, "Seed for phantom input");
    desp->add_option("--templates", d.templates_path, "Edge template file");
    desp->add_option("--out-dir", d.out_dir, "Artifact directory (default .)");
    desp->add_option("--format", d.format, "Image format: png or pgm")
        ->check(CLI::IsMember({"png", "pgm"}));
    desp->add_flag("--timing", d.timing,
                   "Record wall time in artifacts (off keeps outputs byte-stable)");
    d.flags.attach(desp);

    // batch
    std::string b_plan, b_templates;
    bool b_timing = false;
    ParamFlags b_flags;
    auto* batch = app.add_subcommand("batch", "Run an experiment plan");
    batch->add_option("--plan", b_plan, "Plan file")->required();
    batch->add_option("--templates", b_templates, "Edge template file");
    batch->add_flag("--timing", b_timing, "Record wall time in artifacts");
    b_flags.attach(batch);  // flags beat plan-file values, which beat defaults

    // profile
    std::vector<std::string> p_inputs;
    std::optional<int> p_row;
    std::string p_out;
    auto* prof = app.add_subcommand("profile", "Extract one row from images as CSV");
    prof->add_option("inputs", p_inputs, "Images or phantom specs")->required();
    prof->add_option("--row", p_row, "Row index (default: middle row)");
    prof->add_option("--out", p_out, "Output CSV")->required();

    // phantom
    std::string ph_shape, ph_out;
    int ph_size = 128, ph_tile = 0;
    double ph_lo = 50.0, ph_hi = 200.0;
    auto* ph = app.add_subcommand("phantom", "Write a synthetic test image");
    ph->add_option("--shape", ph_shape, "circle, checkerboard, or ramp")
        ->required()
        ->check(CLI::IsMember({"circle", "checkerboard", "ramp"}));
    ph->add_option("--size", ph_size, "Side length (>= 16)");
    ph->add_option("--tile", ph_tile, "Checkerboard tile side (default size/8)");
    ph->add_option("--lo", ph_lo, "Background level");
    ph->add_option("--hi", ph_hi, "Foreground level");
    ph->add_option("--out", ph_out, "Output image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        d.lambda_given = desp->count("--lambda") > 0;
        if (noise->parsed()) return cmd_noise(n_input, n_out, n_looks, n_seed);
        if (desp->parsed()) return cmd_despeckle(d);
        if (batch->parsed()) return cmd_batch(b_plan, b_templates, b_timing, b_flags);
        if (prof->parsed()) return cmd_profile(p_inputs, p_row, p_out);
        if (ph->parsed()) return cmd_phantom(ph_shape, ph_size, ph_tile, ph_lo, ph_hi, ph_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
