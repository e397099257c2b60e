#include "ttv/plan.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "ttv/io.hpp"
#include "ttv/phantom.hpp"

namespace ttv {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    return parts;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
    return v;
}

int to_int(const std::string& s) {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& s) {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
    return v;
}

bool to_flag(const std::string& s) {
    if (s == "1" || s == "true" || s == "on") return true;
    if (s == "0" || s == "false" || s == "off") return false;
    throw std::invalid_argument("expected a boolean, got '" + s + "'");
}

[[noreturn]] void fail_line(int line, const std::string& what) {
    throw std::invalid_argument("plan line " + std::to_string(line) + ": " + what);
}

}  // namespace

bool apply_param(SolverParams& p, const std::string& name, const std::string& value) {
    if (name == "tau") p.tau = to_double(value);
    else if (name == "gamma") p.gamma = to_double(value);
    else if (name == "lambda") p.lambda_fid = to_double(value);
    else if (name == "eps-tv") p.eps_tv = to_double(value);
    else if (name == "eps-stop") p.eps_stop = to_double(value);
    else if (name == "delta") p.delta_floor = to_double(value);
    else if (name == "k-edge") p.k_edge = to_double(value);
    else if (name == "xi") p.xi = to_double(value);
    else if (name == "hesitation") p.hesitation_lambda = to_double(value);
    else if (name == "max-iter") p.max_iter = to_int(value);
    else if (name == "lambda-decay") p.lambda_decay = to_flag(value);
    else if (name == "mode") {
        if (value == "direct") p.mode = SolverMode::direct;
        else if (value == "regularized") p.mode = SolverMode::regularized;
        else throw std::invalid_argument("mode must be direct or regularized, got '" + value + "'");
    } else if (name == "theta") {
        if (value == "per-step" || value == "per_step") p.theta_schedule = ThetaSchedule::per_step;
        else if (value == "frozen") p.theta_schedule = ThetaSchedule::frozen;
        else throw std::invalid_argument("theta must be per-step or frozen, got '" + value + "'");
    } else if (name == "flux") {
        if (value == "conservative") p.flux_form = FluxForm::conservative;
        else if (value == "literal") p.flux_form = FluxForm::literal;
        else throw std::invalid_argument("flux must be conservative or literal, got '" + value + "'");
    } else {
        return false;
    }
    return true;
}

SolverParams resolve_params(const ExperimentPlan& plan, Filter f) {
    SolverParams p = default_params(f);
    const std::string prefix = std::string(filter_name(f)) + ".";
    for (const auto& [key, value] : plan.overrides)
        if (key.find('.') == std::string::npos) apply_param(p, key, value);
    for (const auto& [key, value] : plan.overrides)
        if (key.rfind(prefix, 0) == 0) apply_param(p, key.substr(prefix.size()), value);
    return p;
}

ExperimentPlan parse_plan(std::istream& in) {
    ExperimentPlan plan;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string text = trim(raw);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) fail_line(line, "expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) fail_line(line, "empty key");
        if (value.empty()) fail_line(line, "empty value for '" + key + "'");

        try {
            if (key == "image") {
                plan.images.push_back(value);
            } else if (key == "looks") {
                std::vector<int> looks;
                for (const auto& tok : split(value, ',')) {
                    const int l = to_int(tok);
                    if (l < 1) throw std::invalid_argument("looks must be at least 1");
                    looks.push_back(l);
                }
                if (looks.empty()) throw std::invalid_argument("empty looks list");
                plan.looks = std::move(looks);
            } else if (key == "seeds") {
                std::vector<std::uint64_t> seeds;
                for (const auto& tok : split(value, ',')) seeds.push_back(to_u64(tok));
                if (seeds.empty()) throw std::invalid_argument("empty seeds list");
                plan.seeds = std::move(seeds);
            } else if (key == "filters") {
                std::vector<Filter> filters;
                for (const auto& tok : split(value, ',')) {
                    Filter f;
                    if (!parse_filter(tok, f))
                        throw std::invalid_argument("unknown filter '" + tok + "'");
                    filters.push_back(f);
                }
                if (filters.empty()) throw std::invalid_argument("empty filter list");
                plan.filters = std::move(filters);
            } else if (key == "out_dir") {
                plan.out_dir = value;
            } else {
                // parameter override, possibly <filter>.<param>
                std::string param = key;
                const auto dot = key.find('.');
                if (dot != std::string::npos) {
                    Filter f;
                    if (!parse_filter(key.substr(0, dot), f))
                        throw std::invalid_argument("unknown filter '" + key.substr(0, dot) +
                                                    "' in qualified parameter");
                    param = key.substr(dot + 1);
                }
                SolverParams scratch;
                if (!apply_param(scratch, param, value))
                    throw std::invalid_argument("unknown key '" + key + "'");
                plan.overrides.emplace_back(key, value);
            }
        } catch (const std::invalid_argument& e) {
            fail_line(line, e.what());
        }
    }
    if (plan.images.empty())
        throw std::invalid_argument("plan declares no image");
    return plan;
}

ExperimentPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    return parse_plan(in);
}

bool is_phantom_spec(const std::string& s) { return s.rfind("phantom:", 0) == 0; }

ImageGrid make_phantom(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.size() < 3 || parts[0] != "phantom")
        throw std::invalid_argument(spec + ": expected phantom:<shape>:<size>[:tile]");
    try {
        const int size = to_int(parts[2]);
        if (parts[1] == "circle" && parts.size() == 3) return make_circle(size);
        if (parts[1] == "ramp" && parts.size() == 3) return make_ramp(size);
        if (parts[1] == "checkerboard" && parts.size() <= 4) {
            const int tile = parts.size() == 4 ? to_int(parts[3]) : size / 8;
            return make_checkerboard(size, tile);
        }
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(spec + ": " + e.what());
    }
    throw std::invalid_argument(spec + ": unknown phantom shape '" + parts[1] + "'");
}

ImageGrid load_plan_image(const std::string& s) {
    return is_phantom_spec(s) ? make_phantom(s) : read_image(s);
}

}  // namespace ttv
