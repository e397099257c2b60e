#ifndef TTV_PLAN_HPP
#define TTV_PLAN_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ttv/solvers.hpp"

namespace ttv {

/// Batch description: the cross product images x looks x seeds x filters is
/// run with per-filter parameters resolved from defaults, then global
/// overrides, then filter-qualified overrides (later lines win).
struct ExperimentPlan {
    std::vector<std::string> images;  // paths or phantom:<shape>:<size>[:tile]
    std::vector<int> looks = {1};
    std::vector<std::uint64_t> seeds = {0};
    std::vector<Filter> filters = {Filter::proposed};
    std::string out_dir = ".";
    std::vector<std::pair<std::string, std::string>> overrides;  // key, value
};

/// Set one named solver parameter from its textual value. Names follow the
/// command-line flags: tau, gamma, lambda, eps-tv, eps-stop, delta, k-edge,
/// xi, max-iter, mode, theta, flux, hesitation, lambda-decay. Returns false
/// for an unknown name, throws std::invalid_argument for a bad value.
bool apply_param(SolverParams& p, const std::string& name, const std::string& value);

/// Filter defaults with the plan's overrides folded in.
SolverParams resolve_params(const ExperimentPlan& plan, Filter f);

/// Line-oriented "key = value" format; '#' starts a comment, blank lines are
/// skipped. Keys: image (repeatable), looks, seeds, filters (comma lists),
/// out_dir, or any parameter name, optionally qualified as <filter>.<param>.
/// Errors carry the 1-based line number.
ExperimentPlan parse_plan(std::istream& in);
ExperimentPlan load_plan(const std::string& path);

/// True if the string names a synthetic image (phantom:circle:128,
/// phantom:checkerboard:128:16, phantom:ramp:64).
bool is_phantom_spec(const std::string& s);

/// Build the named phantom; throws std::invalid_argument on a bad spec.
ImageGrid make_phantom(const std::string& spec);

/// Phantom from its spec, anything else read from disk by extension.
ImageGrid load_plan_image(const std::string& s);

}  // namespace ttv

#endif
