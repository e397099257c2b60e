#ifndef TTV_SOLVERS_HPP
#define TTV_SOLVERS_HPP

#include <string>
#include <vector>

#include "ttv/fuzzy.hpp"
#include "ttv/image.hpp"

namespace ttv {

enum class SolverMode { direct, regularized };
enum class ThetaSchedule { per_step, frozen };
enum class FluxForm { conservative, literal };
enum class Filter { proposed, tdm, dong };

/// All solver knobs. The run_* drivers rescale the input to [0,1] before
/// stepping and back on exit, so every length here is expressed on that unit
/// intensity scale (tau and gamma are scale-free).
struct SolverParams {
    double tau = 0.1;          // time step
    double gamma = 1.0;        // damping
    double lambda_fid = 1.0;   // fidelity weight
    double eps_tv = 0.02;      // TV gradient-norm guard
    double eps_stop = 1e-4;    // relative-change stopping threshold
    int max_iter = 2000;
    SolverMode mode = SolverMode::direct;
    double xi = 1.0;           // Gaussian width (regularized mode, Dong)
    double k_edge = 0.1;       // diffusivity / gray-indicator constant
    ThetaSchedule theta_schedule = ThetaSchedule::per_step;
    FluxForm flux_form = FluxForm::conservative;
    double delta_floor = 0.05;      // lower clamp for the edge indicator
    double hesitation_lambda = 0.0; // Sugeno adjustment, 0 = off
    bool lambda_decay = false;      // linearly fade lambda to 0 over max_iter

    void validate() const;
};

/// Defaults tuned per filter; the shared fields above are the proposed
/// filter's values.
SolverParams default_params(Filter f);

const char* filter_name(Filter f);
bool parse_filter(const std::string& s, Filter& out);

/// Two-level time stepping state: curr = I^n, prev = I^(n-1).
struct SolverState {
    ImageGrid curr;
    ImageGrid prev;
    int iteration = 0;
    double last_rel_change = 0.0;
};

struct RunLog {
    struct Record {
        int iteration;
        double rel_change;
    };
    enum class StopReason { threshold, max_iter };

    std::vector<Record> records;
    StopReason stop_reason = StopReason::max_iter;
};

struct DespeckleResult {
    ImageGrid image;
    RunLog log;
};

/// div(theta * grad I / sqrt(|grad I|^2 + eps^2)). The conservative form
/// differences face fluxes (averaged theta, one-sided normal gradient) so the
/// field sums to zero over the grid under the replicating boundary; the
/// literal form nests central differences instead.
ImageGrid tv_divergence(const ImageGrid& img, const EdgeIndicatorField& theta,
                        double eps_tv, FluxForm form = FluxForm::conservative);

/// Edge-controlled diffusivity 1 / (1 + (s/k)^2).
inline double pm_diffusivity(double s, double k) {
    const double r = s / k;
    return 1.0 / (1.0 + r * r);
}

/// One explicit telegraph update of the direct-mode flux:
///   (1+gamma*tau) I^(n+1) = (2+gamma*tau) I^n - I^(n-1)
///                           + tau^2 div - tau^2 lambda (1 - I0/I^n),
/// with iterates floored at a small positive eta whenever lambda > 0.
/// Throws blowup_error on the first nonfinite result.
void telegraph_step(SolverState& state, const EdgeIndicatorField& theta,
                    const ImageGrid& noisy, const SolverParams& p);

/// Gray level indicator of the smoothed image:
///   alpha = (1 - 1/(1 + k (G_xi*I0)^2)) * (1 + k M^2)/(k M^2),
/// M = max of the smoothed image. Equals 1 on constant images and at the
/// pixel attaining M.
ImageGrid gray_level_indicator(const ImageGrid& noisy, double k, double xi);

/// Regularized-mode conductance theta(G_xi*I) / (1 + |grad G_xi*I|) exactly
/// as a per-step proposed run computes it; pinned between
/// delta_floor / (1 + max|grad G_xi*I|) and 1.
std::vector<double> regularized_coefficient(const ImageGrid& img, const SolverParams& p,
                                            const std::vector<FuzzyTemplate>& templates = default_templates());

/// Fuzzy-edge-driven telegraph TV evolution with the relative-change
/// stopping rule. In regularized mode the flux is
/// theta(G_xi*I) / (1 + |grad G_xi*I|) * grad I.
DespeckleResult run_proposed(const ImageGrid& noisy, const SolverParams& p,
                             const std::vector<FuzzyTemplate>& templates = default_templates());

/// Telegraph-diffusion baseline: flux c1(|grad I|) grad I, no fidelity term.
DespeckleResult run_tdm(const ImageGrid& noisy, const SolverParams& p);

/// Convex-model baseline: first-order descent of
///   I_t = div(alpha grad I / |grad I|_eps) - lambda (1 - I0/I),
/// alpha frozen from the noisy input.
DespeckleResult run_dong(const ImageGrid& noisy, const SolverParams& p);

/// Dispatch on filter kind (templates only used by the proposed filter).
DespeckleResult run_filter(Filter f, const ImageGrid& noisy, const SolverParams& p,
                           const std::vector<FuzzyTemplate>& templates = default_templates());

}  // namespace ttv

#endif
