#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fockmet/channels.hpp"
#include "fockmet/common.hpp"
#include "fockmet/rng.hpp"

namespace fockmet {

// Photon-number counts from M probes, per trial.
struct TrialEnsemble {
    std::vector<std::vector<int>> counts;
    int copies = 0;
    int trials = 0;
    uint64_t seed = 0;
};

struct ErrorStats {
    double mse = 0.0;
    // Twice the standard deviation of the per-trial squared errors divided by
    // sqrt(trials) (the plotted error-bar convention).
    double stderr_bar = 0.0;
    double bias = 0.0;
    int trials = 0;
};

struct MleResult {
    double estimate = 0.0;
    bool at_boundary = false;
};

struct JointMleResult {
    double n_c = 0.0;
    double n_s = 0.0;
    bool at_boundary = false;
    int sweeps = 0;
};

// Parameter search interval for the likelihood maximization. Default for a
// true value t: [t/10, 10 t] clipped to [1e-4, 10].
struct Prior {
    double lo;
    double hi;

    Prior(double lo_, double hi_);
    static Prior default_for(double true_value);
};

// Multinomial counts of m draws from dist (renormalized; requires
// truncation loss < 1e-8).
std::vector<int> sample_counts(Rng& rng, const PhotonDistribution& dist, int m);

// Log-likelihood of counts under the family at theta. Zero-probability
// outcomes with nonzero counts yield -inf.
double log_likelihood(const std::vector<int>& counts,
                      const std::function<double(int, double)>& prob_at, double theta);

// Single-parameter maximum likelihood: 64-point log-spaced coarse grid over
// the prior picks a bracket, then golden-section to |hi - lo| < 1e-6 * prior
// hi. Flags estimates within tolerance of a prior edge.
MleResult mle_single(const std::vector<int>& counts,
                     const std::function<double(int, double)>& prob_at, const Prior& prior);

// Closed-form weak-limit estimators from counts around m: counts outside
// {m-2..m+2} are ignored.
double mle_weak_displacement(const std::vector<int>& counts, int m, int copies);
double mle_weak_squeezing(const std::vector<int>& counts, int m, int copies);

// Joint (n_c, n_s) maximum likelihood by alternating golden-section over each
// coordinate (bracketed by its prior), initialized from the weak-form
// estimators clipped into the priors; stops when a sweep moves both
// coordinates by < 1e-6 * prior hi, errors after 100 sweeps.
JointMleResult mle_joint(const std::vector<int>& counts,
                         const std::function<double(int, double, double)>& prob_at,
                         const Prior& prior_c, const Prior& prior_s);

enum class EstimatorKind { mle, weak };

// One Monte-Carlo scenario: probe |m>, channel params (loss before channel),
// M copies per trial.
struct SimScenario {
    int m = 0;
    ChannelParams params{0.0, 0.0};
    int copies = 0;
    int trials = 0;
    uint64_t seed = 0;
    EstimatorKind estimator = EstimatorKind::mle;
    std::optional<Prior> prior_c;  // defaults derived from the true strengths
    std::optional<Prior> prior_s;
};

// Repeated estimation of the single nonzero strength (or both, when both are
// nonzero) against the truth. Per-trial RNG streams are derived from
// (seed, trial index), so results are bit-exact for any thread count.
ErrorStats monte_carlo_error(const SimScenario& scenario);

// Joint-estimation variant reporting (stats_nc, stats_ns).
std::pair<ErrorStats, ErrorStats> monte_carlo_error_joint(const SimScenario& scenario);

// Monte-Carlo error when the true strength of the whole trial fluctuates:
// each trial draws one strength from a normal(mean, sigma) clipped at 0,
// all M probes share it, and the estimate is scored against the mean.
// Returns mse minus the no-fluctuation bound 1/(M F(mean)) and the error bar.
struct FluctuationResult {
    double excess = 0.0;
    double stderr_bar = 0.0;
    double mse = 0.0;
};
FluctuationResult fluctuation_study(double mean, double sigma, const SimScenario& scenario);

// Deterministic ensemble generation (exposed for reproducibility tests).
TrialEnsemble generate_trials(const SimScenario& scenario, const PhotonDistribution& truth);

}  // namespace fockmet
