#include "fockmet/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include "fockmet/fisher.hpp"

namespace fockmet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

constexpr int kCoarseGrid = 64;
// Only maxima within this log-likelihood margin of the best one seen can
// plausibly be the global one; everything further down is ignored.
constexpr double kRefineMargin = 12.0;

std::vector<double> log_grid(double lo, double hi, int k) {
    std::vector<double> grid(static_cast<size_t>(k));
    double log_lo = std::log(lo), log_hi = std::log(hi);
    for (int i = 0; i < k; ++i)
        grid[static_cast<size_t>(i)] = std::exp(log_lo + (log_hi - log_lo) * i / (k - 1));
    return grid;
}

// Golden-section maximum of objective on [a, b] (assumed unimodal there).
double golden_max(const std::function<double(double)>& objective, double a, double b,
                  double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    while (b - a > tol) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        }
    }
    return 0.5 * (a + b);
}

// Refine a scanned objective around every local maximum that is close enough
// to the best scanned value to matter. The likelihoods handled here can carry
// near-tied peaks narrower than one coarse step, so each candidate gets a
// fine rescan over its neighbourhood before golden-section; a single descent
// from the best coarse point would regularly land on the wrong peak. Ties
// break toward the smaller argument.
double refine_from_scan(const std::function<double(double)>& objective,
                        const std::vector<double>& grid, const std::vector<double>& vals,
                        double tol, const char* who) {
    int n = static_cast<int>(grid.size());
    double best_val = kNegInf;
    for (double v : vals) best_val = std::max(best_val, v);
    if (best_val == kNegInf)
        throw ValidationError(std::string(who) +
                              ": no parameter in the prior explains the counts");
    double best_arg = 0.0;
    double best_ref = kNegInf;
    auto offer = [&](double arg, double val) {
        if (val > best_ref) {
            best_ref = val;
            best_arg = arg;
        }
    };
    auto at = [&](int i) { return i >= 0 && i < n ? vals[static_cast<size_t>(i)] : kNegInf; };
    // a peak hiding between scan points depresses its neighbours' values, so
    // rescanning two brackets to each side of every surviving maximum covers
    // peaks the scan itself never sampled
    std::vector<char> in_range(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        if (at(i) < best_val - kRefineMargin) continue;
        if (at(i) < at(i - 1) || at(i) < at(i + 1)) continue;
        for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j)
            in_range[static_cast<size_t>(j)] = 1;
    }
    constexpr int kSubdiv = 16;
    for (int i = 0; i + 1 < n; ++i) {
        if (!in_range[static_cast<size_t>(i)] || !in_range[static_cast<size_t>(i + 1)])
            continue;
        int start = i;
        while (i + 1 < n && in_range[static_cast<size_t>(i + 1)]) ++i;
        int fine_n = (i - start) * kSubdiv + 1;
        std::vector<double> fg =
            log_grid(grid[static_cast<size_t>(start)], grid[static_cast<size_t>(i)], fine_n);
        std::vector<double> fv(static_cast<size_t>(fine_n));
        double fine_best = kNegInf;
        for (int j = 0; j < fine_n; ++j) {
            fv[static_cast<size_t>(j)] = objective(fg[static_cast<size_t>(j)]);
            fine_best = std::max(fine_best, fv[static_cast<size_t>(j)]);
        }
        auto fat = [&](int j) {
            return j >= 0 && j < fine_n ? fv[static_cast<size_t>(j)] : kNegInf;
        };
        for (int j = 0; j < fine_n; ++j) {
            if (fat(j) < fine_best - kRefineMargin) continue;
            if (fat(j) < fat(j - 1) || fat(j) < fat(j + 1)) continue;
            double fa = fg[static_cast<size_t>(std::max(0, j - 1))];
            double fb = fg[static_cast<size_t>(std::min(fine_n - 1, j + 1))];
            double arg = golden_max(objective, fa, fb, tol);
            offer(arg, objective(arg));
        }
    }
    return best_arg;
}

// Coarse log-spaced scan followed by refinement around the surviving local
// maxima. Ties on the grid break toward the smaller argument.
double maximize_on(const std::function<double(double)>& objective, double lo, double hi,
                   double tol, const char* who) {
    std::vector<double> grid = log_grid(lo, hi, kCoarseGrid);
    std::vector<double> vals(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) vals[i] = objective(grid[i]);
    return refine_from_scan(objective, grid, vals, tol, who);
}

// Model family tabulated on a dense strength lattice, stored as log
// probabilities. Dense enough that no likelihood peak of any run we host can
// fall between adjacent points, which turns the per-trial maximization into
// table arithmetic.
constexpr int kLattice = 4096;
constexpr double kLogZero = -1e300;

struct LatticeModel {
    std::vector<double> grid;
    std::vector<std::vector<double>> logp;  // per grid point, over outcomes
};

LatticeModel tabulate_model(const std::function<PhotonDistribution(double)>& dist_at,
                            double lo, double hi) {
    LatticeModel out;
    out.grid = log_grid(lo, hi, kLattice);
    out.logp.resize(out.grid.size());
    for (size_t i = 0; i < out.grid.size(); ++i) {
        PhotonDistribution d = dist_at(out.grid[i]);
        const std::vector<double>& p = d.probs();
        out.logp[i].resize(p.size());
        for (size_t k = 0; k < p.size(); ++k)
            out.logp[i][k] = p[k] > 0.0 ? std::log(p[k]) : kLogZero;
    }
    return out;
}

// Exact maximum-likelihood estimate from the lattice: scan, then place the
// peak by parabolic interpolation through the winning point and its
// neighbours (the lattice step is far below every peak width, so the
// quadratic fit is exact to well past the estimator's noise floor). Ties
// break toward the smaller strength.
double mle_on_lattice(const std::vector<int>& counts, const LatticeModel& model,
                      const char* who) {
    int n = static_cast<int>(model.grid.size());
    std::vector<double> vals(static_cast<size_t>(n), 0.0);
    for (size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) continue;
        for (int i = 0; i < n; ++i) {
            const std::vector<double>& lp = model.logp[static_cast<size_t>(i)];
            double l = k < lp.size() ? lp[k] : kLogZero;
            vals[static_cast<size_t>(i)] += counts[k] * l;
        }
    }
    auto at = [&](int i) { return i >= 0 && i < n ? vals[static_cast<size_t>(i)] : kNegInf; };
    double best_arg = 0.0, best_val = kNegInf;
    for (int i = 0; i < n; ++i) {
        if (at(i) <= kLogZero / 2 || at(i) < at(i - 1) || at(i) < at(i + 1)) continue;
        double arg = model.grid[static_cast<size_t>(i)];
        double val = at(i);
        if (i > 0 && i + 1 < n && at(i - 1) > kLogZero / 2 && at(i + 1) > kLogZero / 2) {
            double denom = at(i - 1) - 2.0 * at(i) + at(i + 1);
            if (denom < 0.0) {
                double shift = std::clamp(0.5 * (at(i - 1) - at(i + 1)) / denom, -0.5, 0.5);
                double step = std::log(model.grid[1]) - std::log(model.grid[0]);
                arg = arg * std::exp(shift * step);
                val -= 0.25 * (at(i - 1) - at(i + 1)) * shift;
            }
        }
        if (val > best_val) {
            best_val = val;
            best_arg = arg;
        }
    }
    if (best_val == kNegInf)
        throw ValidationError(std::string(who) +
                              ": no parameter in the prior explains the counts");
    return best_arg;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

ErrorStats stats_from(const std::vector<double>& estimates, double truth) {
    std::vector<double> sq(estimates.size());
    for (size_t i = 0; i < estimates.size(); ++i) {
        double d = estimates[i] - truth;
        sq[i] = d * d;
    }
    ErrorStats out;
    out.trials = static_cast<int>(estimates.size());
    out.mse = mean_of(sq);
    out.bias = mean_of(estimates) - truth;
    out.stderr_bar = 2.0 * sample_std(sq, out.mse) / std::sqrt(static_cast<double>(out.trials));
    return out;
}

// Channel kind implied by which strength is nonzero.
enum class ActiveParam { displacement, squeezing };

ActiveParam single_active(const ChannelParams& p, const char* who) {
    bool c = p.n_c > 0.0, s = p.n_s > 0.0;
    if (c == s)
        throw ValidationError(std::string(who) +
                              ": exactly one of n_c, n_s must be nonzero here");
    return c ? ActiveParam::displacement : ActiveParam::squeezing;
}

}  // namespace

Prior::Prior(double lo_, double hi_) : lo(lo_), hi(hi_) {
    require(lo > 0.0 && lo < hi, "Prior: need 0 < lo < hi");
}

Prior Prior::default_for(double true_value) {
    require(true_value > 0.0, "Prior: true value must be positive");
    double lo = std::max(true_value / 10.0, 1e-4);
    double hi = std::min(true_value * 10.0, 10.0);
    require(lo < hi, "Prior: no default interval for this value");
    return Prior(lo, hi);
}

std::vector<int> sample_counts(Rng& rng, const PhotonDistribution& dist, int m) {
    require(m >= 1, "sample_counts: need at least one draw");
    if (dist.truncation_loss() >= 1e-8)
        throw ValidationError("sample_counts: distribution loses " +
                              std::to_string(dist.truncation_loss()) +
                              " mass; tighten the cutoff");
    std::vector<double> cdf(dist.probs().size());
    double run = 0.0;
    for (size_t i = 0; i < cdf.size(); ++i) {
        run += dist.probs()[i];
        cdf[i] = run;
    }
    return multinomial_draw(rng, cdf, m);
}

double log_likelihood(const std::vector<int>& counts,
                      const std::function<double(int, double)>& prob_at, double theta) {
    double ll = 0.0;
    for (size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) continue;
        double p = prob_at(static_cast<int>(k), theta);
        if (p <= 0.0) return kNegInf;
        ll += counts[k] * std::log(p);
    }
    return ll;
}

MleResult mle_single(const std::vector<int>& counts,
                     const std::function<double(int, double)>& prob_at, const Prior& prior) {
    double tol = 1e-6 * prior.hi;
    auto objective = [&](double theta) { return log_likelihood(counts, prob_at, theta); };
    double est = maximize_on(objective, prior.lo, prior.hi, tol, "mle_single");
    MleResult out;
    out.estimate = est;
    out.at_boundary = est - prior.lo <= 2.0 * tol || prior.hi - est <= 2.0 * tol;
    return out;
}

double mle_weak_displacement(const std::vector<int>& counts, int m, int copies) {
    require(m >= 0, "mle_weak_displacement: m must be >= 0");
    require(copies >= 1, "mle_weak_displacement: copies must be >= 1");
    auto at = [&](int k) {
        return k >= 0 && k < static_cast<int>(counts.size()) ? counts[static_cast<size_t>(k)]
                                                            : 0;
    };
    return static_cast<double>(at(m - 1) + at(m + 1)) /
           (static_cast<double>(copies) * (2.0 * m + 1.0));
}

double mle_weak_squeezing(const std::vector<int>& counts, int m, int copies) {
    require(m >= 0, "mle_weak_squeezing: m must be >= 0");
    require(copies >= 1, "mle_weak_squeezing: copies must be >= 1");
    auto at = [&](int k) {
        return k >= 0 && k < static_cast<int>(counts.size()) ? counts[static_cast<size_t>(k)]
                                                            : 0;
    };
    return 2.0 * static_cast<double>(at(m - 2) + at(m + 2)) /
           (static_cast<double>(copies) * (static_cast<double>(m) * m + m + 1.0));
}

JointMleResult mle_joint(const std::vector<int>& counts,
                         const std::function<double(int, double, double)>& prob_at,
                         const Prior& prior_c, const Prior& prior_s) {
    int copies = 0;
    int mode = 0;
    for (size_t k = 0; k < counts.size(); ++k) {
        require(counts[k] >= 0, "mle_joint: negative count");
        copies += counts[k];
        if (counts[k] > counts[static_cast<size_t>(mode)]) mode = static_cast<int>(k);
    }
    require(copies >= 1, "mle_joint: empty counts");
    // initialize from the closed-form weak estimators around the modal
    // outcome (the probe level in any regime where they are meaningful)
    auto clip = [](double x, const Prior& p) { return std::clamp(x, p.lo, p.hi); };
    double c = clip(mle_weak_displacement(counts, mode, copies), prior_c);
    double s = clip(mle_weak_squeezing(counts, mode, copies), prior_s);
    double tol_c = 1e-6 * prior_c.hi, tol_s = 1e-6 * prior_s.hi;
    JointMleResult out;
    for (int sweep = 1; sweep <= 100; ++sweep) {
        double c_new = maximize_on(
            [&](double x) {
                return log_likelihood(
                    counts, [&](int k, double xc) { return prob_at(k, xc, s); }, x);
            },
            prior_c.lo, prior_c.hi, tol_c, "mle_joint");
        double s_new = maximize_on(
            [&](double x) {
                return log_likelihood(
                    counts, [&](int k, double xs) { return prob_at(k, c_new, xs); }, x);
            },
            prior_s.lo, prior_s.hi, tol_s, "mle_joint");
        double dc = std::abs(c_new - c), ds = std::abs(s_new - s);
        c = c_new;
        s = s_new;
        out.sweeps = sweep;
        if (dc < tol_c && ds < tol_s) {
            out.n_c = c;
            out.n_s = s;
            out.at_boundary = c - prior_c.lo <= 2.0 * tol_c || prior_c.hi - c <= 2.0 * tol_c ||
                              s - prior_s.lo <= 2.0 * tol_s || prior_s.hi - s <= 2.0 * tol_s;
            return out;
        }
    }
    throw ConvergenceError("mle_joint: no convergence within 100 sweeps");
}

TrialEnsemble generate_trials(const SimScenario& scenario, const PhotonDistribution& truth) {
    require(scenario.trials >= 1, "generate_trials: trials must be >= 1");
    require(scenario.copies >= 1, "generate_trials: copies must be >= 1");
    TrialEnsemble out;
    out.copies = scenario.copies;
    out.trials = scenario.trials;
    out.seed = scenario.seed;
    out.counts.resize(static_cast<size_t>(scenario.trials));
    parallel_for(scenario.trials, [&](int t) {
        Rng rng = Rng::for_trial(scenario.seed, static_cast<uint64_t>(t));
        out.counts[static_cast<size_t>(t)] = sample_counts(rng, truth, scenario.copies);
    });
    return out;
}

ErrorStats monte_carlo_error(const SimScenario& scenario) {
    require(scenario.trials >= 2, "monte_carlo_error: trials must be >= 2");
    require(scenario.copies >= 1, "monte_carlo_error: copies must be >= 1");
    require(scenario.m >= 0, "monte_carlo_error: m must be >= 0");
    ActiveParam which = single_active(scenario.params, "monte_carlo_error");
    double truth_value =
        which == ActiveParam::displacement ? scenario.params.n_c : scenario.params.n_s;
    Prior prior = which == ActiveParam::displacement
                      ? scenario.prior_c.value_or(Prior::default_for(truth_value))
                      : scenario.prior_s.value_or(Prior::default_for(truth_value));

    FockCutoff cut = adaptive_cutoff(FockProbe{scenario.m}, scenario.params);
    PhotonDistribution truth =
        channel_output_distribution(FockProbe{scenario.m}, scenario.params, cut);
    // the model family must stay accurate up to the top of the prior
    ChannelParams top = which == ActiveParam::displacement
                            ? ChannelParams(prior.hi, 0.0, scenario.params.eta)
                            : ChannelParams(0.0, prior.hi, scenario.params.eta);
    FockCutoff model_cut = adaptive_cutoff(FockProbe{scenario.m}, top);

    // the model family is the same for every trial, so tabulate it once
    LatticeModel model;
    if (scenario.estimator != EstimatorKind::weak)
        model = tabulate_model(
            [&](double th) {
                ChannelParams p = which == ActiveParam::displacement
                                      ? ChannelParams(th, 0.0, scenario.params.eta)
                                      : ChannelParams(0.0, th, scenario.params.eta);
                return channel_output_distribution(FockProbe{scenario.m}, p, model_cut);
            },
            prior.lo, prior.hi);

    std::vector<double> estimates(static_cast<size_t>(scenario.trials));
    parallel_for(scenario.trials, [&](int t) {
        Rng rng = Rng::for_trial(scenario.seed, static_cast<uint64_t>(t));
        std::vector<int> counts = sample_counts(rng, truth, scenario.copies);
        double est;
        if (scenario.estimator == EstimatorKind::weak) {
            est = which == ActiveParam::displacement
                      ? mle_weak_displacement(counts, scenario.m, scenario.copies)
                      : mle_weak_squeezing(counts, scenario.m, scenario.copies);
        } else {
            est = mle_on_lattice(counts, model, "monte_carlo_error");
        }
        estimates[static_cast<size_t>(t)] = est;
    });
    return stats_from(estimates, truth_value);
}

std::pair<ErrorStats, ErrorStats> monte_carlo_error_joint(const SimScenario& scenario) {
    require(scenario.trials >= 2, "monte_carlo_error_joint: trials must be >= 2");
    require(scenario.copies >= 1, "monte_carlo_error_joint: copies must be >= 1");
    require(scenario.params.n_c > 0.0 && scenario.params.n_s > 0.0,
            "monte_carlo_error_joint: both strengths must be nonzero");
    Prior prior_c = scenario.prior_c.value_or(Prior::default_for(scenario.params.n_c));
    Prior prior_s = scenario.prior_s.value_or(Prior::default_for(scenario.params.n_s));

    FockCutoff cut = adaptive_cutoff(FockProbe{scenario.m}, scenario.params);
    PhotonDistribution truth =
        channel_output_distribution(FockProbe{scenario.m}, scenario.params, cut);
    FockCutoff model_cut = adaptive_cutoff(
        FockProbe{scenario.m}, ChannelParams(prior_c.hi, prior_s.hi, scenario.params.eta));

    std::vector<double> est_c(static_cast<size_t>(scenario.trials));
    std::vector<double> est_s(static_cast<size_t>(scenario.trials));
    parallel_for(scenario.trials, [&](int t) {
        Rng rng = Rng::for_trial(scenario.seed, static_cast<uint64_t>(t));
        std::vector<int> counts = sample_counts(rng, truth, scenario.copies);
        auto last_c = std::make_shared<double>(-1.0);
        auto last_s = std::make_shared<double>(-1.0);
        auto last = std::make_shared<std::vector<double>>();
        auto model = [&](int k, double c, double s) {
            if (c != *last_c || s != *last_s) {
                *last = channel_output_distribution(
                            FockProbe{scenario.m},
                            ChannelParams(c, s, scenario.params.eta), model_cut)
                            .probs();
                *last_c = c;
                *last_s = s;
            }
            if (k < 0 || k >= static_cast<int>(last->size())) return 0.0;
            return (*last)[static_cast<size_t>(k)];
        };
        auto joint = mle_joint(counts, model, prior_c, prior_s);
        est_c[static_cast<size_t>(t)] = joint.n_c;
        est_s[static_cast<size_t>(t)] = joint.n_s;
    });
    return {stats_from(est_c, scenario.params.n_c), stats_from(est_s, scenario.params.n_s)};
}

FluctuationResult fluctuation_study(double mean, double sigma, const SimScenario& scenario) {
    require(mean > 0.0, "fluctuation_study: mean must be positive");
    require(sigma >= 0.0, "fluctuation_study: sigma must be >= 0");
    require(scenario.trials >= 2, "fluctuation_study: trials must be >= 2");
    ActiveParam which = single_active(scenario.params, "fluctuation_study");
    double fisher_at_mean = which == ActiveParam::displacement
                                ? fi_displacement_exact(scenario.m, mean)
                                : fi_squeezing_exact(scenario.m, mean);
    double cr_value = 1.0 / (fisher_at_mean * static_cast<double>(scenario.copies));
    Prior prior = which == ActiveParam::displacement
                      ? scenario.prior_c.value_or(Prior::default_for(mean))
                      : scenario.prior_s.value_or(Prior::default_for(mean));

    auto params_at = [&](double theta) {
        return which == ActiveParam::displacement
                   ? ChannelParams(theta, 0.0, scenario.params.eta)
                   : ChannelParams(0.0, theta, scenario.params.eta);
    };
    // one cutoff covering the whole draw range (8 sigma leaves ~1e-15 of
    // trials beyond it) and the prior top for the model family
    double reach = std::max(mean + 8.0 * sigma, prior.hi);
    FockCutoff cut = adaptive_cutoff(FockProbe{scenario.m}, params_at(reach));

    LatticeModel model;
    if (scenario.estimator != EstimatorKind::weak)
        model = tabulate_model(
            [&](double th) {
                return channel_output_distribution(FockProbe{scenario.m}, params_at(th),
                                                   cut);
            },
            prior.lo, prior.hi);

    std::vector<double> estimates(static_cast<size_t>(scenario.trials));
    parallel_for(scenario.trials, [&](int t) {
        Rng rng = Rng::for_trial(scenario.seed, static_cast<uint64_t>(t));
        // the whole trial shares one drawn strength: slow drifts between
        // trials, not shot-to-shot noise, so the estimate tracks the drawn
        // value and the score against the mean picks up its variance
        double drawn = std::max(0.0, mean + sigma * rng.next_normal());
        PhotonDistribution truth =
            channel_output_distribution(FockProbe{scenario.m}, params_at(drawn), cut);
        std::vector<int> counts = sample_counts(rng, truth, scenario.copies);
        double est;
        if (scenario.estimator == EstimatorKind::weak) {
            est = which == ActiveParam::displacement
                      ? mle_weak_displacement(counts, scenario.m, scenario.copies)
                      : mle_weak_squeezing(counts, scenario.m, scenario.copies);
        } else {
            est = mle_on_lattice(counts, model, "fluctuation_study");
        }
        estimates[static_cast<size_t>(t)] = est;
    });
    ErrorStats stats = stats_from(estimates, mean);
    FluctuationResult out;
    out.mse = stats.mse;
    out.excess = stats.mse - cr_value;
    out.stderr_bar = stats.stderr_bar;
    return out;
}

}  // namespace fockmet
