#include <cmath>
#include <functional>

#include "doctest.h"
#include "fockmet/channels.hpp"
#include "fockmet/fisher.hpp"
#include "fockmet/mle.hpp"
#include "fockmet/rng.hpp"

using namespace fockmet;

namespace {

std::function<double(int, double)> displacement_family(int m, FockCutoff cut) {
    return [m, cut](int k, double theta) {
        if (k < 0 || k >= cut.dim) return 0.0;
        return displacement_distribution(m, theta, cut)[k];
    };
}

std::vector<int> proportional_counts(const PhotonDistribution& p, int copies) {
    std::vector<int> counts(static_cast<size_t>(p.dim()), 0);
    for (int n = 0; n < p.dim(); ++n)
        counts[static_cast<size_t>(n)] = static_cast<int>(std::lround(copies * p[n]));
    return counts;
}

}  // namespace

TEST_CASE("prior intervals") {
    auto p = Prior::default_for(1.0);
    CHECK(p.lo == doctest::Approx(0.1));
    CHECK(p.hi == doctest::Approx(10.0));
    auto q = Prior::default_for(0.01);
    CHECK(q.lo == doctest::Approx(0.001));
    CHECK(q.hi == doctest::Approx(0.1));
    auto r = Prior::default_for(1e-4);
    CHECK(r.lo == doctest::Approx(1e-4));
    CHECK(r.hi == doctest::Approx(1e-3));
    CHECK_THROWS_AS(Prior::default_for(0.0), ValidationError);
    CHECK_THROWS_AS(Prior(0.1, 0.05), ValidationError);
    CHECK_THROWS_AS(Prior(0.0, 1.0), ValidationError);
}

TEST_CASE("outcome sampling") {
    std::vector<double> delta(6, 0.0);
    delta[4] = 1.0;
    PhotonDistribution d(delta, 0.0);
    Rng rng(7);
    auto counts = sample_counts(rng, d, 100);
    CHECK(counts[4] == 100);

    auto p = displacement_distribution(0, 1.0, FockCutoff(30));
    Rng a(99), b(99);
    auto ca = sample_counts(a, p, 1000);
    auto cb = sample_counts(b, p, 1000);
    CHECK(ca == cb);
    int total = 0;
    for (int c : ca) total += c;
    CHECK(total == 1000);

    // large-sample frequencies sit inside 4-sigma binomial bands
    Rng big(123);
    const int m_draws = 1000000;
    auto cbig = sample_counts(big, p, m_draws);
    for (int n = 0; n <= 5; ++n) {
        double freq = static_cast<double>(cbig[n]) / m_draws;
        double band = 4.0 * std::sqrt(p[n] * (1.0 - p[n]) / m_draws);
        CHECK(std::abs(freq - p[n]) < band);
    }

    std::vector<double> leaky{0.5, 0.4};
    PhotonDistribution bad(leaky, 0.1);
    Rng r2(1);
    CHECK_THROWS_AS(sample_counts(r2, bad, 10), ValidationError);
}

TEST_CASE("log likelihood") {
    auto certain = [](int k, double) { return k == 2 ? 1.0 : 0.0; };
    std::vector<int> at2{0, 0, 50};
    CHECK(log_likelihood(at2, certain, 1.0) == 0.0);

    auto half = [](int, double) { return 0.5; };
    std::vector<int> split{50, 50};
    CHECK(log_likelihood(split, half, 1.0) ==
          doctest::Approx(100.0 * std::log(0.5)).epsilon(1e-12));

    auto forbidden = [](int k, double) { return k % 2 == 0 ? 0.5 : 0.0; };
    std::vector<int> odd{0, 1};
    CHECK(std::isinf(log_likelihood(odd, forbidden, 1.0)));
    CHECK(log_likelihood(odd, forbidden, 1.0) < 0.0);
}

TEST_CASE("single-parameter likelihood maximization") {
    // the family is evaluated up to the prior top (theta = 10), which needs
    // far more headroom than the counts themselves
    FockCutoff cut(90);
    auto family = displacement_family(3, cut);

    auto truth = displacement_distribution(3, 1.0, FockCutoff(40));
    auto counts = proportional_counts(truth, 1000000);
    auto fit = mle_single(counts, family, Prior::default_for(1.0));
    CHECK(fit.estimate == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_FALSE(fit.at_boundary);

    std::vector<int> all_center(10, 0);
    all_center[3] = 500;
    auto low = mle_single(all_center, family, Prior(0.01, 5.0));
    CHECK(low.at_boundary);
    CHECK(low.estimate == doctest::Approx(0.01).epsilon(0.01));

    // small strengths: the full likelihood agrees with the closed-form
    // counting estimator
    auto weak_truth = displacement_distribution(3, 1e-3, FockCutoff(30));
    Rng rng(5);
    auto weak_counts = sample_counts(rng, weak_truth, 10000);
    double weak_est = mle_weak_displacement(weak_counts, 3, 10000);
    auto full = mle_single(weak_counts, displacement_family(3, FockCutoff(30)),
                           Prior::default_for(1e-3));
    CHECK(full.estimate == doctest::Approx(weak_est).epsilon(0.1));
}

TEST_CASE("maximization picks the taller of near-tied likelihood peaks") {
    // this count vector produces two local maxima 0.024 apart with a
    // log-likelihood gap of only 0.12; a single-bracket refinement that
    // chases the best coarse sample can land on the shorter peak
    const int m = 4;
    const double ns = 0.3;
    FockCutoff cut = adaptive_cutoff(FockProbe{m}, ChannelParams(0.0, ns));
    auto truth = channel_output_distribution(FockProbe{m}, ChannelParams(0.0, ns), cut);
    Rng rng = Rng::for_trial(1056, 123);
    auto counts = sample_counts(rng, truth, 500);

    Prior prior = Prior::default_for(ns);
    FockCutoff model_cut = adaptive_cutoff(FockProbe{m}, ChannelParams(0.0, prior.hi));
    auto family = [&](int k, double th) {
        if (k < 0 || k >= model_cut.dim) return 0.0;
        return squeezing_distribution(m, th, model_cut)[k];
    };
    auto fit = mle_single(counts, family, prior);
    CHECK(fit.estimate == doctest::Approx(0.30191).epsilon(5e-3));
    CHECK(log_likelihood(counts, family, fit.estimate) >
          log_likelihood(counts, family, 0.32635));
}

TEST_CASE("closed-form weak estimators") {
    std::vector<int> c(6, 0);
    c[1] = 20;
    c[3] = 30;
    c[2] = 950;
    CHECK(mle_weak_displacement(c, 2, 1000) == doctest::Approx(0.01).epsilon(1e-12));

    std::vector<int> s(8, 0);
    s[1] = 10;
    s[5] = 16;
    s[3] = 974;
    CHECK(mle_weak_squeezing(s, 3, 1000) == doctest::Approx(0.004).epsilon(1e-12));

    std::vector<int> center(5, 0);
    center[2] = 400;
    CHECK(mle_weak_displacement(center, 2, 400) == 0.0);
    CHECK(mle_weak_squeezing(center, 2, 400) == 0.0);

    // counts outside m-2..m+2 are ignored
    std::vector<int> far = s;
    far[0] = 99;  // m-3
    far[7] = 99;  // m+4
    CHECK(mle_weak_squeezing(far, 3, 1000) == doctest::Approx(0.004).epsilon(1e-12));
}

TEST_CASE("weak estimators are exactly unbiased under the weak model") {
    for (int m : {0, 1, 2, 3, 5}) {
        for (double n : {1e-4, 1e-3, 5e-3}) {
            auto w = weak_limit_distribution(m, n, n);
            // expectation of the counting estimators over the multinomial:
            // E[n_k] = M w_k, so the normalization M cancels
            double exp_c = (w.at(m - 1) + w.at(m + 1)) / (2.0 * m + 1.0);
            double exp_s = 2.0 * (w.at(m - 2) + w.at(m + 2)) /
                           (static_cast<double>(m) * m + m + 1.0);
            CHECK(std::abs(exp_c - n) < 1e-12);
            CHECK(std::abs(exp_s - n) < 1e-12);
        }
    }
}

TEST_CASE("joint likelihood maximization") {
    FockCutoff cut(30);
    auto model = [cut](int k, double c, double s) {
        if (k < 0 || k >= cut.dim) return 0.0;
        return combined_distribution(3, ChannelParams(c, s), cut)[k];
    };
    Prior pc(1e-3, 0.1), ps(1e-3, 0.1);
    // a squeezing floor epsilon biases the displacement coordinate by ~1.2
    // epsilon, so the reduction check needs a floor well under its tolerance
    Prior ps_deep(1e-6, 0.1);

    auto truth = combined_distribution(3, ChannelParams(0.01, 0.01), cut);
    auto counts = proportional_counts(truth, 1000000);
    auto fit = mle_joint(counts, model, pc, ps);
    CHECK(fit.n_c == doctest::Approx(0.01).epsilon(1e-2));
    CHECK(fit.n_s == doctest::Approx(0.01).epsilon(1e-2));
    CHECK(std::abs(fit.n_c - 0.01) < 1e-4);
    CHECK(std::abs(fit.n_s - 0.01) < 1e-4);
    CHECK(fit.sweeps <= 100);

    // displacement-only truth pushes the squeezing estimate to its floor
    auto disp_truth = displacement_distribution(3, 0.05, cut);
    auto disp_counts = proportional_counts(disp_truth, 1000000);
    auto red = mle_joint(disp_counts, model, Prior(5e-3, 0.5), ps_deep);
    CHECK(red.at_boundary);
    CHECK(red.n_s == doctest::Approx(ps_deep.lo).epsilon(0.01));
    auto single = mle_single(disp_counts, displacement_family(3, cut), Prior(5e-3, 0.5));
    CHECK(red.n_c == doctest::Approx(single.estimate).scale(1.0).epsilon(1e-4));

    std::vector<int> center(10, 0);
    center[3] = 1000;
    auto floor = mle_joint(center, model, pc, ps);
    CHECK(floor.at_boundary);
    CHECK(floor.n_c == doctest::Approx(pc.lo).epsilon(0.01));
    CHECK(floor.n_s == doctest::Approx(ps.lo).epsilon(0.01));
}

TEST_CASE("trial generation is deterministic") {
    SimScenario sc;
    sc.m = 2;
    sc.params = ChannelParams(0.5, 0.0);
    sc.copies = 200;
    sc.trials = 8;
    sc.seed = 77;
    auto truth = displacement_distribution(2, 0.5, FockCutoff(40));
    auto a = generate_trials(sc, truth);
    auto b = generate_trials(sc, truth);
    CHECK(a.counts == b.counts);
    CHECK(a.counts[0] != a.counts[1]);
    for (const auto& c : a.counts) {
        int total = 0;
        for (int x : c) total += x;
        CHECK(total == 200);
    }
}

TEST_CASE("monte carlo error saturates the variance bound") {
    SimScenario sc;
    sc.m = 3;
    sc.params = ChannelParams(1.0, 0.0);
    sc.copies = 500;
    sc.trials = 300;
    sc.seed = 11;
    auto st = monte_carlo_error(sc);
    double cr = 1.0 / (500.0 * 7.0);
    CHECK(std::abs(st.mse - cr) < 3.0 * 0.5 * st.stderr_bar);
    CHECK(st.trials == 300);

    auto st2 = monte_carlo_error(sc);
    CHECK(st2.mse == st.mse);  // bit-exact reproducibility
    CHECK(st2.stderr_bar == st.stderr_bar);

    SimScenario sq = sc;
    sq.params = ChannelParams(0.0, 0.1);
    sq.seed = 12;
    auto sts = monte_carlo_error(sq);
    CHECK(std::abs(sts.mse - 1.0 / (500.0 * 65.0)) < 3.0 * 0.5 * sts.stderr_bar);

    SimScenario weak = sc;
    weak.params = ChannelParams(1e-3, 0.0);
    weak.estimator = EstimatorKind::weak;
    weak.trials = 500;
    weak.seed = 13;
    auto stw = monte_carlo_error(weak);
    CHECK(std::abs(stw.mse - 1e-3 / 3500.0) < 3.0 * 0.5 * stw.stderr_bar);

    SimScenario bad = sc;
    bad.params = ChannelParams(0.5, 0.5);
    CHECK_THROWS_AS(monte_carlo_error(bad), ValidationError);
    bad.params = ChannelParams(0.0, 0.0);
    CHECK_THROWS_AS(monte_carlo_error(bad), ValidationError);
    bad = sc;
    bad.trials = 1;
    CHECK_THROWS_AS(monte_carlo_error(bad), ValidationError);
}

TEST_CASE("joint monte carlo error tracks the matrix bounds") {
    SimScenario sc;
    sc.m = 3;
    sc.params = ChannelParams(0.01, 0.01);
    sc.copies = 500;
    sc.trials = 150;
    sc.seed = 42;
    auto [snc, sns] = monte_carlo_error_joint(sc);
    auto h = fisher_matrix(3, 0.01, 0.01);
    auto [bc, bs] = multiparam_bounds(h, 500);
    CHECK(snc.mse / bc > 0.6);
    CHECK(snc.mse / bc < 1.7);
    CHECK(sns.mse / bs > 0.6);
    CHECK(sns.mse / bs < 1.7);

    SimScenario bad = sc;
    bad.params = ChannelParams(0.01, 0.0);
    CHECK_THROWS_AS(monte_carlo_error_joint(bad), ValidationError);
}

TEST_CASE("strength fluctuations add their variance to the error") {
    SimScenario sc;
    sc.m = 3;
    sc.params = ChannelParams(1.0, 0.0);
    sc.copies = 500;
    sc.trials = 300;
    sc.seed = 15;
    auto none = fluctuation_study(1.0, 0.0, sc);
    CHECK(std::abs(none.excess) < 3.0 * 0.5 * none.stderr_bar);

    auto small = fluctuation_study(1.0, std::sqrt(1e-3), sc);
    CHECK(small.excess / 1e-3 > 0.8);
    CHECK(small.excess / 1e-3 < 1.4);
    CHECK(small.mse > none.mse);

    CHECK_THROWS_AS(fluctuation_study(0.0, 0.1, sc), ValidationError);
    CHECK_THROWS_AS(fluctuation_study(1.0, -0.1, sc), ValidationError);
}
