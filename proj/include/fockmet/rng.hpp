#pragma once

#include <cstdint>
#include <vector>

namespace fockmet {

// Counter-style 64-bit generator (splitmix64 finalizer over an additive
// sequence). Chosen over std::mt19937 + std:: distributions because sampling
// must be bit-exact regardless of platform, standard library, or thread
// count; all variate transforms below are spelled out explicitly.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    // Independent stream for one Monte-Carlo trial: the trial index is folded
    // into the master seed through the same finalizer, so streams do not
    // overlap and any trial can be regenerated in isolation.
    static Rng for_trial(uint64_t master_seed, uint64_t trial_index);

    uint64_t next_u64();

    // Uniform on [0, 1).
    double next_double();

    // Standard normal via Box-Muller (one value per call, no caching, so the
    // call sequence is position-independent).
    double next_normal();

private:
    uint64_t state_;
};

// One multinomial draw of m samples from the renormalized distribution given
// by cdf (inclusive partial sums; cdf.back() is the total mass). Returns
// counts per category. Inverse-CDF with binary search.
std::vector<int> multinomial_draw(Rng& rng, const std::vector<double>& cdf, int m);

}  // namespace fockmet
