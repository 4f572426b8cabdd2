#include "fockmet/rng.hpp"

#include <algorithm>
#include <cmath>

#include "fockmet/common.hpp"

namespace fockmet {

namespace {

constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;

uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

}  // namespace

Rng Rng::for_trial(uint64_t master_seed, uint64_t trial_index) {
    return Rng(mix(master_seed + kGamma * (trial_index + 1)));
}

uint64_t Rng::next_u64() {
    state_ += kGamma;
    return mix(state_);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
    // u1 in (0, 1] so the log is finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<int> multinomial_draw(Rng& rng, const std::vector<double>& cdf, int m) {
    if (cdf.empty()) throw ValidationError("multinomial_draw: empty cdf");
    if (m < 0) throw ValidationError("multinomial_draw: negative sample count");
    std::vector<int> counts(cdf.size(), 0);
    const double total = cdf.back();
    for (int i = 0; i < m; ++i) {
        double u = rng.next_double() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        counts[static_cast<size_t>(it - cdf.begin())] += 1;
    }
    return counts;
}

}  // namespace fockmet
