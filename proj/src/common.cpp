#include "fockmet/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace fockmet {

PhotonDistribution::PhotonDistribution(std::vector<double> probs, double truncation_loss)
    : probs_(std::move(probs)), truncation_loss_(truncation_loss) {
    if (probs_.empty()) throw ValidationError("PhotonDistribution: empty probability vector");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0) || std::isnan(p))
            throw ValidationError("PhotonDistribution: negative or NaN entry");
        sum += p;
    }
    if (truncation_loss_ < -1e-12)
        throw ValidationError("PhotonDistribution: negative truncation loss");
    truncation_loss_ = std::max(0.0, truncation_loss_);
    if (sum > 1.0 + 1e-10)
        throw ValidationError("PhotonDistribution: probabilities sum to " + std::to_string(sum));
}

double PhotonDistribution::mean() const { return moment(1); }

double PhotonDistribution::moment(int k) const {
    double s = 0.0;
    for (size_t n = 0; n < probs_.size(); ++n) {
        double term = probs_[n];
        for (int j = 0; j < k; ++j) term *= static_cast<double>(n);
        s += term;
    }
    return s;
}

int worker_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("FOCK_METROLOGY_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) hw = static_cast<int>(std::min<long>(hw, cap));
    }
    return hw;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    int threads = std::min(worker_threads(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    std::exception_ptr first_error;
    std::mutex guard;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(guard);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fockmet
