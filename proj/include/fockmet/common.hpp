#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fockmet {

// Thrown when inputs violate a documented precondition. The CLI maps this
// to exit code 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an iterative numerical procedure fails to converge within its
// documented budget. The CLI maps this to exit code 3.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a truncated-basis computation loses more probability mass than
// the caller's tolerance allows. The CLI maps this to exit code 3.
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Size of a truncated number-state basis: levels 0..dim-1.
struct FockCutoff {
    int dim;

    explicit FockCutoff(int d) : dim(d) {
        if (d < 1) throw ValidationError("FockCutoff: dim must be >= 1, got " + std::to_string(d));
    }
};

// Photon-number distribution on a truncated basis. Entries are exact
// per-level probabilities of the untruncated distribution, so they sum to
// 1 - truncation_loss with truncation_loss >= 0.
class PhotonDistribution {
public:
    PhotonDistribution(std::vector<double> probs, double truncation_loss);

    int dim() const { return static_cast<int>(probs_.size()); }
    double operator[](int n) const { return probs_[static_cast<size_t>(n)]; }
    const std::vector<double>& probs() const { return probs_; }
    double truncation_loss() const { return truncation_loss_; }

    double mean() const;
    double moment(int k) const;

private:
    std::vector<double> probs_;
    double truncation_loss_;
};

// Number of worker threads to use: hardware concurrency capped by the
// FOCK_METROLOGY_THREADS environment variable (values < 1 mean 1).
int worker_threads();

// Runs fn(i) for i in [0, n). Results must be written to preallocated
// per-index slots so the outcome is identical for any thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace fockmet
