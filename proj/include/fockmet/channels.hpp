#pragma once

#include <array>
#include <variant>
#include <vector>

#include "fockmet/common.hpp"
#include "fockmet/hilbert.hpp"

namespace fockmet {

// Strengths of the phase-randomized Gaussian channel. The displacement
// amplitude is sqrt(n_c), so n_c is the energy it adds to vacuum; the squeeze
// parameter is r = sqrt(n_s) (the energy added to vacuum is sinh^2(r)). eta
// is the probe transmissivity of a loss stage applied before the channel.
struct ChannelParams {
    double n_c = 0.0;
    double n_s = 0.0;
    double eta = 1.0;

    ChannelParams(double nc, double ns, double transmissivity = 1.0);
};

struct FockProbe {
    int m;
};

// Classical mixture of number states (e.g. a Fock probe after loss).
struct DiagonalMixture {
    std::vector<double> weights;
};

// Displaced squeezed vacuum D(beta) S(zeta) |0>.
struct GaussianProbeSpec {
    double beta = 0.0;
    double zeta = 0.0;

    double mean_photon() const;
};

using ProbeState = std::variant<FockProbe, DiagonalMixture, GaussianProbeSpec>;

// Exact photon-number distribution of the phase-randomized displacement
// (strength n_c) acting on |m>. Entries are exact; the reported
// truncation_loss is the mass above the cutoff.
PhotonDistribution displacement_distribution(int m, double n_c, FockCutoff cutoff);

// Same for the phase-randomized squeezing channel (strength n_s).
PhotonDistribution squeezing_distribution(int m, double n_s, FockCutoff cutoff);

// Squeeze first, then displace: p(n|m) = sum_k w(n|k) q(k|m).
PhotonDistribution combined_distribution(int m, const ChannelParams& params, FockCutoff cutoff);

// First-order five-outcome model on {m-2..m+2} for weak strengths. weights[j]
// is the probability of outcome m-2+j; levels below 0 carry zero weight and
// the center absorbs the remainder so the five weights sum to exactly 1.
// Requires n_c(2m+1) + n_s(m^2+m+1)/2 < 0.5.
struct WeakWeights {
    int m;
    std::array<double, 5> weights;

    double at(int n) const;
    PhotonDistribution to_distribution() const;
};
WeakWeights weak_limit_distribution(int m, double n_c, double n_s);

// Photon loss as binomial thinning of a number distribution (transmissivity
// eta in (0, 1]).
PhotonDistribution loss_distribution(const PhotonDistribution& p, double eta);

// Photon loss on a density operator via the Kraus series
// A_k = (1-eta)^(k/2)/sqrt(k!) * eta^(n/2) a^k, summed until the residual
// trace weight is below 1e-12.
DensityOperator loss_density(const DensityOperator& rho, double eta);

// Binomial number distribution of |m> after a loss stage of transmissivity
// eta, as a probe mixture.
DiagonalMixture lossy_fock_probe(int m, double eta);

// Number distribution after sending probe through loss (eta) and then the
// phase-randomized channel. Diagonal pipeline: Fock and DiagonalMixture
// probes only.
PhotonDistribution channel_output_distribution(const ProbeState& probe,
                                               const ChannelParams& params,
                                               FockCutoff cutoff);

enum class ChannelKind { displacement, squeezing };

// Phase-randomized unitary channel on a density operator, averaged over K
// equally spaced phases via U(amp e^{i phi}) = R(-phi) U(amp) R(phi) with
// R(phi) = diag(e^{-i phi n}). K (a power of two, >= 8) doubles until the
// output changes by < 1e-9 in max norm; throws ConvergenceError at K = 4096.
DensityOperator phase_randomized_output(const DensityOperator& probe, ChannelKind kind,
                                        double strength, int k_start = 8);

// Mean photon number the channel adds to the vacuum.
double mean_photon_added(ChannelKind kind, double strength);

// Smallest dim >= hint whose truncation loss is below tol for the given
// diagonal pipeline; grows geometrically, errors at the cap.
FockCutoff adaptive_cutoff(const ProbeState& probe, const ChannelParams& params,
                           double tol = 1e-10, int cap = 4096);

// Initial cutoff estimate from the mean photon number of the output.
int cutoff_hint(const ProbeState& probe, const ChannelParams& params);

}  // namespace fockmet
