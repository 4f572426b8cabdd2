#pragma once

#include "fockmet/channels.hpp"
#include "fockmet/common.hpp"
#include "fockmet/hilbert.hpp"

namespace fockmet {

// Density operator of the displaced squeezed vacuum D(beta) S(zeta) |0>.
// Requires the cutoff to leave a norm deficit < 1e-8.
DensityOperator gaussian_probe_density(const GaussianProbeSpec& probe, FockCutoff cutoff);

// Number distribution of the phase-randomized Gaussian probe (its diagonal).
PhotonDistribution phase_randomized_gaussian_distribution(const GaussianProbeSpec& probe,
                                                          FockCutoff cutoff);

// Quantum Fisher information of the channel strength for a Gaussian probe
// sent through the phase-randomized channel, via the fidelity route on
// phase_randomized_output. Chooses its own cutoff from the probe tail and
// channel spread.
double qfi_gaussian(const GaussianProbeSpec& probe, ChannelKind kind, double strength);

// Same pipeline for a Fock probe (diagonal shortcut; used for consistency
// checks against the closed forms).
double qfi_fock(int m, ChannelKind kind, double strength);

enum class GaussianFamily { coherent, squeezed };

// Mean photon number a probe of the family needs so its QFI reaches
// target_fi (within 1% relative), by bracketed bisection on [0, 50].
// Throws ConvergenceError when the target is unreachable in the bracket.
double equivalent_energy(GaussianFamily family, ChannelKind kind, double strength,
                         double target_fi);

// Fock-state energy m expressed as the squeezing level (in dB) of the pure
// squeezed state with the same mean photon number: r = asinh(sqrt(m)),
// dB = 10 log10(e^{2r}).
double squeezing_db(double m);

// Probe of the family with the given mean photon number (coherent: beta^2 =
// n; squeezed: sinh^2 zeta = n).
GaussianProbeSpec gaussian_probe_with_energy(GaussianFamily family, double mean_photon);

}  // namespace fockmet
