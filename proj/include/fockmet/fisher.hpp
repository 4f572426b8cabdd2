#pragma once

#include <functional>

#include "fockmet/channels.hpp"
#include "fockmet/common.hpp"
#include "fockmet/hilbert.hpp"

namespace fockmet {

// Symmetric 2x2 Fisher information matrix in the (n_c, n_s) parameters.
struct FisherMatrix {
    double h_cc = 0.0;
    double h_ss = 0.0;
    double h_cs = 0.0;

    double det() const { return h_cc * h_ss - h_cs * h_cs; }
    // Off-diagonal coupling ratio h_cs^2 / (h_cc h_ss).
    double coupling_ratio() const { return h_cs * h_cs / (h_cc * h_ss); }
};

// Cramer-Rao variance bound for M probes given Fisher information f.
struct CRBound {
    double fisher;
    long copies;

    double variance() const { return 1.0 / (fisher * static_cast<double>(copies)); }
};

// Finite-difference step for a parameter theta: max(1e-5, theta * 1e-3).
double fd_step(double theta);

// Classical Fisher information of a one-parameter family of number
// distributions, by central differences at steps dtheta and dtheta/2.
// Outcomes with p < 1e-14 and |dp| < 1e-14 are dropped; p < 1e-14 with
// |dp| >= 1e-12 means the step is too large (ConvergenceError), as does a
// > 0.1% change between the two step sizes. Returns the finer estimate.
double classical_fi(const std::function<PhotonDistribution(double)>& dist_at, double theta,
                    double dtheta);

// Convenience families (loss before the channel; eta = 1 means lossless).
double fi_displacement_numeric(int m, double n_c, double eta = 1.0);
double fi_squeezing_numeric(int m, double n_s, double eta = 1.0);

// Closed forms for Fock probe |m> with number-resolved readout.
double fi_displacement_exact(int m, double n_c);   // (2m+1)/n_c
double fi_squeezing_exact(int m, double n_s);      // (m^2+m+1)/(2 n_s)
double fi_displacement_amplitude(int m);           // 8m+4, amplitude parameter
double fi_squeezing_amplitude(int m);              // 2(m^2+m+1), amplitude parameter

// F(N) = F_amplitude / (4N) for strength N = amplitude^2.
double chain_rule_fi(double fi_amplitude, double strength);

// Relative estimation error R = 1 / (F(N) * N) for a single probe.
double relative_error(double fisher, double strength);

// Quantum Fisher information from the fidelity drop
// H = 4 [1 - F(rho_theta, rho_theta+dtheta)] / dtheta^2, Richardson-
// extrapolated from steps dtheta and dtheta/2; the two raw estimates must
// agree within 1%.
double qfi_fidelity(const std::function<DensityOperator(double)>& state_at, double theta,
                    double dtheta);

// Quantum Fisher information via the symmetric logarithmic derivative in the
// eigenbasis of rho_theta, with d rho by central differences; eigenpairs with
// rho_n + rho_m < 1e-12 are excluded. Same two-step agreement requirement.
double qfi_sld(const std::function<DensityOperator(double)>& state_at, double theta,
               double dtheta);

// Two-parameter Fisher matrix of the combined channel at (n_c, n_s) by
// central differences in each parameter. Steps of 0 mean fd_step(theta);
// diagonal entries must be stable to 0.1% under step halving.
FisherMatrix fisher_matrix(int m, double n_c, double n_s, double step_c = 0.0,
                           double step_s = 0.0);

// Multiparameter Cramer-Rao variance bounds for (n_c, n_s) with M copies:
// h_ss/(M det H) and h_cc/(M det H).
std::pair<double, double> multiparam_bounds(const FisherMatrix& h, long copies);

// Moment-based sensitivity of a mean-photon readout (no number resolution),
// closed forms: snr = sqrt(n_c / (2(m+1))); first-moment variance bound
// 2 n_c (m+1); second-moment form uses the full cubic fluctuation
// polynomial.
double snr_displacement(int m, double n_c);
enum class MomentKind { first, second };
double linearized_sensitivity(int m, double n_c, MomentKind kind);

}  // namespace fockmet
