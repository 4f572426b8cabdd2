#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "fockmet/common.hpp"

namespace fockmet {

// Density operator on a truncated number basis. Construction checks
// Hermiticity (1e-12 elementwise) and trace (within 1e-8 of 1 minus the
// declared deficit). Positivity is checked where it matters (eigen routines
// clip tiny negative eigenvalues; validate() runs the full check).
class DensityOperator {
public:
    DensityOperator(Eigen::MatrixXcd mat, double trace_deficit = 0.0);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return mat_; }
    double trace_deficit() const { return trace_deficit_; }

    // Number-basis diagonal as a PhotonDistribution.
    PhotonDistribution diagonal() const;

    // Full invariant check including positive semidefiniteness
    // (eigenvalues >= -1e-10). Throws ValidationError on failure.
    void validate() const;

    static DensityOperator pure(const Eigen::VectorXcd& psi, double trace_deficit = 0.0);

private:
    Eigen::MatrixXcd mat_;
    double trace_deficit_;
};

// log(n!) with relative error at the level of lgamma (< 1e-13 over the
// supported range).
double log_factorial(int n);

// Associated Laguerre polynomial L_m^{(a)}(x) for integer a >= -m, x >= 0,
// by the three-term recurrence upward in degree. Negative a is reduced to
// positive a via L_m^{(-j)}(x) = (-x)^j (m-j)!/m! L_{m-j}^{(j)}(x).
double laguerre_assoc(int m, int a, double x);

// <n|D(amp)|m> for real nonnegative amp, in closed form (log-space factorial
// ratio times a Laguerre factor). Satisfies <n|D|m> = (-1)^(m-n) <m|D|n>.
double displacement_element(int n, int m, double amp);

// <n|S(r)|m> for real r >= 0 with S(r) = exp[(r/2)(a^+2 - a^2)]. Zero when
// n-m is odd; otherwise a sign-tracked log-space sum. Intended for probe-scale
// m (the alternating sum loses accuracy for m beyond a few tens; use
// squeeze_matrix for large bases).
double squeeze_element(int n, int m, double r);

// Full squeeze matrix on dim levels as the exponential of the truncated
// generator (r/2)(a^+2 - a^2): exactly orthogonal on the truncated space, and
// interior columns converge to the untruncated operator once dim comfortably
// exceeds the support scale m cosh(2r). Suitable for large dim.
Eigen::MatrixXd squeeze_matrix(double r, FockCutoff cutoff);

// Full displacement matrix D(amp) on dim levels, same construction from the
// generator amp (a^+ - a).
Eigen::MatrixXd displacement_matrix(double amp, FockCutoff cutoff);

// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix. Throws if
// the input deviates from Hermiticity by more than 1e-10.
std::pair<Eigen::VectorXd, Eigen::MatrixXcd> hermitian_eigen(const Eigen::MatrixXcd& a);

// Uhlmann fidelity (Tr sqrt(sqrt(rho0) rho1 sqrt(rho0)))^2. Eigenvalues in
// (-1e-10, 0) are clipped to 0; below -1e-10 is an error, as is a dimension
// mismatch.
double fidelity(const DensityOperator& rho0, const DensityOperator& rho1);

}  // namespace fockmet
