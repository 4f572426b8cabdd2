#pragma once

// Independent reference implementations used only by tests. These are
// deliberately written by different routes than the library code: matrix
// exponentials by scaling-and-squaring on a padded basis, polynomials by
// direct log-space summation.

#include <Eigen/Dense>

namespace fockmet::oracle {

// exp(A) by scaling-and-squaring with a Taylor series on the scaled matrix.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

// Displacement matrix exp(amp (a^+ - a)) built on dim + pad levels and cut
// back to dim, so truncation artifacts stay out of the compared block.
Eigen::MatrixXd displacement_unitary_expm(double amp, int dim, int pad = 15);

// Squeeze matrix exp((r/2)(a^+2 - a^2)) on a padded basis, cut back to dim.
Eigen::MatrixXd squeeze_unitary_expm(double r, int dim, int pad = 30);

// L_m^(a)(x) = sum_k (-1)^k C(m+a, m-k) x^k / k! by direct summation.
double laguerre_direct(int m, int a, double x);

}  // namespace fockmet::oracle
