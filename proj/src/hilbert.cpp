#include "fockmet/hilbert.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace fockmet {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw ValidationError(msg);
}

// Signed log-space accumulator: sums sign * exp(logmag) terms without
// overflow by factoring out the largest magnitude.
double signed_logsum(const std::vector<std::pair<double, double>>& terms) {
    if (terms.empty()) return 0.0;
    double max_log = -INFINITY;
    for (const auto& t : terms) max_log = std::max(max_log, t.second);
    if (!std::isfinite(max_log)) return 0.0;
    double acc = 0.0;
    for (const auto& t : terms) acc += t.first * std::exp(t.second - max_log);
    return acc * std::exp(max_log);
}

}  // namespace

DensityOperator::DensityOperator(Eigen::MatrixXcd mat, double trace_deficit)
    : mat_(std::move(mat)), trace_deficit_(trace_deficit) {
    require(mat_.rows() == mat_.cols() && mat_.rows() >= 1,
            "DensityOperator: matrix must be square and nonempty");
    double herm_dev = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > 1e-12)
        throw ValidationError("DensityOperator: non-Hermitian input, deviation " +
                              std::to_string(herm_dev));
    double tr = mat_.trace().real();
    if (std::abs(tr - (1.0 - trace_deficit_)) > 1e-8)
        throw ValidationError("DensityOperator: trace " + std::to_string(tr) +
                              " inconsistent with declared deficit");
}

PhotonDistribution DensityOperator::diagonal() const {
    std::vector<double> p(static_cast<size_t>(dim()));
    for (int n = 0; n < dim(); ++n) p[static_cast<size_t>(n)] = std::max(0.0, mat_(n, n).real());
    return PhotonDistribution(std::move(p), trace_deficit_);
}

void DensityOperator::validate() const {
    auto [vals, vecs] = hermitian_eigen(mat_);
    if (vals.minCoeff() < -1e-10)
        throw ValidationError("DensityOperator: negative eigenvalue " +
                              std::to_string(vals.minCoeff()));
}

DensityOperator DensityOperator::pure(const Eigen::VectorXcd& psi, double trace_deficit) {
    return DensityOperator(psi * psi.adjoint(), trace_deficit);
}

double log_factorial(int n) {
    require(n >= 0, "log_factorial: n must be >= 0");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double laguerre_assoc(int m, int a, double x) {
    require(m >= 0, "laguerre_assoc: degree must be >= 0");
    require(x >= 0.0, "laguerre_assoc: x must be >= 0");
    require(a >= -m, "laguerre_assoc: order must be >= -degree");
    if (a < 0) {
        // L_m^(-j)(x) = (-x)^j (m-j)!/m! L_{m-j}^(j)(x)
        int j = -a;
        double pref = std::exp(log_factorial(m - j) - log_factorial(m));
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        for (int i = 0; i < j; ++i) pref *= x;
        return sign * pref * laguerre_assoc(m - j, j, x);
    }
    double lkm1 = 1.0;
    if (m == 0) return lkm1;
    double lk = 1.0 + a - x;
    for (int k = 1; k < m; ++k) {
        double lkp1 = ((2.0 * k + 1.0 + a - x) * lk - (k + a) * lkm1) / (k + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    return lk;
}

double displacement_element(int n, int m, double amp) {
    require(n >= 0 && m >= 0, "displacement_element: indices must be >= 0");
    require(amp >= 0.0, "displacement_element: amplitude must be >= 0");
    if (amp == 0.0) return n == m ? 1.0 : 0.0;
    if (n < m) {
        double sym = displacement_element(m, n, amp);
        return ((m - n) % 2 == 0) ? sym : -sym;
    }
    double x = amp * amp;
    double lag = laguerre_assoc(m, n - m, x);
    if (lag == 0.0) return 0.0;
    double logmag = 0.5 * (log_factorial(m) - log_factorial(n)) + (n - m) * std::log(amp) -
                    0.5 * x + std::log(std::abs(lag));
    return (lag > 0.0 ? 1.0 : -1.0) * std::exp(logmag);
}

double squeeze_element(int n, int m, double r) {
    require(n >= 0 && m >= 0, "squeeze_element: indices must be >= 0");
    require(r >= 0.0, "squeeze_element: squeeze parameter must be >= 0");
    if (r == 0.0) return n == m ? 1.0 : 0.0;
    if ((n - m) % 2 != 0) return 0.0;
    int j = (n - m) / 2;
    double log_tanh = std::log(std::tanh(r));
    double log_sinh = std::log(std::sinh(r));
    double log_cosh = std::log(std::cosh(r));
    double base = 0.5 * (log_factorial(n) + log_factorial(m)) +
                  j * (log_tanh - std::log(2.0)) - (m + 0.5) * log_cosh;
    std::vector<std::pair<double, double>> terms;
    for (int k = std::max(0, -j); 2 * k <= m; ++k) {
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        double logmag = base + 2.0 * k * (log_sinh - std::log(2.0)) - log_factorial(k) -
                        log_factorial(k + j) - log_factorial(m - 2 * k);
        terms.emplace_back(sign, logmag);
    }
    return signed_logsum(terms);
}

namespace {

// Exponential of the truncated skew-symmetric generator.  The result is
// unitary on the truncated space by construction; entries within a few
// photon-spreads of the cutoff edge differ from their infinite-basis values,
// so callers that need edge accuracy must request a larger cutoff.
// Per-element recurrences are avoided here on purpose: marching schemes for
// these matrices amplify rounding errors exponentially once the basis grows
// past a couple hundred levels.
Eigen::MatrixXd truncated_unitary(const Eigen::MatrixXd& generator) {
    return generator.exp();
}

}  // namespace

Eigen::MatrixXd squeeze_matrix(double r, FockCutoff cutoff) {
    require(r >= 0.0, "squeeze_matrix: squeeze parameter must be >= 0");
    int dim = cutoff.dim;
    if (r == 0.0) return Eigen::MatrixXd::Identity(dim, dim);
    // generator (r/2)(a^+^2 - a^2)
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n + 2 < dim; ++n) {
        double c = 0.5 * r * std::sqrt((n + 1.0) * (n + 2.0));
        g(n + 2, n) = c;
        g(n, n + 2) = -c;
    }
    return truncated_unitary(g);
}

Eigen::MatrixXd displacement_matrix(double amp, FockCutoff cutoff) {
    require(amp >= 0.0, "displacement_matrix: amplitude must be >= 0");
    int dim = cutoff.dim;
    if (amp == 0.0) return Eigen::MatrixXd::Identity(dim, dim);
    // generator amp (a^+ - a)
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) {
        double c = amp * std::sqrt(n + 1.0);
        g(n + 1, n) = c;
        g(n, n + 1) = -c;
    }
    return truncated_unitary(g);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXcd> hermitian_eigen(const Eigen::MatrixXcd& a) {
    require(a.rows() == a.cols() && a.rows() >= 1, "hermitian_eigen: matrix must be square");
    double herm_dev = (a - a.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > 1e-10)
        throw ValidationError("hermitian_eigen: input deviates from Hermitian by " +
                              std::to_string(herm_dev));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("hermitian_eigen: eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& a, const char* what) {
    auto [vals, vecs] = hermitian_eigen(a);
    Eigen::VectorXd sqrt_vals(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        double v = vals[i];
        if (v < -1e-10)
            throw ValidationError(std::string("fidelity: ") + what + " has eigenvalue " +
                                  std::to_string(v));
        sqrt_vals[i] = std::sqrt(std::max(0.0, v));
    }
    return vecs * sqrt_vals.asDiagonal() * vecs.adjoint();
}

}  // namespace

double fidelity(const DensityOperator& rho0, const DensityOperator& rho1) {
    if (rho0.dim() != rho1.dim())
        throw ValidationError("fidelity: dimension mismatch " + std::to_string(rho0.dim()) +
                              " vs " + std::to_string(rho1.dim()));
    Eigen::MatrixXcd root0 = hermitian_sqrt(rho0.matrix(), "first state");
    Eigen::MatrixXcd root1 = hermitian_sqrt(rho1.matrix(), "second state");
    // tr sqrt(sqrt(rho0) rho1 sqrt(rho0)) equals the trace norm of
    // sqrt(rho1) sqrt(rho0); singular values are insensitive to the argument
    // order, which keeps the result symmetric to machine precision.
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(root1 * root0);
    double sum = svd.singularValues().sum();
    return sum * sum;
}

}  // namespace fockmet
