#include "fockmet/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fockmet {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

// One central-difference FI evaluation. Outcomes with negligible probability
// on both sides contribute 0 in the limit and are dropped. An outcome whose
// probability has a quadratic zero at theta (p ~ c (theta-t0)^2, recognized
// by p0 ~ 0 with nearly symmetric side values c step^2) contributes the
// finite limit (p')^2/p -> 4c, estimated as 2(p+ + p-)/step^2; such zeros
// occur at interior roots of the outcome amplitude and carry real
// information. An asymmetric change at a zero-probability outcome has no
// linearization and raises the step-size error.
double fi_once(const std::function<PhotonDistribution(double)>& dist_at, double theta,
               double step, const char* who) {
    PhotonDistribution p0 = dist_at(theta);
    PhotonDistribution pp = dist_at(theta + step);
    PhotonDistribution pm = dist_at(theta - step);
    int dim = std::min({p0.dim(), pp.dim(), pm.dim()});
    double fi = 0.0;
    for (int n = 0; n < dim; ++n) {
        double diff = pp[n] - pm[n];
        if (p0[n] < 1e-14) {
            double side_sum = pp[n] + pm[n];
            if (std::abs(diff) < 1e-14 && side_sum < 1e-12) continue;
            if (std::abs(diff) <= 0.2 * side_sum) {
                fi += 2.0 * side_sum / (step * step);
                continue;
            }
            throw ConvergenceError(std::string(who) +
                                   ": derivative at a zero-probability outcome; "
                                   "reduce the step");
        }
        double dp = diff / (2.0 * step);
        fi += dp * dp / p0[n];
    }
    return fi;
}

}  // namespace

double fd_step(double theta) { return std::max(1e-5, theta * 1e-3); }

double classical_fi(const std::function<PhotonDistribution(double)>& dist_at, double theta,
                    double dtheta) {
    require(theta > 0.0, "classical_fi: theta must be positive");
    require(dtheta > 0.0, "classical_fi: dtheta must be positive");
    require(dtheta <= theta / 100.0 * (1.0 + 1e-12),
            "classical_fi: dtheta must not exceed theta/100");
    double coarse = fi_once(dist_at, theta, dtheta, "classical_fi");
    double fine = fi_once(dist_at, theta, dtheta / 2.0, "classical_fi");
    if (std::abs(coarse - fine) > 1e-3 * std::abs(fine))
        throw ConvergenceError("classical_fi: estimate changed by more than 0.1% when the "
                               "step was halved");
    return fine;
}

double fi_displacement_numeric(int m, double n_c, double eta) {
    require(m >= 0, "fi_displacement_numeric: m must be >= 0");
    require(n_c > 0.0, "fi_displacement_numeric: n_c must be positive");
    double step = fd_step(n_c);
    FockCutoff cut = adaptive_cutoff(FockProbe{m}, ChannelParams(n_c + step, 0.0, eta));
    auto family = [m, eta, cut](double theta) {
        return channel_output_distribution(FockProbe{m}, ChannelParams(theta, 0.0, eta), cut);
    };
    return classical_fi(family, n_c, step);
}

double fi_squeezing_numeric(int m, double n_s, double eta) {
    require(m >= 0, "fi_squeezing_numeric: m must be >= 0");
    require(n_s > 0.0, "fi_squeezing_numeric: n_s must be positive");
    double step = fd_step(n_s);
    FockCutoff cut = adaptive_cutoff(FockProbe{m}, ChannelParams(0.0, n_s + step, eta));
    auto family = [m, eta, cut](double theta) {
        return channel_output_distribution(FockProbe{m}, ChannelParams(0.0, theta, eta), cut);
    };
    return classical_fi(family, n_s, step);
}

double fi_displacement_exact(int m, double n_c) {
    require(m >= 0, "fi_displacement_exact: m must be >= 0");
    require(n_c > 0.0, "fi_displacement_exact: information diverges as n_c -> 0");
    return (2.0 * m + 1.0) / n_c;
}

double fi_squeezing_exact(int m, double n_s) {
    require(m >= 0, "fi_squeezing_exact: m must be >= 0");
    require(n_s > 0.0, "fi_squeezing_exact: information diverges as n_s -> 0");
    return (static_cast<double>(m) * m + m + 1.0) / (2.0 * n_s);
}

double fi_displacement_amplitude(int m) {
    require(m >= 0, "fi_displacement_amplitude: m must be >= 0");
    return 8.0 * m + 4.0;
}

double fi_squeezing_amplitude(int m) {
    require(m >= 0, "fi_squeezing_amplitude: m must be >= 0");
    return 2.0 * (static_cast<double>(m) * m + m + 1.0);
}

double chain_rule_fi(double fi_amplitude, double strength) {
    require(strength > 0.0, "chain_rule_fi: strength must be positive");
    return fi_amplitude / (4.0 * strength);
}

double relative_error(double fisher, double strength) {
    require(fisher > 0.0, "relative_error: fisher must be positive");
    require(strength > 0.0, "relative_error: strength must be positive");
    return 1.0 / (fisher * strength);
}

double qfi_fidelity(const std::function<DensityOperator(double)>& state_at, double theta,
                    double dtheta) {
    require(dtheta > 0.0, "qfi_fidelity: dtheta must be positive");
    DensityOperator rho0 = state_at(theta);
    auto h_at = [&](double step) {
        double f = fidelity(rho0, state_at(theta + step));
        return 4.0 * (1.0 - f) / (step * step);
    };
    double coarse = h_at(dtheta);
    double fine = h_at(dtheta / 2.0);
    // near-zero information: the relative test is meaningless against roundoff
    if (std::max(std::abs(coarse), std::abs(fine)) >= 1e-6 &&
        std::abs(coarse - fine) > 0.01 * std::abs(fine))
        throw ConvergenceError("qfi_fidelity: estimates at dtheta and dtheta/2 differ by "
                               "more than 1%");
    return 2.0 * fine - coarse;
}

double qfi_sld(const std::function<DensityOperator(double)>& state_at, double theta,
               double dtheta) {
    require(dtheta > 0.0, "qfi_sld: dtheta must be positive");
    DensityOperator rho0 = state_at(theta);
    auto [vals, vecs] = hermitian_eigen(rho0.matrix());
    auto h_at = [&](double step) {
        DensityOperator rp = state_at(theta + step);
        DensityOperator rm = state_at(theta - step);
        if (rp.dim() != rho0.dim() || rm.dim() != rho0.dim())
            throw ValidationError("qfi_sld: the state family changed dimension");
        Eigen::MatrixXcd drho = (rp.matrix() - rm.matrix()) / (2.0 * step);
        Eigen::MatrixXcd a = vecs.adjoint() * drho * vecs;
        double h = 0.0;
        for (int i = 0; i < rho0.dim(); ++i) {
            for (int j = 0; j < rho0.dim(); ++j) {
                double denom = vals[i] + vals[j];
                if (denom < 1e-12) continue;
                h += 2.0 * std::norm(a(i, j)) / denom;
            }
        }
        return h;
    };
    double coarse = h_at(dtheta);
    double fine = h_at(dtheta / 2.0);
    if (std::max(std::abs(coarse), std::abs(fine)) >= 1e-6 &&
        std::abs(coarse - fine) > 0.01 * std::abs(fine))
        throw ConvergenceError("qfi_sld: estimates at dtheta and dtheta/2 differ by more "
                               "than 1%");
    return (4.0 * fine - coarse) / 3.0;
}

FisherMatrix fisher_matrix(int m, double n_c, double n_s, double step_c, double step_s) {
    require(m >= 0, "fisher_matrix: m must be >= 0");
    require(n_c > 0.0 && n_s > 0.0, "fisher_matrix: strengths must be positive");
    if (step_c == 0.0) step_c = fd_step(n_c);
    if (step_s == 0.0) step_s = fd_step(n_s);
    require(step_c > 0.0 && step_c <= n_c && step_s > 0.0 && step_s <= n_s,
            "fisher_matrix: steps must lie in (0, theta]");
    FockCutoff cut =
        adaptive_cutoff(FockProbe{m}, ChannelParams(n_c + step_c, n_s + step_s));
    auto dist = [m, cut](double c, double s) {
        return combined_distribution(m, ChannelParams(c, s), cut);
    };
    PhotonDistribution p0 = dist(n_c, n_s);
    auto entries_at = [&](double hc, double hs) {
        PhotonDistribution cp = dist(n_c + hc, n_s);
        PhotonDistribution cm = dist(n_c - hc, n_s);
        PhotonDistribution sp = dist(n_c, n_s + hs);
        PhotonDistribution sm = dist(n_c, n_s - hs);
        FisherMatrix h;
        for (int n = 0; n < cut.dim; ++n) {
            double diff_c = cp[n] - cm[n];
            double diff_s = sp[n] - sm[n];
            if (p0[n] < 1e-14) {
                if (std::abs(diff_c) >= 1e-12 || std::abs(diff_s) >= 1e-12)
                    throw ConvergenceError(
                        "fisher_matrix: derivative at a zero-probability outcome; reduce "
                        "the steps");
                continue;
            }
            double dc = diff_c / (2.0 * hc);
            double ds = diff_s / (2.0 * hs);
            h.h_cc += dc * dc / p0[n];
            h.h_ss += ds * ds / p0[n];
            h.h_cs += dc * ds / p0[n];
        }
        return h;
    };
    FisherMatrix coarse = entries_at(step_c, step_s);
    FisherMatrix fine = entries_at(step_c / 2.0, step_s / 2.0);
    if (std::abs(coarse.h_cc - fine.h_cc) > 1e-3 * std::abs(fine.h_cc) ||
        std::abs(coarse.h_ss - fine.h_ss) > 1e-3 * std::abs(fine.h_ss))
        throw ConvergenceError("fisher_matrix: diagonal entries changed by more than 0.1% "
                               "when the steps were halved");
    // the off-diagonal can be arbitrarily close to zero; guard it against the
    // geometric mean of the diagonal instead of its own magnitude
    double scale = std::sqrt(fine.h_cc * fine.h_ss);
    if (std::abs(coarse.h_cs - fine.h_cs) > 1e-3 * scale)
        throw ConvergenceError("fisher_matrix: off-diagonal entry did not stabilize when "
                               "the steps were halved");
    return fine;
}

std::pair<double, double> multiparam_bounds(const FisherMatrix& h, long copies) {
    require(copies >= 1, "multiparam_bounds: copies must be >= 1");
    require(h.h_cc > 0.0 && h.h_ss > 0.0, "multiparam_bounds: diagonal must be positive");
    double det = h.det();
    require(det > 0.0, "multiparam_bounds: information matrix is singular");
    double m = static_cast<double>(copies);
    return {h.h_ss / (m * det), h.h_cc / (m * det)};
}

double snr_displacement(int m, double n_c) {
    require(m >= 0, "snr_displacement: m must be >= 0");
    require(n_c > 0.0, "snr_displacement: n_c must be positive");
    return std::sqrt(n_c / (2.0 * (m + 1.0)));
}

double linearized_sensitivity(int m, double n_c, MomentKind kind) {
    require(m >= 0, "linearized_sensitivity: m must be >= 0");
    require(n_c > 0.0, "linearized_sensitivity: n_c must be positive");
    if (kind == MomentKind::first) return 2.0 * n_c * (m + 1.0);
    double dm = m;
    double num = 2.0 * (4.0 * dm + 1.0) * n_c * n_c * n_c +
                 (18.0 * dm * dm + 2.0 * dm + 3.0) * n_c * n_c +
                 (8.0 * dm * dm * dm + 2.0 * dm * dm + 6.0 * dm + 1.0) * n_c;
    double deriv = 2.0 * (2.0 * dm + 1.0) + 2.0 * n_c;
    return num / (deriv * deriv);
}

}  // namespace fockmet
