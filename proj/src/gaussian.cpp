#include "fockmet/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>

#include "fockmet/fisher.hpp"

namespace fockmet {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

// Levels holding all but ~1e-9 of the probe itself: the squeezed-vacuum tail
// decays like tanh^{2k}(zeta) over even levels and the displacement shifts it
// up by beta^2 with Poissonian spread.
int probe_support_dim(const GaussianProbeSpec& probe) {
    int top = 8;
    if (probe.zeta > 0.0) {
        double t2 = std::tanh(probe.zeta) * std::tanh(probe.zeta);
        double k = std::log(1e-9 * std::cosh(probe.zeta)) / std::log(t2);
        top += 2 * static_cast<int>(std::ceil(std::max(1.0, k))) + 4;
    }
    double b2 = probe.beta * probe.beta;
    top += static_cast<int>(std::ceil(b2 + 6.0 * std::sqrt(b2 + 1.0)));
    return top;
}

// Working dimension for sending the probe through a channel of the given
// kind and strength: probe support stretched by the squeeze factor plus the
// spread margin on the output mean.
int working_dim(const GaussianProbeSpec& probe, ChannelKind kind, double strength) {
    double r = kind == ChannelKind::squeezing ? std::sqrt(strength) : 0.0;
    double stretch = std::cosh(2.0 * r);
    double mean_out = probe.mean_photon() * stretch + std::sinh(r) * std::sinh(r) +
                      (kind == ChannelKind::displacement ? strength : 0.0);
    int margin = 10 + static_cast<int>(std::ceil(6.0 * std::sqrt(mean_out + 1.0)));
    return static_cast<int>(std::ceil(probe_support_dim(probe) * stretch)) + margin;
}

Eigen::VectorXcd probe_vector(const GaussianProbeSpec& probe, int dim) {
    Eigen::MatrixXd s = probe.zeta > 0.0
                            ? squeeze_matrix(probe.zeta, FockCutoff(dim))
                            : Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd col = s.col(0);
    if (probe.beta > 0.0)
        col = displacement_matrix(probe.beta, FockCutoff(dim)) * col;
    return col.cast<std::complex<double>>();
}

// The operator matrices are unitary on the truncated space, so an undersized
// basis shows up as mass piled against the top edge rather than as a norm
// deficit; report that top-band mass (plus any norm slip) as the loss.
double truncation_loss_of(const Eigen::VectorXcd& psi) {
    int dim = static_cast<int>(psi.size());
    int band = std::max(2, dim / 16);
    double top = 0.0;
    for (int i = dim - band; i < dim; ++i) top += std::norm(psi[i]);
    return top + std::max(0.0, 1.0 - psi.squaredNorm());
}

double qfi_gaussian_at_dim(const GaussianProbeSpec& probe, ChannelKind kind,
                           double strength, int dim) {
    Eigen::VectorXcd psi = probe_vector(probe, dim);
    double deficit = truncation_loss_of(psi);
    if (deficit >= 1e-8)
        throw TruncationError("qfi_gaussian: probe loses " + std::to_string(deficit) +
                              " norm at dim " + std::to_string(dim));
    DensityOperator rho = DensityOperator::pure(psi, deficit);
    int guard = std::max(4, dim / 16);
    auto cache = std::make_shared<std::map<double, DensityOperator>>();
    auto state_at = [rho, kind, dim, guard, cache](double t) {
        auto it = cache->find(t);
        if (it != cache->end()) return it->second;
        DensityOperator out = phase_randomized_output(rho, kind, t);
        double top = 0.0;
        for (int i = dim - guard; i < dim; ++i) top += out.matrix()(i, i).real();
        if (top > 1e-7)
            throw TruncationError("qfi_gaussian: output occupies the top of the basis");
        cache->emplace(t, out);
        return out;
    };
    double step = fd_step(strength);
    double fid = qfi_fidelity(state_at, strength, step);
    double sld = qfi_sld(state_at, strength, step);
    if (std::abs(fid - sld) > 0.01 * std::max(std::abs(sld), 1e-9))
        throw ConvergenceError("qfi_gaussian: fidelity and logarithmic-derivative routes "
                               "disagree beyond 1%");
    return fid;
}

}  // namespace

DensityOperator gaussian_probe_density(const GaussianProbeSpec& probe, FockCutoff cutoff) {
    require(probe.beta >= 0.0 && probe.zeta >= 0.0,
            "gaussian_probe_density: beta and zeta must be >= 0");
    Eigen::VectorXcd psi = probe_vector(probe, cutoff.dim);
    double deficit = truncation_loss_of(psi);
    if (deficit >= 1e-8)
        throw TruncationError("gaussian_probe_density: norm deficit " +
                              std::to_string(deficit) + " at dim " +
                              std::to_string(cutoff.dim));
    return DensityOperator::pure(psi, deficit);
}

PhotonDistribution phase_randomized_gaussian_distribution(const GaussianProbeSpec& probe,
                                                          FockCutoff cutoff) {
    DensityOperator rho = gaussian_probe_density(probe, cutoff);
    return rho.diagonal();
}

double qfi_gaussian(const GaussianProbeSpec& probe, ChannelKind kind, double strength) {
    require(probe.beta >= 0.0 && probe.zeta >= 0.0,
            "qfi_gaussian: beta and zeta must be >= 0");
    require(strength > 0.0, "qfi_gaussian: strength must be positive");
    int dim = working_dim(probe, kind, strength + fd_step(strength));
    for (int attempt = 0;; ++attempt) {
        try {
            return qfi_gaussian_at_dim(probe, kind, strength, dim);
        } catch (const TruncationError&) {
            if (attempt >= 2) throw;
            dim += dim / 2;
        }
    }
}

double qfi_fock(int m, ChannelKind kind, double strength) {
    require(m >= 0, "qfi_fock: m must be >= 0");
    require(strength > 0.0, "qfi_fock: strength must be positive");
    double step = fd_step(strength);
    ChannelParams top = kind == ChannelKind::displacement
                            ? ChannelParams(strength + step, 0.0)
                            : ChannelParams(0.0, strength + step);
    FockCutoff cut = adaptive_cutoff(FockProbe{m}, top);
    auto family = [m, kind, cut](double theta) {
        return kind == ChannelKind::displacement
                   ? displacement_distribution(m, theta, cut)
                   : squeezing_distribution(m, theta, cut);
    };
    return classical_fi(family, strength, step);
}

double equivalent_energy(GaussianFamily family, ChannelKind kind, double strength,
                         double target_fi) {
    require(strength > 0.0, "equivalent_energy: strength must be positive");
    require(target_fi > 0.0, "equivalent_energy: target must be positive");
    constexpr double kMaxEnergy = 50.0;
    auto fi_at = [&](double n) {
        return qfi_gaussian(gaussian_probe_with_energy(family, n), kind, strength);
    };
    auto close = [&](double f) { return std::abs(f - target_fi) <= 0.01 * target_fi; };

    double f_lo = fi_at(0.0);
    if (close(f_lo)) return 0.0;
    if (f_lo > target_fi)
        throw ConvergenceError("equivalent_energy: target below the vacuum-probe value");
    // grow the bracket geometrically so the expensive high-energy probes are
    // only ever built when the target actually needs them
    double lo = 0.0, hi = 1.0;
    double f_prev = f_lo;
    for (;;) {
        double f = fi_at(hi);
        if (f < f_prev * (1.0 - 1e-3))
            throw ConvergenceError("equivalent_energy: information is not increasing in "
                                   "the probe energy on this bracket");
        if (close(f)) return hi;
        if (f > target_fi) break;
        if (hi >= kMaxEnergy)
            throw ConvergenceError("equivalent_energy: target unreachable below mean "
                                   "photon number 50");
        lo = hi;
        f_prev = f;
        hi = std::min(2.0 * hi, kMaxEnergy);
    }
    for (int iter = 0; iter < 60; ++iter) {
        double mid = 0.5 * (lo + hi);
        double f = fi_at(mid);
        if (close(f)) return mid;
        (f < target_fi ? lo : hi) = mid;
    }
    throw ConvergenceError("equivalent_energy: bisection did not reach the 1% window");
}

double squeezing_db(double m) {
    require(m >= 0.0, "squeezing_db: m must be >= 0");
    double r = std::asinh(std::sqrt(m));
    return 10.0 * 2.0 * r / std::log(10.0);
}

GaussianProbeSpec gaussian_probe_with_energy(GaussianFamily family, double mean_photon) {
    require(mean_photon >= 0.0, "gaussian_probe_with_energy: mean photon must be >= 0");
    if (family == GaussianFamily::coherent)
        return GaussianProbeSpec{std::sqrt(mean_photon), 0.0};
    return GaussianProbeSpec{0.0, std::asinh(std::sqrt(mean_photon))};
}

}  // namespace fockmet
