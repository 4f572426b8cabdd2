#include "fockmet/channels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

namespace fockmet {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

// Column m of the phase-randomized displacement channel, entries for
// n < dim. Entries are the untruncated values, so 1 - sum is the tail mass.
std::pair<std::vector<double>, double> displacement_probs(int m, double n_c, int dim) {
    std::vector<double> p(static_cast<size_t>(dim), 0.0);
    double amp = std::sqrt(n_c);
    double sum = 0.0;
    for (int n = 0; n < dim; ++n) {
        double e = displacement_element(n, m, amp);
        p[static_cast<size_t>(n)] = e * e;
        sum += p[static_cast<size_t>(n)];
    }
    return {std::move(p), std::max(0.0, 1.0 - sum)};
}

std::pair<std::vector<double>, double> squeezing_probs(int m, double n_s, int dim) {
    std::vector<double> p(static_cast<size_t>(dim), 0.0);
    double r = std::sqrt(n_s);
    double sum = 0.0;
    for (int n = (m % 2); n < dim; n += 2) {
        double e = squeeze_element(n, m, r);
        p[static_cast<size_t>(n)] = e * e;
        sum += p[static_cast<size_t>(n)];
    }
    return {std::move(p), std::max(0.0, 1.0 - sum)};
}

// Basis size after which the squeezing column's tail falls below tail_tol.
int squeeze_support(int m, double n_s, double tail_tol) {
    int dim = std::max(m + 8, 16);
    for (;;) {
        auto [q, loss] = squeezing_probs(m, n_s, dim);
        if (loss < tail_tol) return dim;
        if (dim > 16384)
            throw TruncationError("squeezing support exceeds 16384 levels at strength " +
                                  std::to_string(n_s));
        dim += dim / 2;
    }
}

std::pair<std::vector<double>, double> combined_probs(int m, const ChannelParams& params,
                                                      int dim) {
    if (params.n_s == 0.0) return displacement_probs(m, params.n_c, dim);
    if (params.n_c == 0.0) return squeezing_probs(m, params.n_s, dim);
    // squeeze first, then displace; the intermediate sum runs far enough that
    // its tail cannot move the reported entries
    int inner = squeeze_support(m, params.n_s, 1e-13);
    auto [q, q_loss] = squeezing_probs(m, params.n_s, inner);
    std::vector<double> p(static_cast<size_t>(dim), 0.0);
    double amp = std::sqrt(params.n_c);
    for (int k = (m % 2); k < inner; k += 2) {
        double qk = q[static_cast<size_t>(k)];
        if (qk == 0.0) continue;
        for (int n = 0; n < dim; ++n) {
            double e = displacement_element(n, k, amp);
            p[static_cast<size_t>(n)] += qk * e * e;
        }
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    return {std::move(p), std::max(0.0, 1.0 - sum)};
}

PhotonDistribution finish_distribution(std::pair<std::vector<double>, double> probs_loss,
                                       const char* what) {
    auto& [probs, loss] = probs_loss;
    if (loss > 1e-8)
        throw TruncationError(std::string(what) + ": truncation loss " + std::to_string(loss) +
                              " exceeds 1e-8 at the given cutoff");
    return PhotonDistribution(std::move(probs), loss);
}

double probe_mean_photon(const ProbeState& probe) {
    if (const auto* f = std::get_if<FockProbe>(&probe)) return static_cast<double>(f->m);
    if (const auto* d = std::get_if<DiagonalMixture>(&probe)) {
        double mean = 0.0;
        for (size_t k = 0; k < d->weights.size(); ++k) mean += static_cast<double>(k) * d->weights[k];
        return mean;
    }
    return std::get<GaussianProbeSpec>(probe).mean_photon();
}

void check_mixture(const DiagonalMixture& mix) {
    require(!mix.weights.empty(), "DiagonalMixture: weights must be nonempty");
    double sum = 0.0;
    for (double w : mix.weights) {
        require(w >= 0.0, "DiagonalMixture: negative weight");
        sum += w;
    }
    require(sum <= 1.0 + 1e-10, "DiagonalMixture: weights sum to " + std::to_string(sum));
}

}  // namespace

ChannelParams::ChannelParams(double nc, double ns, double transmissivity)
    : n_c(nc), n_s(ns), eta(transmissivity) {
    require(n_c >= 0.0, "ChannelParams: n_c must be >= 0");
    require(n_s >= 0.0, "ChannelParams: n_s must be >= 0");
    require(eta > 0.0 && eta <= 1.0, "ChannelParams: eta must be in (0, 1]");
}

double GaussianProbeSpec::mean_photon() const {
    return beta * beta + std::sinh(zeta) * std::sinh(zeta);
}

PhotonDistribution displacement_distribution(int m, double n_c, FockCutoff cutoff) {
    require(m >= 0, "displacement_distribution: m must be >= 0");
    require(n_c >= 0.0, "displacement_distribution: n_c must be >= 0");
    return finish_distribution(displacement_probs(m, n_c, cutoff.dim),
                               "displacement_distribution");
}

PhotonDistribution squeezing_distribution(int m, double n_s, FockCutoff cutoff) {
    require(m >= 0, "squeezing_distribution: m must be >= 0");
    require(n_s >= 0.0, "squeezing_distribution: n_s must be >= 0");
    return finish_distribution(squeezing_probs(m, n_s, cutoff.dim), "squeezing_distribution");
}

PhotonDistribution combined_distribution(int m, const ChannelParams& params, FockCutoff cutoff) {
    require(m >= 0, "combined_distribution: m must be >= 0");
    return finish_distribution(combined_probs(m, params, cutoff.dim), "combined_distribution");
}

double WeakWeights::at(int n) const {
    int j = n - m + 2;
    if (j < 0 || j > 4) return 0.0;
    return weights[static_cast<size_t>(j)];
}

PhotonDistribution WeakWeights::to_distribution() const {
    std::vector<double> p(static_cast<size_t>(m) + 3, 0.0);
    for (int n = std::max(0, m - 2); n <= m + 2; ++n) p[static_cast<size_t>(n)] = at(n);
    return PhotonDistribution(std::move(p), 0.0);
}

WeakWeights weak_limit_distribution(int m, double n_c, double n_s) {
    require(m >= 0, "weak_limit_distribution: m must be >= 0");
    require(n_c >= 0.0 && n_s >= 0.0, "weak_limit_distribution: strengths must be >= 0");
    double budget = n_c * (2.0 * m + 1.0) + n_s * (m * m + m + 1.0) / 2.0;
    require(budget < 0.5, "weak_limit_distribution: strengths too large for the "
                          "first-order model (occupation budget " +
                              std::to_string(budget) + " >= 0.5)");
    WeakWeights w{m, {0.0, 0.0, 0.0, 0.0, 0.0}};
    w.weights[0] = (m >= 2) ? n_s * m * (m - 1.0) / 4.0 : 0.0;
    w.weights[1] = (m >= 1) ? n_c * m : 0.0;
    w.weights[3] = n_c * (m + 1.0);
    w.weights[4] = n_s * (m + 2.0) * (m + 1.0) / 4.0;
    double rest = w.weights[0] + w.weights[1] + w.weights[3] + w.weights[4];
    w.weights[2] = 1.0 - rest;
    return w;
}

PhotonDistribution loss_distribution(const PhotonDistribution& p, double eta) {
    require(eta > 0.0 && eta <= 1.0, "loss_distribution: eta must be in (0, 1]");
    if (eta == 1.0) return p;
    int dim = p.dim();
    std::vector<double> out(static_cast<size_t>(dim), 0.0);
    double log_eta = std::log(eta);
    double log_keep = std::log1p(-eta);
    for (int n = 0; n < dim; ++n) {
        double pn = p[n];
        if (pn == 0.0) continue;
        for (int k = 0; k <= n; ++k) {
            double log_binom = log_factorial(n) - log_factorial(k) - log_factorial(n - k);
            out[static_cast<size_t>(k)] +=
                pn * std::exp(log_binom + k * log_eta + (n - k) * log_keep);
        }
    }
    return PhotonDistribution(std::move(out), p.truncation_loss());
}

DensityOperator loss_density(const DensityOperator& rho, double eta) {
    require(eta > 0.0 && eta <= 1.0, "loss_density: eta must be in (0, 1]");
    if (eta == 1.0) return rho;
    int dim = rho.dim();
    const Eigen::MatrixXcd& r = rho.matrix();
    double trace = r.trace().real();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    double captured = 0.0;
    double log_eta = std::log(eta);
    double log_keep = std::log1p(-eta);
    for (int k = 0; k < dim; ++k) {
        // A_k |i+k> = c_k(i) |i> with c_k(i) = sqrt(C(i+k,k) (1-eta)^k eta^i)
        std::vector<double> c(static_cast<size_t>(dim - k));
        for (int i = 0; i + k < dim; ++i) {
            double log_binom =
                log_factorial(i + k) - log_factorial(k) - log_factorial(i);
            c[static_cast<size_t>(i)] =
                std::exp(0.5 * (log_binom + k * log_keep + i * log_eta));
        }
        double term_trace = 0.0;
        for (int i = 0; i + k < dim; ++i) {
            double ci = c[static_cast<size_t>(i)];
            term_trace += ci * ci * r(i + k, i + k).real();
            for (int j = 0; j + k < dim; ++j)
                out(i, j) += ci * c[static_cast<size_t>(j)] * r(i + k, j + k);
        }
        captured += term_trace;
        if (trace - captured < 1e-12) break;
    }
    out = 0.5 * (out + out.adjoint()).eval();
    return DensityOperator(out, 1.0 - out.trace().real());
}

DiagonalMixture lossy_fock_probe(int m, double eta) {
    require(m >= 0, "lossy_fock_probe: m must be >= 0");
    require(eta > 0.0 && eta <= 1.0, "lossy_fock_probe: eta must be in (0, 1]");
    std::vector<double> w(static_cast<size_t>(m) + 1, 0.0);
    if (eta == 1.0) {
        w[static_cast<size_t>(m)] = 1.0;
        return DiagonalMixture{std::move(w)};
    }
    double log_eta = std::log(eta);
    double log_keep = std::log1p(-eta);
    for (int k = 0; k <= m; ++k) {
        double log_binom = log_factorial(m) - log_factorial(k) - log_factorial(m - k);
        w[static_cast<size_t>(k)] = std::exp(log_binom + k * log_eta + (m - k) * log_keep);
    }
    return DiagonalMixture{std::move(w)};
}

PhotonDistribution channel_output_distribution(const ProbeState& probe,
                                               const ChannelParams& params, FockCutoff cutoff) {
    if (std::holds_alternative<GaussianProbeSpec>(probe))
        throw ValidationError(
            "channel_output_distribution: Gaussian probes are not diagonal; use the "
            "density-operator pipeline");
    std::vector<double> weights;
    if (const auto* f = std::get_if<FockProbe>(&probe)) {
        require(f->m >= 0, "channel_output_distribution: Fock index must be >= 0");
        weights = lossy_fock_probe(f->m, params.eta).weights;
    } else {
        const auto& mix = std::get<DiagonalMixture>(probe);
        check_mixture(mix);
        if (params.eta < 1.0) {
            PhotonDistribution thinned =
                loss_distribution(PhotonDistribution(mix.weights, 0.0), params.eta);
            weights = thinned.probs();
        } else {
            weights = mix.weights;
        }
    }
    std::vector<double> p(static_cast<size_t>(cutoff.dim), 0.0);
    ChannelParams no_loss(params.n_c, params.n_s, 1.0);
    for (size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] == 0.0) continue;
        auto [pk, ignored] = combined_probs(static_cast<int>(k), no_loss, cutoff.dim);
        for (int n = 0; n < cutoff.dim; ++n) p[static_cast<size_t>(n)] += weights[k] * pk[static_cast<size_t>(n)];
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    return finish_distribution({std::move(p), std::max(0.0, 1.0 - sum)},
                               "channel_output_distribution");
}

DensityOperator phase_randomized_output(const DensityOperator& probe, ChannelKind kind,
                                        double strength, int k_start) {
    require(strength >= 0.0, "phase_randomized_output: strength must be >= 0");
    require(k_start >= 8 && k_start <= 4096 && (k_start & (k_start - 1)) == 0,
            "phase_randomized_output: quadrature count must be a power of two in [8, 4096]");
    if (strength == 0.0) return probe;
    int dim = probe.dim();
    double amp = std::sqrt(strength);
    Eigen::MatrixXcd u = ((kind == ChannelKind::displacement)
                              ? displacement_matrix(amp, FockCutoff(dim))
                              : squeeze_matrix(amp, FockCutoff(dim)))
                             .cast<std::complex<double>>();

    auto [vals, vecs] = hermitian_eigen(probe.matrix());
    std::vector<std::pair<double, Eigen::VectorXcd>> components;
    for (Eigen::Index i = 0; i < vals.size(); ++i)
        if (vals[i] > 1e-14) components.emplace_back(vals[i], vecs.col(i));

    const std::complex<double> im(0.0, 1.0);
    auto add_phase_point = [&](Eigen::MatrixXcd& sum, double phi) {
        for (const auto& [weight, vec] : components) {
            Eigen::VectorXcd rotated(dim);
            for (int n = 0; n < dim; ++n)
                rotated[n] = std::exp(-im * (phi * n)) * vec[n];
            Eigen::VectorXcd pushed = u * rotated;
            for (int n = 0; n < dim; ++n) pushed[n] *= std::exp(im * (phi * n));
            sum.noalias() += weight * (pushed * pushed.adjoint());
        }
    };

    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
    int k = k_start;
    for (int j = 0; j < k; ++j) add_phase_point(sum, 2.0 * M_PI * j / k);
    Eigen::MatrixXcd avg = sum / static_cast<double>(k);
    for (;;) {
        if (2 * k > 4096)
            throw ConvergenceError(
                "phase_randomized_output: quadrature not converged at 4096 points");
        // the k-point grid is the even subset of the 2k-point grid, so only
        // the odd points are new
        for (int j = 1; j < 2 * k; j += 2) add_phase_point(sum, 2.0 * M_PI * j / (2 * k));
        k *= 2;
        Eigen::MatrixXcd refined = sum / static_cast<double>(k);
        double change = (refined - avg).cwiseAbs().maxCoeff();
        avg = std::move(refined);
        if (change < 1e-9) break;
    }
    avg = 0.5 * (avg + avg.adjoint()).eval();
    return DensityOperator(avg, probe.trace_deficit());
}

double mean_photon_added(ChannelKind kind, double strength) {
    require(strength >= 0.0, "mean_photon_added: strength must be >= 0");
    if (kind == ChannelKind::displacement) return strength;
    double sh = std::sinh(std::sqrt(strength));
    return sh * sh;
}

int cutoff_hint(const ProbeState& probe, const ChannelParams& params) {
    double mean_in = params.eta * probe_mean_photon(probe);
    double r = std::sqrt(params.n_s);
    double sh = std::sinh(r);
    double mean_out = mean_in * std::cosh(2.0 * r) + sh * sh + params.n_c;
    int top = static_cast<int>(std::ceil(std::max(probe_mean_photon(probe), mean_out)));
    return top + 10 + static_cast<int>(std::ceil(6.0 * std::sqrt(mean_out + 1.0)));
}

FockCutoff adaptive_cutoff(const ProbeState& probe, const ChannelParams& params, double tol,
                           int cap) {
    require(tol > 0.0, "adaptive_cutoff: tol must be positive");
    if (std::holds_alternative<GaussianProbeSpec>(probe))
        throw ValidationError("adaptive_cutoff: diagonal probes only");
    int dim = cutoff_hint(probe, params);
    for (;;) {
        if (dim > cap)
            throw TruncationError("adaptive_cutoff: no cutoff below " + std::to_string(cap) +
                                  " reaches truncation loss " + std::to_string(tol));
        std::vector<double> weights;
        if (const auto* f = std::get_if<FockProbe>(&probe))
            weights = lossy_fock_probe(f->m, params.eta).weights;
        else {
            const auto& mix = std::get<DiagonalMixture>(probe);
            check_mixture(mix);
            weights = params.eta < 1.0
                          ? loss_distribution(PhotonDistribution(mix.weights, 0.0), params.eta)
                                .probs()
                          : mix.weights;
        }
        double mass = 0.0;
        ChannelParams no_loss(params.n_c, params.n_s, 1.0);
        for (size_t k = 0; k < weights.size(); ++k) {
            if (weights[k] == 0.0) continue;
            auto [pk, loss_k] = combined_probs(static_cast<int>(k), no_loss, dim);
            (void)pk;
            mass += weights[k] * (1.0 - loss_k);
        }
        if (1.0 - mass < tol) return FockCutoff(dim);
        dim += std::max(16, dim / 2);
    }
}

}  // namespace fockmet
