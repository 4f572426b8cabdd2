#include "fockmet/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <tuple>

#include "CLI11.hpp"
#include "fockmet/channels.hpp"
#include "fockmet/fisher.hpp"
#include "fockmet/gaussian.hpp"
#include "fockmet/mle.hpp"

namespace fockmet::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

const std::map<std::string, ScenarioKind>& kind_names() {
    static const std::map<std::string, ScenarioKind> names{
        {"fisher-scan", ScenarioKind::fisher_scan},
        {"mle-sim", ScenarioKind::mle_sim},
        {"loss-sim", ScenarioKind::loss_sim},
        {"gaussian-compare", ScenarioKind::gaussian_compare},
        {"multiparam", ScenarioKind::multiparam},
        {"fluctuation", ScenarioKind::fluctuation},
        {"moments", ScenarioKind::moments},
    };
    return names;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& token, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(token, &pos);
        if (trim(token.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("line " + std::to_string(line) + ": cannot parse value '" +
                          token + "' for key '" + key + "'");
}

std::vector<double> parse_list(const std::string& value, const std::string& key, int line) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string token;
    while (std::getline(ss, token, ',')) out.push_back(parse_number(token, key, line));
    if (out.empty())
        throw ValidationError("line " + std::to_string(line) + ": empty value for key '" +
                              key + "'");
    return out;
}

std::vector<int> parse_int_list(const std::string& value, const std::string& key, int line,
                                int lo) {
    std::vector<int> out;
    for (double v : parse_list(value, key, line)) {
        if (v != std::floor(v) || v < lo)
            throw ValidationError("key '" + key + "' must be an integer >= " +
                                  std::to_string(lo) + ", got " + trim(value));
        out.push_back(static_cast<int>(v));
    }
    return out;
}

uint64_t mix_seed(uint64_t base, uint64_t cell) {
    uint64_t z = base + (cell + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string format_list(const std::vector<double>& v) {
    std::string s;
    char buf[40];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", v[i]);
        if (i) s += ",";
        s += buf;
    }
    return s;
}

std::string format_list(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

// Which single channel parameter a cell exercises.
enum class Active { displacement, squeezing };

Active single_active(double n_c, double n_s, const std::string& kind) {
    if ((n_c > 0.0) == (n_s > 0.0))
        throw ValidationError(kind + ": exactly one of N_c and N_s must be positive "
                              "per grid cell");
    return n_c > 0.0 ? Active::displacement : Active::squeezing;
}

double exact_fi(Active which, int m, double strength) {
    return which == Active::displacement ? fi_displacement_exact(m, strength)
                                         : fi_squeezing_exact(m, strength);
}

std::optional<Prior> make_prior(const Scenario& sc) {
    if (sc.prior_lo.has_value() != sc.prior_hi.has_value())
        throw ValidationError("prior_lo and prior_hi must be given together");
    if (!sc.prior_lo) return std::nullopt;
    return Prior(*sc.prior_lo, *sc.prior_hi);
}

void run_fisher_scan(const Scenario& sc, ResultTable& t, double& max_loss) {
    t.columns = {"m", "N_c", "N_s", "eta", "fisher_info", "exact_info", "rel_dev"};
    for (int m : sc.m_values)
        for (double nc : sc.n_c_values)
            for (double ns : sc.n_s_values)
                for (double eta : sc.eta_values) {
                    Active which = single_active(nc, ns, "fisher-scan");
                    double strength = which == Active::displacement ? nc : ns;
                    double fi;
                    if (sc.cutoff_override) {
                        FockCutoff cut(*sc.cutoff_override);
                        ProbeState probe = eta < 1.0
                                               ? ProbeState(lossy_fock_probe(m, eta))
                                               : ProbeState(FockProbe{m});
                        auto family = [&, cut](double th) {
                            ChannelParams p = which == Active::displacement
                                                  ? ChannelParams(th, 0.0)
                                                  : ChannelParams(0.0, th);
                            PhotonDistribution d =
                                channel_output_distribution(probe, p, cut);
                            max_loss = std::max(max_loss, d.truncation_loss());
                            return d;
                        };
                        fi = classical_fi(family, strength, fd_step(strength));
                    } else {
                        fi = which == Active::displacement
                                 ? fi_displacement_numeric(m, nc, eta)
                                 : fi_squeezing_numeric(m, ns, eta);
                    }
                    double exact = eta == 1.0 ? exact_fi(which, m, strength)
                                              : std::nan("");
                    double dev = eta == 1.0 ? std::abs(fi - exact) / exact : std::nan("");
                    t.rows.push_back({static_cast<long>(m), nc, ns, eta, fi, exact, dev});
                }
}

void run_mle_sim(const Scenario& sc, ResultTable& t) {
    if (sc.kind == ScenarioKind::mle_sim)
        for (double eta : sc.eta_values)
            if (eta != 1.0)
                throw ValidationError("mle-sim models a lossless channel; use loss-sim "
                                      "for eta < 1");
    t.columns = {"m",      "N_c",        "N_s",  "eta",      "M",
                 "trials", "mse",        "stderr_bar", "bias", "cr_bound"};
    std::map<std::tuple<int, double, double, double>, double> fi_cache;
    uint64_t cell = 0;
    for (int m : sc.m_values)
        for (double nc : sc.n_c_values)
            for (double ns : sc.n_s_values)
                for (double eta : sc.eta_values)
                    for (int copies : sc.copies_values) {
                        Active which = single_active(nc, ns, to_string(sc.kind));
                        double strength = which == Active::displacement ? nc : ns;
                        auto key = std::make_tuple(m, nc, ns, eta);
                        auto it = fi_cache.find(key);
                        if (it == fi_cache.end()) {
                            double fi = eta == 1.0
                                            ? exact_fi(which, m, strength)
                                            : (which == Active::displacement
                                                   ? fi_displacement_numeric(m, nc, eta)
                                                   : fi_squeezing_numeric(m, ns, eta));
                            it = fi_cache.emplace(key, fi).first;
                        }
                        SimScenario sim;
                        sim.m = m;
                        sim.params = ChannelParams(nc, ns, eta);
                        sim.copies = copies;
                        sim.trials = sc.trials;
                        sim.seed = mix_seed(sc.seed, cell++);
                        sim.prior_c = which == Active::displacement ? make_prior(sc)
                                                                    : std::nullopt;
                        sim.prior_s = which == Active::squeezing ? make_prior(sc)
                                                                 : std::nullopt;
                        ErrorStats st = monte_carlo_error(sim);
                        double bound = 1.0 / (it->second * copies);
                        t.rows.push_back({static_cast<long>(m), nc, ns, eta,
                                          static_cast<long>(copies),
                                          static_cast<long>(sc.trials), st.mse,
                                          st.stderr_bar, st.bias, bound});
                    }
}

void run_gaussian_compare(const Scenario& sc, ResultTable& t) {
    bool match_energy = sc.name.rfind("fig5", 0) == 0;
    if (match_energy) {
        GaussianFamily family = sc.name == "fig5b" ? GaussianFamily::coherent
                                                   : GaussianFamily::squeezed;
        t.columns = {"m", "N_c", "N_s", "target_fi", "mean_photon"};
        for (int m : sc.m_values)
            for (double nc : sc.n_c_values)
                for (double ns : sc.n_s_values) {
                    Active which = single_active(nc, ns, "gaussian-compare");
                    double strength = which == Active::displacement ? nc : ns;
                    ChannelKind kind = which == Active::displacement
                                           ? ChannelKind::displacement
                                           : ChannelKind::squeezing;
                    double target = exact_fi(which, m, strength);
                    double nbar = equivalent_energy(family, kind, strength, target);
                    t.rows.push_back({static_cast<long>(m), nc, ns, target, nbar});
                }
        return;
    }
    t.columns = {"m",           "N_c",          "N_s",       "fock_fi",
                 "squeezed_qfi", "coherent_qfi", "vacuum_qfi"};
    std::map<std::pair<int, double>, double> vac_cache;
    for (int m : sc.m_values)
        for (double nc : sc.n_c_values)
            for (double ns : sc.n_s_values) {
                Active which = single_active(nc, ns, "gaussian-compare");
                double strength = which == Active::displacement ? nc : ns;
                ChannelKind kind = which == Active::displacement
                                       ? ChannelKind::displacement
                                       : ChannelKind::squeezing;
                double fock = exact_fi(which, m, strength);
                double nbar = static_cast<double>(m);
                double sq = qfi_gaussian(
                    gaussian_probe_with_energy(GaussianFamily::squeezed, nbar), kind,
                    strength);
                double coh = qfi_gaussian(
                    gaussian_probe_with_energy(GaussianFamily::coherent, nbar), kind,
                    strength);
                auto key = std::make_pair(static_cast<int>(kind), strength);
                auto it = vac_cache.find(key);
                if (it == vac_cache.end())
                    it = vac_cache
                             .emplace(key, qfi_gaussian(GaussianProbeSpec{0.0, 0.0},
                                                        kind, strength))
                             .first;
                t.rows.push_back({static_cast<long>(m), nc, ns, fock, sq, coh,
                                  it->second});
            }
}

void run_multiparam(const Scenario& sc, ResultTable& t) {
    t.columns = {"m",        "N_c",      "N_s",
                 "M",        "bound_Nc", "bound_Ns",
                 "single_param_bound_Nc", "single_param_bound_Ns", "offdiag_ratio"};
    for (int m : sc.m_values)
        for (double nc : sc.n_c_values)
            for (double ns : sc.n_s_values)
                for (int copies : sc.copies_values) {
                    if (nc <= 0.0 || ns <= 0.0)
                        throw ValidationError("multiparam: N_c and N_s must both be "
                                              "positive");
                    FisherMatrix h = fisher_matrix(m, nc, ns);
                    auto [bc, bs] = multiparam_bounds(h, copies);
                    double sc_bound = 1.0 / (fi_displacement_exact(m, nc) * copies);
                    double ss_bound = 1.0 / (fi_squeezing_exact(m, ns) * copies);
                    t.rows.push_back({static_cast<long>(m), nc, ns,
                                      static_cast<long>(copies), bc, bs, sc_bound,
                                      ss_bound, h.coupling_ratio()});
                }
}

void run_fluctuation(const Scenario& sc, ResultTable& t) {
    if (sc.sigma_values.empty())
        throw ValidationError("fluctuation: sigma is required");
    t.columns = {"m",      "N_c",    "N_s",        "sigma", "M",
                 "trials", "excess", "stderr_bar", "mse"};
    uint64_t cell = 0;
    for (int m : sc.m_values)
        for (double nc : sc.n_c_values)
            for (double ns : sc.n_s_values)
                for (int copies : sc.copies_values)
                    for (double sigma : sc.sigma_values) {
                        Active which = single_active(nc, ns, "fluctuation");
                        double mean = which == Active::displacement ? nc : ns;
                        SimScenario sim;
                        sim.m = m;
                        sim.params = ChannelParams(nc, ns, 1.0);
                        sim.copies = copies;
                        sim.trials = sc.trials;
                        sim.seed = mix_seed(sc.seed, cell++);
                        FluctuationResult r = fluctuation_study(mean, sigma, sim);
                        t.rows.push_back({static_cast<long>(m), nc, ns, sigma,
                                          static_cast<long>(copies),
                                          static_cast<long>(sc.trials), r.excess,
                                          r.stderr_bar, r.mse});
                    }
}

void run_moments(const Scenario& sc, ResultTable& t, double& max_loss) {
    t.columns = {"m",   "N_c",               "mean_photons",       "variance",
                 "snr", "sensitivity_first", "sensitivity_second"};
    for (int m : sc.m_values)
        for (double nc : sc.n_c_values) {
            if (nc <= 0.0) throw ValidationError("moments: N_c must be positive");
            ChannelParams p(nc, 0.0);
            FockCutoff cut = sc.cutoff_override
                                 ? FockCutoff(*sc.cutoff_override)
                                 : adaptive_cutoff(FockProbe{m}, p);
            PhotonDistribution d = displacement_distribution(m, nc, cut);
            max_loss = std::max(max_loss, d.truncation_loss());
            double mean = d.mean();
            double var = d.moment(2) - mean * mean;
            t.rows.push_back({static_cast<long>(m), nc, mean, var,
                              snr_displacement(m, nc),
                              linearized_sensitivity(m, nc, MomentKind::first),
                              linearized_sensitivity(m, nc, MomentKind::second)});
        }
}

}  // namespace

ScenarioKind scenario_kind_from_string(const std::string& s) {
    auto it = kind_names().find(s);
    if (it != kind_names().end()) return it->second;
    std::string known;
    for (const auto& [name, _] : kind_names()) known += (known.empty() ? "" : ", ") + name;
    throw ValidationError("unknown kind '" + s + "'; expected one of: " + known);
}

std::string to_string(ScenarioKind kind) {
    for (const auto& [name, k] : kind_names())
        if (k == kind) return name;
    return "?";
}

void ResultTable::write_csv(std::ostream& out) const {
    for (const auto& line : metadata) out << "# " << line << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << "\n";
    char buf[40];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            if (const double* d = std::get_if<double>(&row[i])) {
                std::snprintf(buf, sizeof buf, "%.9g", *d);
                out << buf;
            } else if (const long* l = std::get_if<long>(&row[i])) {
                out << *l;
            } else {
                out << std::get<std::string>(row[i]);
            }
        }
        out << "\n";
    }
}

Scenario parse_config(std::istream& in) {
    Scenario sc;
    sc.name = "custom";
    bool have_kind = false;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string text = raw.substr(0, raw.find('#'));
        text = trim(text);
        if (text.empty()) continue;
        std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw ValidationError("line " + std::to_string(line) +
                                  ": expected 'key = value'");
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));
        if (key == "kind") {
            sc.kind = scenario_kind_from_string(value);
            have_kind = true;
        } else if (key == "name") {
            sc.name = value;
        } else if (key == "m") {
            sc.m_values = parse_int_list(value, key, line, 0);
        } else if (key == "N_c") {
            sc.n_c_values = parse_list(value, key, line);
            for (double v : sc.n_c_values)
                if (v < 0.0) throw ValidationError("N_c must be >= 0");
        } else if (key == "N_s") {
            sc.n_s_values = parse_list(value, key, line);
            for (double v : sc.n_s_values)
                if (v < 0.0) throw ValidationError("N_s must be >= 0");
        } else if (key == "eta") {
            sc.eta_values = parse_list(value, key, line);
            for (double v : sc.eta_values)
                if (v <= 0.0 || v > 1.0)
                    throw ValidationError("eta must be in (0, 1]");
        } else if (key == "M") {
            sc.copies_values = parse_int_list(value, key, line, 1);
        } else if (key == "trials") {
            sc.trials = parse_int_list(value, key, line, 2).at(0);
        } else if (key == "seed") {
            try {
                sc.seed = std::stoull(trim(value));
            } catch (const std::exception&) {
                throw ValidationError("line " + std::to_string(line) +
                                      ": cannot parse value '" + value +
                                      "' for key 'seed'");
            }
        } else if (key == "prior_lo") {
            sc.prior_lo = parse_number(value, key, line);
        } else if (key == "prior_hi") {
            sc.prior_hi = parse_number(value, key, line);
        } else if (key == "sigma") {
            sc.sigma_values = parse_list(value, key, line);
            for (double v : sc.sigma_values)
                if (v < 0.0) throw ValidationError("sigma must be >= 0");
        } else if (key == "cutoff_override") {
            sc.cutoff_override = parse_int_list(value, key, line, 1).at(0);
        } else {
            throw ValidationError("line " + std::to_string(line) + ": unknown key '" +
                                  key + "'");
        }
    }
    if (!have_kind) throw ValidationError("config: 'kind' is required");
    return sc;
}

Scenario parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::vector<std::string> preset_names() {
    return {"fig1a", "fig1b", "fig2",  "fig3a", "fig3b", "fig4a", "fig4b",
            "fig5a", "fig5b", "fig6a", "fig6b", "fig7a", "fig7b", "flucC"};
}

Scenario preset(const std::string& name) {
    Scenario sc;
    sc.name = name;
    if (name == "fig1a") {
        sc.kind = ScenarioKind::mle_sim;
        sc.m_values = {3};
        sc.n_c_values = {0.1, 1.0, 2.0};
        sc.copies_values = {50, 100, 200, 500, 1000, 2000, 5000};
        sc.trials = 3000;
        sc.seed = 42;
    } else if (name == "fig1b") {
        sc.kind = ScenarioKind::mle_sim;
        sc.m_values = {0, 1, 2, 3, 4};
        sc.n_c_values = {0.1, 0.2, 0.5, 1.0, 2.0};
        sc.copies_values = {500};
        sc.trials = 3000;
        sc.seed = 43;
    } else if (name == "fig2") {
        sc.kind = ScenarioKind::gaussian_compare;
        sc.m_values = {1, 2, 3, 4, 5, 6};
        sc.n_c_values = {0.1, 0.3, 0.5, 1.0, 2.0};
        sc.seed = 44;
    } else if (name == "fig3a") {
        sc.kind = ScenarioKind::loss_sim;
        sc.m_values = {3};
        sc.n_c_values = {1.0};
        sc.eta_values = {1.0, 0.9, 0.7};
        sc.copies_values = {100, 200, 500, 1000, 2000};
        sc.trials = 1000;
        sc.seed = 45;
    } else if (name == "fig3b") {
        sc.kind = ScenarioKind::loss_sim;
        sc.m_values = {3};
        sc.n_c_values = {0.1, 1.0, 2.0};
        sc.eta_values = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0};
        sc.copies_values = {500};
        sc.trials = 1000;
        sc.seed = 46;
    } else if (name == "fig4a") {
        sc.kind = ScenarioKind::mle_sim;
        sc.m_values = {3};
        sc.n_s_values = {0.1, 0.3, 0.5};
        sc.n_c_values = {0.0};
        sc.copies_values = {100, 200, 500, 1000, 2000};
        sc.trials = 3000;
        sc.seed = 47;
    } else if (name == "fig4b") {
        sc.kind = ScenarioKind::mle_sim;
        sc.m_values = {0, 1, 2, 3, 4};
        sc.n_s_values = {0.05, 0.1, 0.2, 0.3, 0.5};
        sc.n_c_values = {0.0};
        sc.copies_values = {500};
        sc.trials = 3000;
        sc.seed = 48;
    } else if (name == "fig5a" || name == "fig5b") {
        sc.kind = ScenarioKind::gaussian_compare;
        sc.m_values = {0, 1, 2, 3, 4};
        sc.n_s_values = {0.1};
        sc.n_c_values = {0.0};
        sc.seed = name == "fig5a" ? 49 : 50;
    } else if (name == "fig6a") {
        sc.kind = ScenarioKind::loss_sim;
        sc.m_values = {3};
        sc.n_s_values = {0.25};
        sc.n_c_values = {0.0};
        sc.eta_values = {1.0, 0.9, 0.7};
        sc.copies_values = {100, 200, 500, 1000, 2000};
        sc.trials = 1000;
        sc.seed = 51;
    } else if (name == "fig6b") {
        sc.kind = ScenarioKind::loss_sim;
        sc.m_values = {3};
        sc.n_s_values = {0.25};
        sc.n_c_values = {0.0};
        sc.eta_values = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0};
        sc.copies_values = {500};
        sc.trials = 1000;
        sc.seed = 52;
    } else if (name == "fig7a" || name == "fig7b") {
        sc.kind = ScenarioKind::multiparam;
        sc.m_values = {0, 1, 2, 3, 4, 5};
        double s = name == "fig7a" ? 0.01 : 0.05;
        sc.n_c_values = {s};
        sc.n_s_values = {s};
        sc.copies_values = {500};
        sc.seed = name == "fig7a" ? 53 : 54;
    } else if (name == "flucC") {
        sc.kind = ScenarioKind::fluctuation;
        sc.m_values = {3};
        sc.n_c_values = {1.0};
        sc.n_s_values = {0.0};
        sc.copies_values = {500};
        sc.trials = 1000;
        sc.sigma_values = {0.01, 0.0316227766016838, 0.1, 0.5};
        sc.seed = 55;
    } else {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ValidationError("unknown preset '" + name + "'; available presets: " +
                              known);
    }
    return sc;
}

ResultTable run(const Scenario& sc) {
    ResultTable t;
    double max_loss = 0.0;
    switch (sc.kind) {
        case ScenarioKind::fisher_scan:
            run_fisher_scan(sc, t, max_loss);
            break;
        case ScenarioKind::mle_sim:
        case ScenarioKind::loss_sim:
            run_mle_sim(sc, t);
            break;
        case ScenarioKind::gaussian_compare:
            run_gaussian_compare(sc, t);
            break;
        case ScenarioKind::multiparam:
            run_multiparam(sc, t);
            break;
        case ScenarioKind::fluctuation:
            run_fluctuation(sc, t);
            break;
        case ScenarioKind::moments:
            run_moments(sc, t, max_loss);
            break;
    }
    char buf[48];
    t.metadata.push_back("scenario: " + sc.name);
    t.metadata.push_back("kind: " + to_string(sc.kind));
    t.metadata.push_back("version: " + std::string(kVersion));
    t.metadata.push_back("seed: " + std::to_string(sc.seed));
    t.metadata.push_back("trials: " + std::to_string(sc.trials));
    t.metadata.push_back("grid: m=[" + format_list(sc.m_values) + "] N_c=[" +
                         format_list(sc.n_c_values) + "] N_s=[" +
                         format_list(sc.n_s_values) + "] eta=[" +
                         format_list(sc.eta_values) + "] M=[" +
                         format_list(sc.copies_values) + "] sigma=[" +
                         format_list(sc.sigma_values) + "]");
    std::snprintf(buf, sizeof buf, "truncation_loss_max: %.3g", max_loss);
    t.metadata.push_back(buf);
    return t;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Fock-probe channel-strength estimation toolkit"};
    app.require_subcommand(1);
    auto* cmd = app.add_subcommand("run", "Execute a preset or config scenario, write CSV");
    std::string preset_name, config_path, out_path;
    uint64_t seed = 0;
    int trials = 0;
    auto* opt_preset = cmd->add_option("--preset", preset_name, "Preset scenario name");
    auto* opt_config =
        cmd->add_option("--config", config_path, "Path to a key = value scenario file");
    cmd->add_option("--out", out_path, "Output CSV path")->required();
    auto* opt_seed = cmd->add_option("--seed", seed, "Override the scenario seed");
    auto* opt_trials =
        cmd->add_option("--trials", trials, "Override the scenario trial count");
    opt_preset->excludes(opt_config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (opt_preset->count() == 0 && opt_config->count() == 0)
            throw ValidationError("one of --preset or --config is required");
        Scenario sc = opt_preset->count() ? preset(preset_name)
                                          : parse_config_file(config_path);
        if (opt_seed->count()) sc.seed = seed;
        if (opt_trials->count()) {
            if (trials < 2) throw ValidationError("trials must be >= 2");
            sc.trials = trials;
        }
        ResultTable table = run(sc);
        std::ofstream out(out_path);
        if (!out) throw ValidationError("cannot open output file '" + out_path + "'");
        table.write_csv(out);
        std::cout << "wrote " << table.rows.size() << " rows to " << out_path << "\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TruncationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace fockmet::cli
