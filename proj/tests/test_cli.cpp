#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fockmet/cli.hpp"

using namespace fockmet;
using namespace fockmet::cli;

namespace {

Scenario from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

double cell(const ResultTable& t, std::size_t row, const std::string& column) {
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        if (t.columns[c] == column) {
            const auto& v = t.rows.at(row).at(c);
            if (const double* d = std::get_if<double>(&v)) return *d;
            return static_cast<double>(std::get<long>(v));
        }
    FAIL("no column named ", column);
    return 0.0;
}

std::string csv_of(const ResultTable& t) {
    std::ostringstream out;
    t.write_csv(out);
    return out.str();
}

}  // namespace

TEST_CASE("scenario kind names round-trip") {
    for (const char* name : {"fisher-scan", "mle-sim", "loss-sim", "gaussian-compare",
                             "multiparam", "fluctuation", "moments"})
        CHECK(to_string(scenario_kind_from_string(name)) == name);
    CHECK_THROWS_AS(scenario_kind_from_string("banana"), ValidationError);
}

TEST_CASE("config parsing") {
    Scenario sc = from_text(
        "kind = mle-sim\nm = 3\nN_c = 1.0\nM = 500\ntrials = 3000\nseed = 42\n");
    CHECK(sc.kind == ScenarioKind::mle_sim);
    CHECK(sc.m_values == std::vector<int>{3});
    CHECK(sc.n_c_values == std::vector<double>{1.0});
    CHECK(sc.copies_values == std::vector<int>{500});
    CHECK(sc.trials == 3000);
    CHECK(sc.seed == 42);

    Scenario lists = from_text("kind = fisher-scan\nm = 0, 2 ,4\nN_c = 0.1,1.0\n");
    CHECK(lists.m_values == std::vector<int>{0, 2, 4});
    CHECK(lists.n_c_values == std::vector<double>{0.1, 1.0});

    Scenario commented = from_text("# a comment\nkind = moments # trailing\nm = 1\n");
    CHECK(commented.kind == ScenarioKind::moments);

    CHECK_THROWS_WITH_AS(from_text("m = -1\nkind = mle-sim\n"),
                         doctest::Contains("'m'"), ValidationError);
    CHECK_THROWS_WITH_AS(from_text(""), doctest::Contains("kind"), ValidationError);
    CHECK_THROWS_WITH_AS(from_text("kind = mle-sim\nbogus = 1\n"),
                         doctest::Contains("line 2"), ValidationError);
    CHECK_THROWS_WITH_AS(from_text("kind = mle-sim\nN_c = abc\n"),
                         doctest::Contains("'N_c'"), ValidationError);
    CHECK_THROWS_WITH_AS(from_text("kind = mle-sim\njust words\n"),
                         doctest::Contains("key = value"), ValidationError);
    CHECK_THROWS_AS(from_text("kind = mle-sim\neta = 1.2\n"), ValidationError);
    CHECK_THROWS_AS(from_text("kind = mle-sim\ntrials = 1\n"), ValidationError);
}

TEST_CASE("preset catalogue") {
    CHECK(preset_names().size() == 14);
    for (const auto& name : preset_names()) {
        Scenario sc = preset(name);
        CHECK(sc.name == name);
    }
    CHECK(preset("fig1a").trials == 3000);
    CHECK(preset("fig1a").copies_values.front() == 50);
    CHECK(preset("fig1a").copies_values.back() == 5000);
    CHECK_THROWS_WITH_AS(preset("nosuch"), doctest::Contains("fig1a"), ValidationError);
}

TEST_CASE("fisher scan tabulates numeric against closed form") {
    Scenario sc = from_text("kind = fisher-scan\nm = 0,3\nN_c = 0.5\n");
    ResultTable t = run(sc);
    REQUIRE(t.rows.size() == 2);
    CHECK(cell(t, 0, "exact_info") == doctest::Approx(2.0));
    CHECK(cell(t, 1, "exact_info") == doctest::Approx(14.0));
    CHECK(cell(t, 0, "rel_dev") < 1e-3);
    CHECK(cell(t, 1, "rel_dev") < 1e-3);

    Scenario lossy = from_text("kind = fisher-scan\nm = 2\nN_c = 0.5\neta = 0.8\n");
    ResultTable lt = run(lossy);
    CHECK(cell(lt, 0, "fisher_info") < 10.0);  // below the lossless value
    CHECK(std::isnan(cell(lt, 0, "exact_info")));

    CHECK_THROWS_AS(run(from_text("kind = fisher-scan\nm = 1\n")), ValidationError);
    CHECK_THROWS_AS(
        run(from_text("kind = fisher-scan\nm = 1\nN_c = 1\nN_s = 0.1\n")),
        ValidationError);
}

TEST_CASE("small cutoff override reports truncation") {
    Scenario sc = from_text("kind = moments\nm = 3\nN_c = 1.0\ncutoff_override = 5\n");
    CHECK_THROWS_AS(run(sc), TruncationError);
}

TEST_CASE("mle simulation saturates the variance bound") {
    Scenario sc = from_text(
        "kind = mle-sim\nm = 3\nN_c = 1.0\nM = 500\ntrials = 400\nseed = 7\n");
    ResultTable t = run(sc);
    REQUIRE(t.rows.size() == 1);
    double mse = cell(t, 0, "mse");
    double bound = cell(t, 0, "cr_bound");
    double se = 0.5 * cell(t, 0, "stderr_bar");
    CHECK(bound == doctest::Approx(1.0 / (500.0 * 7.0)));
    CHECK(std::abs(mse - bound) < 3.0 * se);

    CHECK_THROWS_WITH_AS(
        run(from_text("kind = mle-sim\nm = 3\nN_c = 1\neta = 0.9\ntrials = 10\n")),
        doctest::Contains("loss-sim"), ValidationError);
}

TEST_CASE("loss simulation uses the lossy information bound") {
    Scenario sc = from_text(
        "kind = loss-sim\nm = 2\nN_c = 1.0\neta = 0.8\nM = 300\ntrials = 400\nseed = 9\n");
    ResultTable t = run(sc);
    double bound = cell(t, 0, "cr_bound");
    CHECK(bound > 1.0 / (300.0 * 5.0));  // worse than the lossless bound
    double se = 0.5 * cell(t, 0, "stderr_bar");
    CHECK(std::abs(cell(t, 0, "mse") - bound) < 3.0 * se);
}

TEST_CASE("multiparameter table carries bounds and coupling") {
    Scenario sc = from_text("kind = multiparam\nm = 1,3\nN_c = 0.01\nN_s = 0.01\nM = 500\n");
    ResultTable t = run(sc);
    REQUIRE(t.rows.size() == 2);
    for (std::size_t r = 0; r < 2; ++r) {
        CHECK(cell(t, r, "offdiag_ratio") < 1e-3);
        CHECK(cell(t, r, "bound_Nc") >= cell(t, r, "single_param_bound_Nc"));
        CHECK(cell(t, r, "bound_Ns") >= cell(t, r, "single_param_bound_Ns"));
    }
    CHECK(cell(t, 0, "single_param_bound_Nc") ==
          doctest::Approx(0.01 / (500.0 * 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(run(from_text("kind = multiparam\nm = 1\nN_c = 0.01\n")),
                    ValidationError);
}

TEST_CASE("fluctuation table reports the excess error") {
    Scenario sc = from_text(
        "kind = fluctuation\nm = 3\nN_c = 1.0\nsigma = 0.0316227766\nM = 500\n"
        "trials = 300\nseed = 21\n");
    ResultTable t = run(sc);
    double excess = cell(t, 0, "excess");
    double se = 0.5 * cell(t, 0, "stderr_bar");
    CHECK(std::abs(excess - 1e-3) < 4.0 * se);
    CHECK_THROWS_WITH_AS(run(from_text("kind = fluctuation\nm = 3\nN_c = 1\n")),
                         doctest::Contains("sigma"), ValidationError);
}

TEST_CASE("moments table matches the closed forms") {
    Scenario sc = from_text("kind = moments\nm = 3\nN_c = 1.0\n");
    ResultTable t = run(sc);
    CHECK(cell(t, 0, "mean_photons") == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(cell(t, 0, "variance") == doctest::Approx(7.0).epsilon(1e-8));
    CHECK(cell(t, 0, "snr") == doctest::Approx(std::sqrt(1.0 / 8.0)).epsilon(1e-12));
    CHECK(cell(t, 0, "sensitivity_first") == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("gaussian comparison table") {
    Scenario sc = from_text("kind = gaussian-compare\nm = 0,1\nN_c = 0.5\n");
    ResultTable t = run(sc);
    REQUIRE(t.rows.size() == 2);
    CHECK(cell(t, 0, "fock_fi") == doctest::Approx(2.0));
    CHECK(cell(t, 0, "vacuum_qfi") == doctest::Approx(2.0).epsilon(0.01));
    CHECK(cell(t, 1, "fock_fi") == doctest::Approx(6.0));
    CHECK(cell(t, 1, "squeezed_qfi") < 6.0);
    CHECK(cell(t, 1, "squeezed_qfi") > cell(t, 1, "coherent_qfi"));
}

TEST_CASE("csv output is byte-stable and carries metadata") {
    Scenario sc = from_text("kind = moments\nm = 0,2\nN_c = 0.5,1.5\nname = demo\n");
    ResultTable t1 = run(sc);
    ResultTable t2 = run(sc);
    std::string a = csv_of(t1), b = csv_of(t2);
    CHECK(a == b);
    CHECK(a.find("# scenario: demo") != std::string::npos);
    CHECK(a.find("# kind: moments") != std::string::npos);
    CHECK(a.find("# version: ") != std::string::npos);
    CHECK(a.find("# seed: 42") != std::string::npos);
    CHECK(a.find("m,N_c,") != std::string::npos);
    CHECK(t1.rows.size() == 4);
}

TEST_CASE("command line entry point") {
    auto run_cli = [](std::vector<std::string> args) {
        std::vector<char*> argv;
        args.insert(args.begin(), "fock_metrology");
        for (auto& a : args) argv.push_back(a.data());
        return main_entry(static_cast<int>(argv.size()), argv.data());
    };
    const char* cfg_path = "cli_test_scenario.txt";
    {
        std::ofstream cfg(cfg_path);
        cfg << "kind = moments\nm = 1\nN_c = 0.5\n";
    }
    CHECK(run_cli({"run", "--config", cfg_path, "--out", "cli_test_out.csv"}) == 0);
    {
        std::ifstream in("cli_test_out.csv");
        std::stringstream body;
        body << in.rdbuf();
        CHECK(body.str().find("mean_photons") != std::string::npos);
    }
    CHECK(run_cli({"run", "--preset", "nosuch", "--out", "cli_test_out.csv"}) == 2);
    CHECK(run_cli({"run", "--config", "no_such_file.txt", "--out", "o.csv"}) == 2);
    CHECK(run_cli({"run", "--out", "o.csv"}) == 2);
    CHECK(run_cli({"run", "--config", cfg_path}) == 2);  // --out missing
    {
        std::ofstream cfg(cfg_path);
        cfg << "kind = moments\nm = 3\nN_c = 1.0\ncutoff_override = 5\n";
    }
    CHECK(run_cli({"run", "--config", cfg_path, "--out", "cli_test_out.csv"}) == 3);
    std::remove(cfg_path);
    std::remove("cli_test_out.csv");
    std::remove("o.csv");
}
