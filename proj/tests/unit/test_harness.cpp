#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "mshom/harness.hpp"

using namespace mshom;

TEST_CASE("config parsing, canonical form and round trip") {
    const std::string text =
        "# comment line\n"
        "experiment = met\n"
        "eps = 0.4, 0.2\n"
        "n_replicates = 3   # trailing comment\n"
        "alpha = 1.5\n";
    const ExperimentConfig cfg = ExperimentConfig::parse_text(text);
    CHECK(cfg.get_string("experiment", "") == "met");
    CHECK(cfg.get_int("n_replicates", 0) == 3);
    CHECK(cfg.get_double("alpha", 0.0) == 1.5);
    const auto eps = cfg.get_list("eps", {});
    REQUIRE(eps.size() == 2);
    CHECK(eps[0] == 0.4);

    const ExperimentConfig again = ExperimentConfig::parse_text(cfg.canonical());
    CHECK(again.kv == cfg.kv);
    CHECK(again.canonical() == cfg.canonical());
}

TEST_CASE("config rejects unknown keys and malformed values") {
    CHECK_THROWS_AS(ExperimentConfig::parse_text("totally_unknown = 1\n"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse_text("alpha\n"), ConfigError);
    const ExperimentConfig bad = ExperimentConfig::parse_text("alpha = fast\n");
    CHECK_THROWS_AS(bad.get_double("alpha", 1.0), ConfigError);
}

TEST_CASE("run rejects invalid configurations") {
    ExperimentConfig cfg;
    cfg.set("experiment", std::string("nope"));
    CHECK_THROWS_AS(run(cfg), ConfigError);

    ExperimentConfig met;
    met.set("experiment", std::string("met"));
    met.set("eps", std::string("0.1, 0.2")); // increasing
    CHECK_THROWS_AS(run(met), ConfigError);

    ExperimentConfig clt;
    clt.set("experiment", std::string("clt"));
    clt.set("n_replicates", 0);
    CHECK_THROWS_AS(run(clt), ConfigError);
}

TEST_CASE("emit writes a header-only csv for an empty report") {
    ExperimentReport rep;
    rep.experiment = "met";
    rep.columns = {"eps", "T", "mse_cos"};
    const auto files = emit(rep, "csv", "harness_test_out/empty");
    std::ifstream in("harness_test_out/empty/summary.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "eps,T,mse_cos");
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("histogram emission uses 30 bins on [-4, 4]") {
    ExperimentReport rep;
    rep.experiment = "clt";
    rep.histogram_samples = {-5.0, -1.0, 0.0, 0.5, 1.0, 8.0};
    emit(rep, "dat", "harness_test_out/hist");
    std::ifstream in("harness_test_out/hist/histogram.dat");
    std::size_t rows = 0;
    double x = 0.0, count = 0.0, total = 0.0, first = 0.0, last = 0.0;
    while (in >> x >> count) {
        if (rows == 0) first = x;
        last = x;
        total += count;
        ++rows;
    }
    CHECK(rows == 30);
    CHECK(total == 6.0); // clamped samples land in the end bins
    CHECK(first == doctest::Approx(-4.0 + 8.0 / 60.0));
    CHECK(last == doctest::Approx(4.0 - 8.0 / 60.0));
}

TEST_CASE("met experiment: row contract, exactness for phi = 1, accounting") {
    ExperimentConfig cfg;
    cfg.set("experiment", std::string("met"));
    cfg.set("eps", std::string("0.4, 0.3, 0.2"));
    cfg.set("t_fixed", 0.5);
    cfg.set("n_replicates", 2);
    cfg.set("met_phi", std::string("one,cos"));
    cfg.set("workers", 2);
    const ExperimentReport rep = run(cfg);

    CHECK(rep.rows.size() == 3); // one summary row per eps
    // columns: eps T dt n ref_one mse_one ref_cos mse_cos
    for (const auto& row : rep.rows) {
        CHECK(row[4] == 1.0);
        CHECK(row[5] == 0.0); // constant test: exact zero L2 error
    }

    std::uint64_t want_steps = 0;
    for (const auto& row : rep.rows)
        want_steps += 2 * static_cast<std::uint64_t>(std::ceil(row[1] / row[2] - 1e-9));
    CHECK(rep.total_steps == want_steps);

    // config echo round-trips
    const ExperimentConfig echoed = ExperimentConfig::parse_text(rep.config_text);
    CHECK(echoed.kv == cfg.kv);
}

TEST_CASE("met reruns are byte-identical") {
    ExperimentConfig cfg;
    cfg.set("experiment", std::string("met"));
    cfg.set("eps", std::string("0.4, 0.3"));
    cfg.set("t_fixed", 0.5);
    cfg.set("n_replicates", 2);
    cfg.set("met_phi", std::string("cos"));
    cfg.set("workers", 2);
    const std::string a = run(cfg).summary_csv();
    const std::string b = run(cfg).summary_csv();
    CHECK(a == b);
    CHECK(a.find("eps,T,dt,n_replicates,ref_cos,mse_cos") == 0);
}

TEST_CASE("coeff experiment reports the cell constants and attaches tables") {
    ExperimentConfig cfg;
    cfg.set("experiment", std::string("coeff"));
    cfg.set("eps", std::string("0.4"));
    const ExperimentReport rep = run(cfg);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0][1] == doctest::Approx(0.623860360432069).epsilon(1e-8));
    CHECK(rep.passed());
    REQUIRE(rep.attachments.size() == 1);
    CHECK(rep.attachments[0].first == "tables.csv");
    CHECK(rep.attachments[0].second.rfind("x,mu,mu_eps", 0) == 0);
}

TEST_CASE("decisions cite their thresholds in the json report") {
    ExperimentConfig cfg;
    cfg.set("experiment", std::string("coeff"));
    cfg.set("eps", std::string("0.5"));
    const ExperimentReport rep = run(cfg);
    const std::string j = rep.to_json();
    CHECK(j.find("\"threshold\": 1e-08") != std::string::npos);
    CHECK(j.find("\"name\": \"cell_constant_dual_route_gap\"") != std::string::npos);
    CHECK(j.find("\"config_text\"") != std::string::npos);
}
