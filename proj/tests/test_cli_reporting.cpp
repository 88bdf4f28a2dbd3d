#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "cusplab/runner.hpp"

using namespace cusplab;

namespace {
Json glued_geometry(int n1 = 20) {
    return Json{{"kind", "glued"},
                {"ray_length", n1},
                {"fiber", {{"type", "single"}}},
                {"gluing",
                 Json::array({Json{{"a", {{"block", "funnel"}, {"index", 0}}},
                                   {"b", {{"block", "cusp"}, {"index", 0}}},
                                   {"weight", 1.0}}})}};
}
}  // namespace

TEST_CASE("config parsing fills and echoes defaults") {
    Json j;
    j["geometry"] = glued_geometry();
    j["command"] = "build";
    ExperimentConfig cfg = parse_config(j);
    REQUIRE(cfg.seed == 12345);
    REQUIRE(cfg.max_dim == 6000);
    REQUIRE(cfg.echo.at("seed") == 12345);
    REQUIRE(cfg.echo.at("output") == "out");
    REQUIRE(cfg.echo.at("perturbation").at("mu").at("family") == "none");
    REQUIRE_FALSE(cfg.has_perturbation);
}

TEST_CASE("schema violations point at the offending field") {
    Json j;
    j["geometry"] = glued_geometry();
    j["command"] = "frobnicate";
    try {
        parse_config(j);
        FAIL("expected a config error");
    } catch (const InvalidArgument& e) {
        REQUIRE(std::string(e.what()).find("command") != std::string::npos);
    }
    j["command"] = "build";
    j["geometry"]["fiber"] = {{"type", "dodecahedron"}};
    try {
        parse_config(j);
        FAIL("expected a config error");
    } catch (const InvalidArgument& e) {
        REQUIRE(std::string(e.what()).find("geometry.fiber.type") != std::string::npos);
    }
}

TEST_CASE("build command reports counts and passing invariants") {
    Json j;
    j["geometry"] = glued_geometry(15);
    j["command"] = "build";
    Report rep = run_experiment(parse_config(j));
    REQUIRE(rep.results.at("vertex_count") == 30);
    REQUIRE(rep.results.at("components") == 1);
    REQUIRE(rep.all_pass());
}

TEST_CASE("half-line commutator check passes at 1e-12") {
    Json j;
    j["geometry"] = {{"kind", "cusp"}, {"ray_length", 50}};
    j["command"] = "commutator-check";
    j["command_params"] = {{"model", "halfline"}};
    Report rep = run_experiment(parse_config(j));
    REQUIRE(rep.results.at("max_interior_deviation").get<double>() < 1e-12);
    REQUIRE(rep.all_pass());
}

TEST_CASE("out-of-band mourre window yields a failing verdict") {
    Json j;
    j["geometry"] = glued_geometry(30);
    j["command"] = "mourre-scan";
    j["command_params"] = {{"window", {5.0, 6.0}}, {"c", 0.5}};
    Report rep = run_experiment(parse_config(j));
    REQUIRE_FALSE(rep.all_pass());  // maps to exit code 2
    bool found = false;
    for (const auto& v : rep.verdicts)
        if (v.name == "window_in_band") {
            found = true;
            REQUIRE_FALSE(v.pass);
        }
    REQUIRE(found);
}

TEST_CASE("reports are reproducible apart from the timestamp") {
    Json j;
    j["geometry"] = glued_geometry(12);
    j["command"] = "spectrum";
    Report a = run_experiment(parse_config(j));
    Report b = run_experiment(parse_config(j));
    REQUIRE(a.to_json(false).dump(2) == b.to_json(false).dump(2));
}

TEST_CASE("every verdict carries its tolerance") {
    Json j;
    j["geometry"] = glued_geometry(12);
    j["command"] = "build";
    Report rep = run_experiment(parse_config(j));
    Json out = rep.to_json(false);
    REQUIRE(!out.at("verdicts").empty());
    for (const auto& v : out.at("verdicts")) {
        REQUIRE(v.contains("tolerance"));
        REQUIRE(v.contains("detail"));
    }
}

TEST_CASE("spectrum emits ascending eigenvalues with 17 significant digits") {
    Json j;
    j["geometry"] = glued_geometry(12);
    j["command"] = "spectrum";
    Report rep = run_experiment(parse_config(j));
    REQUIRE(rep.series.size() == 1);
    const CsvSeries& s = rep.series[0];
    REQUIRE(s.filename == "eigenvalues.csv");
    REQUIRE(s.columns == std::vector<std::string>{"eigenvalue"});
    double prev = -1e300;
    for (const auto& row : s.rows) {
        double v = std::stod(row[0]);
        REQUIRE(v >= prev);
        prev = v;
    }
    // round trip: 17 significant digits reproduce the double exactly
    double x = 0.1 + 0.2;
    REQUIRE(std::stod(format_float(x)) == x);
}

TEST_CASE("lap-scan emits the fixed column order and writes files") {
    Json j;
    j["geometry"] = glued_geometry(10);
    j["command"] = "lap-scan";
    j["command_params"] = {{"lambdas", {2.0}},
                           {"rhos", {0.1, 0.05}},
                           {"truncations", {200, 400, 800}}};
    j["output"] = (std::filesystem::temp_directory_path() / "cusplab_test_out").string();
    ExperimentConfig cfg = parse_config(j);
    Report rep = run_experiment(cfg);
    REQUIRE(rep.series[0].columns ==
            std::vector<std::string>{"lambda", "rho", "N1_used", "norm", "verdict"});
    std::string path = rep.write(cfg.output);
    std::ifstream csv(std::filesystem::path(cfg.output) / "lap_norms.csv");
    std::string header;
    std::getline(csv, header);
    REQUIRE(header == "lambda,rho,N1_used,norm,verdict");
    std::ifstream report_in(path);
    REQUIRE(report_in.good());
    Json back = Json::parse(report_in);
    REQUIRE(back.at("tool_version") == kToolVersion);
    REQUIRE(back.contains("timestamp"));
    std::filesystem::remove_all(cfg.output);
}

TEST_CASE("threshold-study emits counts.csv") {
    Json j;
    j["geometry"] = glued_geometry(40);
    j["command"] = "threshold-study";
    j["command_params"] = {{"window", {1.0, 3.0}}, {"truncations", {40, 60}}};
    Report rep = run_experiment(parse_config(j));
    REQUIRE(rep.series[0].filename == "counts.csv");
    REQUIRE(rep.series[0].columns ==
            std::vector<std::string>{"N1", "interior_count", "near_alpha_count",
                                     "near_beta_count"});
}

TEST_CASE("conditions-check verdicts") {
    Json j;
    j["geometry"] = {{"kind", "cusp"}, {"ray_length", 60}, {"fiber", {{"type", "cycle"}, {"p", 3}}}};
    j["command"] = "conditions-check";
    j["perturbation"] = {{"mu", {{"family", "power"}, {"amplitude", 0.5}, {"exponent", 1.0}}},
                         {"eps", {{"family", "power"}, {"amplitude", 0.3}, {"exponent", 1.0}}},
                         {"v", {{"family", "power"}, {"amplitude", 0.3}, {"exponent", 1.0}}},
                         {"eps_hat", 0.5}};
    Report rep = run_experiment(parse_config(j));
    REQUIRE(rep.all_pass());
}

TEST_CASE("invalid command params produce validation errors, not crashes") {
    Json j;
    j["geometry"] = glued_geometry(10);
    j["command"] = "mourre-scan";
    j["command_params"] = Json::object();  // missing window
    REQUIRE_THROWS_AS(run_experiment(parse_config(j)), InvalidArgument);
}
