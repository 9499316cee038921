#include <catch2/catch_amalgamated.hpp>

#include "bsctrl/analyze.hpp"
#include "bsctrl/io.hpp"
#include "bsctrl/report.hpp"
#include "support/schema_check.hpp"

#include <fstream>
#include <string>

using namespace bsctrl;

#ifndef BSCTRL_SOURCE_DIR
#define BSCTRL_SOURCE_DIR "."
#endif

namespace {

const std::string kData = std::string(BSCTRL_SOURCE_DIR) + "/data/";
const std::string kDocs = std::string(BSCTRL_SOURCE_DIR) + "/docs/";

nlohmann::json load_schema() {
    std::ifstream in(kDocs + "report_schema.json");
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

void expect_valid(const JsonValue& report) {
    static const nlohmann::json schema = load_schema();
    const nlohmann::json parsed = nlohmann::json::parse(report.dump());
    const auto err = schema_check::validate_report(schema, parsed);
    INFO((err ? *err : std::string("ok")));
    CHECK_FALSE(err.has_value());
}

}  // namespace

TEST_CASE("system files load and carry labels", "[io]") {
    const SystemFile file = load_system_file(kData + "benchmark3.json");
    CHECK(file.system.n() == 3);
    CHECK(file.system.m() == 1);
    CHECK(file.label == "3-state sharpness benchmark");
    CHECK(file.system.A(0, 1) == -1.0);
}

TEST_CASE("parse diagnostics name the offending field", "[io][errors]") {
    CHECK_THROWS_WITH(parse_system_json("{"),
                      Catch::Matchers::ContainsSubstring("parse error"));
    CHECK_THROWS_WITH(parse_system_json(R"({"n":2,"m":1,"A":[[0,0],[0,0]],"B":[[1]],"C":[[0,0],[0,0]]})"),
                      Catch::Matchers::ContainsSubstring("field 'B'"));
    CHECK_THROWS_WITH(parse_system_json(R"({"n":1,"m":1,"A":[["x"]],"B":[[1]],"C":[[0]]})"),
                      Catch::Matchers::ContainsSubstring("row 0"));
    CHECK_THROWS_WITH(parse_system_json(R"({"m":1,"A":[[0]],"B":[[1]],"C":[[0]]})"),
                      Catch::Matchers::ContainsSubstring("missing required field 'n'"));
    CHECK_THROWS_AS(load_system_file(kData + "malformed.json"), InputError);
    CHECK_THROWS_AS(load_system_file(kData + "does_not_exist.json"), InputError);
}

TEST_CASE("benchmark analysis is consistent across all routes", "[analyze]") {
    const SystemFile file = load_system_file(kData + "benchmark3.json");
    const AnalysisReport r = run_analysis(file.system, {}, file.label);
    CHECK(r.kalman);
    CHECK(r.gramian_pd);
    CHECK(r.hautus_controllable == Tristate::yes);
    CHECK(r.hautus_stabilizable == Tristate::yes);
    CHECK(r.riccati_stabilizable == Tristate::yes);
    CHECK(r.decomposition_k == 3);
    CHECK(r.cross_check == CrossCheck::consistent);
}

TEST_CASE("scalar input-free system is consistently negative", "[analyze]") {
    const SystemFile file = load_system_file(kData + "scalar_drift_only.json");
    const AnalysisReport r = run_analysis(file.system, {}, file.label);
    CHECK_FALSE(r.kalman);
    CHECK_FALSE(r.gramian_pd);
    CHECK(r.hautus_controllable == Tristate::no);
    CHECK(r.hautus_stabilizable == Tristate::no);
    CHECK(r.riccati_stabilizable == Tristate::no);
    CHECK(r.cross_check == CrossCheck::consistent);
}

TEST_CASE("every report shape validates against the shipped schema", "[report][schema]") {
    const SystemFile bench = load_system_file(kData + "benchmark3.json");
    const SystemFile chain = load_system_file(kData + "chain2.json");
    const SystemFile scalar = load_system_file(kData + "scalar_drift_only.json");

    const AnalysisReport analysis = run_analysis(bench.system, {}, bench.label);
    expect_valid(report_analysis(analysis));
    expect_valid(report_analysis(run_analysis(scalar.system, {}, scalar.label)));

    const GramianResult g = gramian(bench.system, 1.0);
    expect_valid(report_gramian(bench.label, 3, 1, g, is_gramian_pd(g)));

    expect_valid(report_decompose(chain.label, 2, 1,
                                  controllability_decomposition(chain.system)));
    expect_valid(report_decompose(bench.label, 3, 1,
                                  controllability_decomposition(bench.system)));

    expect_valid(report_hautus(chain.label, 2, 1, hautus_controllability(chain.system)));
    expect_valid(report_hautus(bench.label, 3, 1, hautus_stabilizability(bench.system)));

    expect_valid(report_stabilize(bench.label, 3, 1, stabilize_backward(bench.system)));
    expect_valid(report_stabilize(scalar.label, 1, 1, stabilize_backward(scalar.system)));

    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 0.5;
    cfg.paths = 50;
    cfg.seed = 3;
    const MomentEstimate mc = simulate_phi_gramian(bench.system, 0.5, cfg);
    const GramianResult det = gramian(bench.system, 0.5);
    expect_valid(report_simulate(bench.label, 3, 1, cfg, 0.5, mc, det, 1.25));
}

TEST_CASE("doubles survive a serialization round trip", "[report]") {
    JsonValue j = JsonValue::object();
    const double third = 1.0 / 3.0;
    const double tiny = 4.9406564584124654e-324;
    j.set("third", third);
    j.set("tiny", tiny);
    j.set("neg", -12345.6789012345678);
    const nlohmann::json parsed = nlohmann::json::parse(j.dump());
    CHECK(parsed["third"].get<double>() == third);
    CHECK(parsed["tiny"].get<double>() == tiny);
    CHECK(parsed["neg"].get<double>() == -12345.6789012345678);
}

TEST_CASE("emitter escapes strings and preserves key order", "[report]") {
    JsonValue j = JsonValue::object();
    j.set("zeta", 1);
    j.set("alpha", "line\nbreak \"quoted\"");
    const std::string text = j.dump(0);
    CHECK(text.find("\"zeta\"") < text.find("\"alpha\""));
    CHECK(text.find("\\n") != std::string::npos);
    CHECK(text.find("\\\"quoted\\\"") != std::string::npos);
    const nlohmann::json parsed = nlohmann::json::parse(text);
    CHECK(parsed["alpha"].get<std::string>() == "line\nbreak \"quoted\"");
}

TEST_CASE("explosive coefficients degrade to an indeterminate gramian route", "[analyze]") {
    // growth rate ~ e^{500 t}: the horizon integral cannot be represented
    BackwardSystem sys{Matrix(50.0 * Matrix::Identity(2, 2)),
                       Matrix(Matrix::Identity(2, 2).leftCols(1)),
                       Matrix(20.0 * Matrix::Identity(2, 2))};
    const AnalysisReport r = run_analysis(sys, {}, "explosive");
    CHECK_FALSE(r.gramian_route_ok);
    CHECK(r.cross_check != CrossCheck::inconsistent);
    expect_valid(report_analysis(r));
}

TEST_CASE("cross-check flags indeterminate components", "[analyze]") {
    AnalysisReport r;
    r.kalman = true;
    r.gramian_pd = true;
    r.hautus_controllable = Tristate::yes;
    r.hautus_stabilizable = Tristate::yes;
    r.riccati_stabilizable = Tristate::yes;
    CHECK(cross_check_verdicts(r) == CrossCheck::consistent);

    r.riccati_stabilizable = Tristate::no;
    CHECK(cross_check_verdicts(r) == CrossCheck::inconsistent);

    r.riccati_stabilizable = Tristate::indeterminate;
    CHECK(cross_check_verdicts(r) == CrossCheck::indeterminate);

    r.riccati_stabilizable = Tristate::yes;
    r.kalman = false;
    CHECK(cross_check_verdicts(r) == CrossCheck::inconsistent);
}
