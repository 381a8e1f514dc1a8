#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "contagion/scenario.hpp"
#include "test_networks.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace contagion;
using nlohmann::json;

namespace {

std::filesystem::path scenario_path(const std::string& name) {
    return std::filesystem::path(SCENARIO_DIR) / name;
}

json minimal_scenario() {
    return json::parse(R"({
        "schema": "contagion-clear/1",
        "mode": "static",
        "network": {"nodes": [
            {"id": "a", "assets": 1},
            {"id": "b", "assets": "1/2"}
        ]},
        "liabilities": []
    })");
}

}  // namespace

TEST_CASE("the bundled CDS scenario parses to the published network") {
    const Scenario scenario = parse_scenario(scenario_path("ex_3_8.json"));
    CHECK(scenario.mode == ScenarioMode::Static);
    CHECK(!scenario.has_society);
    const FinancialNetwork net = scenario.static_network(0.0);
    const FinancialNetwork expected = testnets::nonunique_cds_network();
    CHECK(sup_norm(net.external_assets - expected.external_assets) == 0.0);
    CHECK((net.base_liabilities - expected.base_liabilities).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(net.contracts.size() == 1);
    CHECK(net.contracts[0].kind == ContractKind::Cds);
    CHECK(net.contracts[0].writer == 1);
    CHECK(net.contracts[0].beneficiary == 0);
    CHECK(net.contracts[0].reference == 2);
}

TEST_CASE("fraction strings parse exactly") {
    const Scenario scenario = parse_scenario_json(minimal_scenario());
    CHECK(scenario.nodes[1].cash[0].base == 0.5);
    const Scenario bundled = parse_scenario(scenario_path("ex_3_8.json"));
    CHECK(bundled.nodes[1].cash[0].base == 3.0 / 16.0);
}

TEST_CASE("an empty liability list is a valid trivial network") {
    const Scenario scenario = parse_scenario_json(minimal_scenario());
    const RunReport report = run_scenario(scenario);
    CHECK(report.exit_code == kExitSolved);
    CHECK(report.document["result"]["wealths"][0] == 1.0);
}

TEST_CASE("semantic errors name the offending field") {
    json doc = minimal_scenario();
    doc["contracts"] = json::array(
        {{{"kind", "cds"}, {"writer", "a"}, {"beneficiary", "bank9"}, {"reference", "b"}}});
    CHECK_THROWS_WITH_AS(parse_scenario_json(doc),
                         doctest::Contains("unknown node 'bank9'"), InvalidInputError);
    json bad_kind = minimal_scenario();
    bad_kind["contracts"] =
        json::array({{{"kind", "swap"}, {"writer", "a"}, {"beneficiary", "b"}}});
    CHECK_THROWS_AS(parse_scenario_json(bad_kind), InvalidInputError);
}

TEST_CASE("parse, serialize, parse is the identity") {
    for (const char* name : {"ex_3_8.json", "ex_4_7.json", "ex_4_8.json", "ex_4_9.json",
                             "regular_demo.json"}) {
        const Scenario first = parse_scenario(scenario_path(name));
        const Scenario second = parse_scenario_json(scenario_to_json(first));
        CHECK(scenario_to_json(first) == scenario_to_json(second));
    }
}

TEST_CASE("the digital CDS scenario certifies nonexistence in static mode") {
    const Scenario scenario = parse_scenario(scenario_path("ex_4_7.json"));
    RunOverrides overrides;
    overrides.mode = ScenarioMode::Static;
    const RunReport report = run_scenario(scenario, overrides);
    CHECK(report.exit_code == kExitNonexistence);
    CHECK(report.document["result"]["status"] == "nonexistence");
    REQUIRE(report.document["result"]["branches"].size() == 2);
    const auto& branches = report.document["result"]["branches"];
    CHECK(branches[0]["wealths"][0].get<double>() == doctest::Approx(-1.0));
    CHECK(branches[1]["wealths"][1].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("the digital CDS scenario clears dynamically") {
    const Scenario scenario = parse_scenario(scenario_path("ex_4_7.json"));
    const RunReport report = run_scenario(scenario);
    CHECK(report.exit_code == kExitSolved);
    const auto& terminal = report.document["result"]["wealths"][1];
    CHECK(terminal[0].get<double>() == doctest::Approx(0.0));
    CHECK(terminal[1].get<double>() == doctest::Approx(0.5));
    CHECK(terminal[2].get<double>() == doctest::Approx(2.5));
}

TEST_CASE("the CDS scenario solves with a speculative warning") {
    const Scenario scenario = parse_scenario(scenario_path("ex_3_8.json"));
    const RunReport report = run_scenario(scenario);
    CHECK(report.exit_code == kExitSolved);
    const auto& wealths = report.document["result"]["wealths"];
    CHECK(wealths[0].get<double>() == doctest::Approx(0.0));
    CHECK(wealths[1].get<double>() == doctest::Approx(3.0 / 16.0));
    CHECK(wealths[2].get<double>() == doctest::Approx(0.0));
    CHECK(report.document["nonspeculative"]["falsified"] == true);
    bool warned = false;
    for (const auto& w : report.document["result"]["warnings"])
        warned = warned || w.get<std::string>().find("speculative") != std::string::npos;
    CHECK(warned);
}

TEST_CASE("the self-insurance scenario settles in both modes") {
    const Scenario scenario = parse_scenario(scenario_path("ex_4_9.json"));
    RunOverrides overrides;
    overrides.mode = ScenarioMode::Static;
    const RunReport statics = run_scenario(scenario, overrides);
    CHECK(statics.exit_code == kExitSolved);
    CHECK(statics.document["result"]["wealths"][0].get<double>() == doctest::Approx(-0.5));

    RunOverrides dynamic_overrides;
    dynamic_overrides.epsilon = 0.25;
    const RunReport dynamics = run_scenario(scenario, dynamic_overrides);
    CHECK(dynamics.exit_code == kExitSolved);
    const auto& terminal = dynamics.document["result"]["wealths"][1];
    CHECK(terminal[0].get<double>() == doctest::Approx(0.75));
    CHECK(terminal[2].get<double>() == doctest::Approx(1.75));
}

TEST_CASE("reports are byte-identical across repeated runs") {
    const Scenario scenario = parse_scenario(scenario_path("ex_4_8.json"));
    RunReport a = run_scenario(scenario);
    RunReport b = run_scenario(scenario);
    a.document.erase("timings");
    b.document.erase("timings");
    CHECK(a.document.dump() == b.document.dump());
}

TEST_CASE("trajectory CSV has the documented layout") {
    const Scenario scenario = parse_scenario(scenario_path("ex_4_7.json"));
    const RunReport report = run_scenario(scenario);
    std::ostringstream out;
    write_trajectory_csv(out, report.trajectory);
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "time,node,wealth,payment");
    std::getline(lines, line);
    CHECK(line.rfind("0,bank1,", 0) == 0);
    int rows = 1;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 6);  // three nodes, two dates
}

TEST_CASE("tolerance resolution order") {
    const Scenario scenario = parse_scenario_json(minimal_scenario());
    RunOverrides overrides;
    CHECK(resolved_solver(scenario, overrides).tolerance == 1e-10);

    setenv(kToleranceEnvVar, "1e-6", 1);
    CHECK(resolved_solver(scenario, overrides).tolerance == 1e-6);
    overrides.tolerance = 1e-9;
    CHECK(resolved_solver(scenario, overrides).tolerance == 1e-9);
    setenv(kToleranceEnvVar, "not-a-number", 1);
    overrides.tolerance.reset();
    CHECK_THROWS_AS(resolved_solver(scenario, overrides), InvalidInputError);
    unsetenv(kToleranceEnvVar);
}

TEST_CASE("society nodes are moved to the front") {
    json doc = json::parse(R"({
        "schema": "contagion-clear/1",
        "mode": "static",
        "network": {"has_society": true, "nodes": [
            {"id": "bank1", "assets": 1},
            {"id": "society", "society": true, "assets": 0}
        ]},
        "liabilities": [{"from": "bank1", "to": "society", "amount": 1}]
    })");
    const Scenario scenario = parse_scenario_json(doc);
    CHECK(scenario.has_society);
    CHECK(scenario.nodes[0].id == "society");
    const FinancialNetwork net = scenario.static_network(0.0);
    CHECK(net.base_liabilities(1, 0) == 1.0);
}

TEST_CASE("unsupported schema versions are rejected") {
    json doc = minimal_scenario();
    doc["schema"] = "contagion-clear/99";
    CHECK_THROWS_AS(parse_scenario_json(doc), InvalidInputError);
}
