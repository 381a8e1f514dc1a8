#pragma once

#include "contagion/analysis.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace contagion {

/// Scenario schema version accepted by the parser.
inline constexpr const char* kScenarioSchema = "contagion-clear/1";
inline constexpr const char* kReportSchema = "contagion-clear/report/1";

/// Name of the environment variable overriding the default tolerance.
inline constexpr const char* kToleranceEnvVar = "CONTAGION_CLEAR_TOL";

/// Process exit codes shared by the CLI and run_scenario.
enum ExitCode : int {
    kExitSolved = 0,
    kExitUsage = 1,
    kExitNonexistence = 2,
    kExitInconclusive = 3,
};

/// Scalar of the form base + eps * epsilon. Scenario files may split assets
/// across clearing dates as a function of the sweep parameter epsilon.
struct AffineValue {
    double base = 0.0;
    double eps = 0.0;

    double at(double epsilon) const { return base + eps * epsilon; }
};

struct ScenarioNode {
    std::string id;
    bool society = false;
    std::vector<AffineValue> cash;  // one entry for static files, T+1 for dynamic
};

struct ScenarioLiability {
    int time = 0;
    int from = -1;
    int to = -1;
    double amount = 0.0;
};

struct ScenarioContract {
    int time = 1;  // due date in dynamic mode; ignored in static mode
    ContingentContract contract;
};

enum class ScenarioMode { Static, Dynamic };

struct ScenarioSolver {
    double tolerance = 1e-10;
    int max_iterations = 10000;
    Direction direction = Direction::Greatest;
    RemovalPolicy removal_policy = RemovalPolicy::RollForwardOnly;
};

/// Parsed and validated scenario file. Nodes are held in internal order
/// (society first when present).
struct Scenario {
    std::string name;
    std::string description;
    ScenarioMode mode = ScenarioMode::Static;
    bool has_society = false;
    int horizon = 0;  // T; 0 for static scenarios
    std::vector<ScenarioNode> nodes;
    std::vector<ScenarioLiability> liabilities;
    std::vector<ScenarioContract> contracts;
    ScenarioSolver solver;
    double epsilon_default = 0.0;

    int node_count() const { return static_cast<int>(nodes.size()); }
    std::vector<std::string> node_ids() const;

    /// Static view. Dynamic files collapse: assets and scheduled liabilities
    /// are summed over time and contract due dates are dropped.
    FinancialNetwork static_network(double epsilon) const;
    LiabilitySpec static_spec(double epsilon) const;

    /// Dynamic view. Static files lift to the default two-period schedule
    /// (all base claims at t = 0, all contingent payouts at t = 1).
    DynamicSpec dynamic_spec(double epsilon) const;

    /// Asset split used by the static/dynamic comparison.
    SplitSchedule split_schedule(double epsilon) const;
};

Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& scenario);

struct RunOverrides {
    std::optional<ScenarioMode> mode;
    std::optional<Direction> direction;
    std::optional<double> tolerance;
    std::optional<int> max_iterations;
    std::optional<double> epsilon;
};

/// Tolerance precedence: explicit override, then CONTAGION_CLEAR_TOL, then
/// the scenario file, then the built-in default.
ScenarioSolver resolved_solver(const Scenario& scenario, const RunOverrides& overrides);

struct TrajectoryRow {
    int time = 0;
    std::string node;
    double wealth = 0.0;
    double payment = 0.0;
};

struct RunReport {
    nlohmann::json document;
    int exit_code = kExitSolved;
    std::vector<TrajectoryRow> trajectory;
};

/// Clears the scenario in its (possibly overridden) mode, attaches audits
/// and the speculative check, and encodes the outcome in the exit code.
RunReport run_scenario(const Scenario& scenario, const RunOverrides& overrides = {});

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);

// Report builders shared by the CLI subcommands.
nlohmann::json report_for_check(const Scenario& scenario, const NonspeculativeReport& report,
                                double epsilon);
nlohmann::json report_for_diagnosis(const Scenario& scenario, const NonexistenceDiagnosis& diag,
                                    double epsilon);
nlohmann::json report_for_sensitivity(const Scenario& scenario, const SensitivityReport& report,
                                      double epsilon);
nlohmann::json report_for_comparison(const Scenario& scenario, const ComparisonReport& report,
                                     double epsilon);

}  // namespace contagion
