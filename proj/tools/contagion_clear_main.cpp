#include "contagion/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace contagion;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string scenario_file;
    std::optional<double> tolerance;
    std::optional<int> max_iterations;
    std::optional<double> epsilon;
    std::string out_path;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("scenario", opts.scenario_file, "Scenario file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--tol", opts.tolerance, "Residual tolerance override");
    cmd->add_option("--max-iter", opts.max_iterations, "Iteration budget override");
    cmd->add_option("--epsilon", opts.epsilon, "Asset-split parameter override");
    cmd->add_option("--out", opts.out_path, "Write the full JSON report to this path");
    cmd->add_flag("--quiet", opts.quiet, "Suppress the human-readable table");
}

void write_report(const std::string& path, const json& doc) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write report to " + path);
    out << doc.dump(2) << '\n';
}

std::string fmt(double v) {
    std::ostringstream oss;
    oss << std::setprecision(10) << v;
    return oss.str();
}

std::string fmt(const json& v) { return fmt(v.get<double>()); }

std::string fmt(const Vector& v) {
    std::ostringstream oss;
    oss << "[";
    for (int i = 0; i < v.size(); ++i) oss << (i ? ", " : "") << fmt(v[i]);
    oss << "]";
    return oss.str();
}

void print_wealth_table(const std::vector<std::string>& ids,
                        const std::vector<TrajectoryRow>& rows) {
    std::size_t width = 4;
    for (const std::string& id : ids) width = std::max(width, id.size());
    std::cout << std::left << std::setw(6) << "time" << std::setw(width + 2) << "node"
              << std::setw(16) << "wealth" << "payment\n";
    for (const TrajectoryRow& row : rows) {
        std::cout << std::left << std::setw(6) << row.time << std::setw(width + 2) << row.node
                  << std::setw(16) << fmt(row.wealth) << fmt(row.payment) << '\n';
    }
}

RunOverrides to_overrides(const CommonOptions& opts) {
    RunOverrides overrides;
    overrides.tolerance = opts.tolerance;
    overrides.max_iterations = opts.max_iterations;
    overrides.epsilon = opts.epsilon;
    return overrides;
}

SolveOptions solve_options(const Scenario& scenario, const CommonOptions& opts) {
    const ScenarioSolver solver = resolved_solver(scenario, to_overrides(opts));
    return SolveOptions{solver.tolerance, solver.max_iterations};
}

int run_clear(const CommonOptions& opts, const std::string& mode, const std::string& direction,
              const std::string& sweep, const std::string& csv_path) {
    const Scenario scenario = parse_scenario(opts.scenario_file);
    RunOverrides overrides = to_overrides(opts);
    if (mode == "static") overrides.mode = ScenarioMode::Static;
    else if (mode == "dynamic") overrides.mode = ScenarioMode::Dynamic;
    else if (!mode.empty()) throw InvalidInputError("--mode must be static or dynamic");
    if (direction == "greatest") overrides.direction = Direction::Greatest;
    else if (direction == "least") overrides.direction = Direction::Least;
    else if (!direction.empty())
        throw InvalidInputError("--direction must be greatest or least");

    if (!sweep.empty()) {
        double lo = 0.0, hi = 0.0;
        int count = 0;
        char sep1 = 0, sep2 = 0;
        std::istringstream in(sweep);
        if (!(in >> lo >> sep1 >> hi >> sep2 >> count) || sep1 != ':' || sep2 != ':' || count < 2)
            throw InvalidInputError("--sweep expects LO:HI:COUNT with COUNT >= 2");
        std::vector<std::future<RunReport>> futures;
        std::vector<double> grid;
        for (int k = 0; k < count; ++k) {
            const double eps = lo + (hi - lo) * k / (count - 1);
            grid.push_back(eps);
            RunOverrides point = overrides;
            point.epsilon = eps;
            futures.push_back(std::async(std::launch::async,
                                         [scenario, point] { return run_scenario(scenario, point); }));
        }
        json sweep_doc = json::array();
        int exit_code = kExitSolved;
        for (int k = 0; k < count; ++k) {
            const RunReport report = futures[k].get();
            exit_code = std::max(exit_code, report.exit_code);
            sweep_doc.push_back(report.document);
            if (!opts.quiet) {
                std::cout << "epsilon = " << fmt(grid[k]) << ": ";
                const json& result = report.document["result"];
                if (result.contains("wealths")) {
                    const json& wealths = result["wealths"];
                    const json& terminal = wealths.back().is_array() ? wealths.back() : wealths;
                    std::cout << "terminal wealths [";
                    for (std::size_t i = 0; i < terminal.size(); ++i)
                        std::cout << (i ? ", " : "") << fmt(terminal[i]);
                    std::cout << "]\n";
                } else {
                    std::cout << result["status"].get<std::string>() << '\n';
                }
            }
        }
        write_report(opts.out_path, sweep_doc);
        return exit_code;
    }

    const RunReport report = run_scenario(scenario, overrides);
    if (!opts.quiet) {
        std::cout << "scenario: " << scenario.name
                  << "  mode: " << report.document["mode"].get<std::string>()
                  << "  epsilon: " << fmt(report.document["epsilon"]) << '\n';
        std::cout << "status: " << report.document["result"]["status"].get<std::string>() << '\n';
        if (!report.trajectory.empty()) print_wealth_table(scenario.node_ids(), report.trajectory);
        if (report.document.contains("audits") &&
            report.document["audits"].contains("conservation")) {
            const json& audit = report.document["audits"]["conservation"];
            std::cout << "conservation: positive equity " << fmt(audit["positive_equity"])
                      << " vs inflows " << fmt(audit["reference_total"]) << " (gap "
                      << fmt(audit["gap"]) << ")\n";
        }
        if (report.document["result"].contains("warnings")) {
            for (const json& warning : report.document["result"]["warnings"])
                std::cout << "warning: " << warning.get<std::string>() << '\n';
        }
        if (report.document["result"].contains("branches")) {
            for (const json& branch : report.document["result"]["branches"]) {
                std::cout << "branch " << branch["pattern"].dump() << " -> wealths "
                          << branch["wealths"].dump() << "; " << branch["note"].get<std::string>()
                          << '\n';
            }
        }
    }
    write_report(opts.out_path, report.document);
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw InvalidInputError("cannot write CSV to " + csv_path);
        write_trajectory_csv(csv, report.trajectory);
    }
    return report.exit_code;
}

int run_check(const CommonOptions& opts, int samples, std::uint64_t seed) {
    const Scenario scenario = parse_scenario(opts.scenario_file);
    const double epsilon = opts.epsilon.value_or(scenario.epsilon_default);
    const NonspeculativeReport report =
        check_nonspeculative(scenario.static_spec(epsilon), samples, seed);
    if (!opts.quiet) {
        std::cout << (report.falsified ? "speculative: monotonicity falsified"
                                       : "not falsified across the sampled pairs")
                  << " (" << report.samples << " samples)\n";
        if (report.witness)
            std::cout << "witness firm " << report.witness->firm << ", gap "
                      << fmt(report.witness->gap) << '\n';
        if (report.strict_samples > 0) {
            std::cout << (report.strict_falsified
                              ? "society inflow is not strictly increasing"
                              : "society inflow strictly increasing on sampled pairs")
                      << " (" << report.strict_samples << " samples)\n";
        }
    }
    write_report(opts.out_path, report_for_check(scenario, report, epsilon));
    return 0;
}

int run_diagnose(const CommonOptions& opts) {
    const Scenario scenario = parse_scenario(opts.scenario_file);
    const double epsilon = opts.epsilon.value_or(scenario.epsilon_default);
    const NonexistenceDiagnosis diag =
        detect_nonexistence(scenario.static_spec(epsilon), solve_options(scenario, opts));
    if (!opts.quiet) {
        std::cout << "verdict: " << to_string(diag.verdict) << '\n';
        if (diag.period > 0) std::cout << "iteration cycle of period " << diag.period << '\n';
        for (const BranchRecord& branch : diag.branches) {
            std::cout << "branch [";
            for (std::size_t i = 0; i < branch.pattern.size(); ++i)
                std::cout << (i ? "," : "") << (branch.pattern[i] ? 1 : 0);
            std::cout << "]: ";
            if (branch.wealths.size()) std::cout << "wealths " << fmt(branch.wealths) << " ";
            std::cout << branch.note << '\n';
        }
        if (diag.verdict == DiagnosisVerdict::FixedPointFound) {
            std::cout << "fixed point " << fmt(diag.solution.wealths) << " residual "
                      << fmt(diag.solution.residual) << '\n';
        }
    }
    write_report(opts.out_path, report_for_diagnosis(scenario, diag, epsilon));
    switch (diag.verdict) {
        case DiagnosisVerdict::FixedPointFound: return kExitSolved;
        case DiagnosisVerdict::ConclusiveNonexistence: return kExitNonexistence;
        case DiagnosisVerdict::Inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

int run_sensitivity(const CommonOptions& opts, const std::string& direction_arg, int steps) {
    const Scenario scenario = parse_scenario(opts.scenario_file);
    const double epsilon = opts.epsilon.value_or(scenario.epsilon_default);
    const LiabilitySpec spec = scenario.static_spec(epsilon);
    const std::vector<std::string> ids = scenario.node_ids();

    Vector direction = Vector::Zero(spec.node_count);
    std::istringstream in(direction_arg);
    std::string item;
    int position = 0;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq != std::string::npos) {
            const std::string id = item.substr(0, eq);
            const auto it = std::find(ids.begin(), ids.end(), id);
            if (it == ids.end())
                throw InvalidInputError("direction names unknown node '" + id + "'");
            direction[it - ids.begin()] = std::stod(item.substr(eq + 1));
        } else {
            if (position >= spec.node_count)
                throw InvalidInputError("direction vector has too many entries");
            direction[position++] = std::stod(item);
        }
    }

    const SensitivityReport report =
        sensitivity_in_assets(spec, direction, steps, solve_options(scenario, opts));
    if (!opts.quiet) {
        if (!report.in_theorem_scope)
            std::cout << "note: system is speculative, outside the monotonicity result's scope\n";
        std::cout << "grid points: " << report.grid.size() << '\n';
        std::cout << "monotone: " << (report.monotone ? "yes" : "no") << " (max violation "
                  << fmt(report.max_violation) << ")\n";
        std::cout << "max jump: " << fmt(report.max_jump) << " (threshold "
                  << fmt(report.jump_threshold) << ")\n";
        if (report.failure_index >= 0)
            std::cout << "clearing failed at grid index " << report.failure_index << '\n';
    }
    write_report(opts.out_path, report_for_sensitivity(scenario, report, epsilon));
    return report.failure_index < 0 ? kExitSolved : kExitInconclusive;
}

int run_compare(const CommonOptions& opts) {
    const Scenario scenario = parse_scenario(opts.scenario_file);
    const double epsilon = opts.epsilon.value_or(scenario.epsilon_default);
    const ComparisonReport report =
        compare_static_dynamic(scenario.static_spec(epsilon), scenario.split_schedule(epsilon),
                               solve_options(scenario, opts));
    if (!opts.quiet) {
        std::cout << "static: " << (report.static_solved ? "solved" : "no equilibrium certified")
                  << '\n';
        if (report.static_solved)
            std::cout << "  wealths " << fmt(report.static_result.wealths) << '\n';
        std::cout << "dynamic terminal " << fmt(report.terminal_wealths) << '\n'
                  << report.note << '\n';
    }
    write_report(opts.out_path, report_for_comparison(scenario, report, epsilon));
    return kExitSolved;
}

int run_validate(const CommonOptions& opts) {
    const Scenario scenario = parse_scenario(opts.scenario_file);
    const double epsilon = opts.epsilon.value_or(scenario.epsilon_default);
    const ValidationReport report = validate_network(scenario.static_network(epsilon));
    if (scenario.mode == ScenarioMode::Dynamic)
        validate_dynamic_spec(scenario.dynamic_spec(epsilon));
    for (const std::string& violation : report.violations)
        std::cout << "violation: " << violation << '\n';
    for (const std::string& warning : report.warnings)
        std::cout << "warning: " << warning << '\n';
    if (report.valid() && !opts.quiet) std::cout << "scenario is valid\n";
    return report.valid() ? kExitSolved : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clearing engine for interbank networks with contingent payments"};
    app.require_subcommand(1);

    CommonOptions clear_opts, check_opts, diagnose_opts, sensitivity_opts, compare_opts,
        validate_opts;
    std::string mode, direction, sweep, csv_path, direction_vector;
    int samples = 10000;
    std::uint64_t seed = 0x5eed;
    int steps = 21;

    CLI::App* clear = app.add_subcommand("clear", "Compute clearing wealths");
    add_common(clear, clear_opts);
    clear->add_option("--mode", mode, "static or dynamic (defaults to the scenario)");
    clear->add_option("--direction", direction, "greatest or least (static mode)");
    clear->add_option("--sweep", sweep, "Epsilon sweep LO:HI:COUNT (runs in parallel)");
    clear->add_option("--csv", csv_path, "Write the wealth trajectory as CSV");

    CLI::App* check =
        app.add_subcommand("check", "Sampling falsifier for the nonspeculative property");
    add_common(check, check_opts);
    check->add_option("--samples", samples, "Ordered pairs to sample");
    check->add_option("--seed", seed, "RNG seed");

    CLI::App* diagnose = app.add_subcommand("diagnose", "Diagnose static nonexistence");
    add_common(diagnose, diagnose_opts);

    CLI::App* sensitivity =
        app.add_subcommand("sensitivity", "Clearing wealths along an asset ramp");
    add_common(sensitivity, sensitivity_opts);
    sensitivity
        ->add_option("--direction-vector", direction_vector,
                     "Comma list: per-node values or id=value pairs")
        ->required();
    sensitivity->add_option("--steps", steps, "Grid points");

    CLI::App* compare = app.add_subcommand("compare", "Static versus dynamic clearing");
    add_common(compare, compare_opts);

    CLI::App* validate = app.add_subcommand("validate", "Validate a scenario file");
    add_common(validate, validate_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (clear->parsed()) return run_clear(clear_opts, mode, direction, sweep, csv_path);
        if (check->parsed()) return run_check(check_opts, samples, seed);
        if (diagnose->parsed()) return run_diagnose(diagnose_opts);
        if (sensitivity->parsed()) return run_sensitivity(sensitivity_opts, direction_vector, steps);
        if (compare->parsed()) return run_compare(compare_opts);
        if (validate->parsed()) return run_validate(validate_opts);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ContractStructureError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitInconclusive;
    }
    return kExitUsage;
}
