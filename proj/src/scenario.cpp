#include "contagion/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace contagion {

using nlohmann::json;

namespace {

double parse_number_like(const json& value, const std::string& what) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        const std::string text = value.get<std::string>();
        try {
            std::size_t used = 0;
            const auto slash = text.find('/');
            if (slash != std::string::npos) {
                const double num = std::stod(text.substr(0, slash), &used);
                if (used != slash) throw std::invalid_argument(text);
                const double den = std::stod(text.substr(slash + 1), &used);
                if (used != text.size() - slash - 1 || den == 0.0)
                    throw std::invalid_argument(text);
                return num / den;
            }
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw InvalidInputError(what + ": cannot parse number '" + text + "'");
        }
    }
    throw InvalidInputError(what + ": expected a number or a fraction string");
}

AffineValue parse_affine(const json& value, const std::string& what) {
    AffineValue out;
    if (value.is_object()) {
        if (value.contains("base")) out.base = parse_number_like(value.at("base"), what);
        if (value.contains("eps")) out.eps = parse_number_like(value.at("eps"), what);
        for (const auto& [key, unused] : value.items()) {
            if (key != "base" && key != "eps")
                throw InvalidInputError(what + ": unknown key '" + key + "'");
        }
        return out;
    }
    out.base = parse_number_like(value, what);
    return out;
}

json affine_to_json(const AffineValue& value) {
    if (value.eps == 0.0) return value.base;
    return json{{"base", value.base}, {"eps", value.eps}};
}

const std::map<std::string, ContractKind>& kind_names() {
    static const std::map<std::string, ContractKind> names = {
        {"insurance", ContractKind::Insurance},
        {"threshold_insurance", ContractKind::ThresholdInsurance},
        {"cds", ContractKind::Cds},
        {"digital_cds", ContractKind::DigitalCds},
        {"self_insurance", ContractKind::SelfInsurance},
        {"stability_fund_claim", ContractKind::StabilityFundClaim},
    };
    return names;
}

std::vector<double> to_std(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

json vector_json(const Vector& v) { return json(to_std(v)); }

json clearing_result_json(const ClearingResult& result, bool uniqueness_known) {
    json out;
    out["status"] = "solved";
    out["converged"] = result.converged;
    out["direction"] = to_string(result.direction);
    out["wealths"] = vector_json(result.wealths);
    out["payments"] = vector_json(result.payments);
    out["defaults"] = result.defaults;
    out["residual"] = result.residual;
    out["iterations"] = result.iterations;
    out["rounds"] = result.rounds;
    out["warnings"] = result.warnings;
    out["uniqueness_guaranteed"] = uniqueness_known;
    return out;
}

json diagnosis_json(const NonexistenceDiagnosis& diag) {
    json out;
    out["verdict"] = to_string(diag.verdict);
    out["period"] = diag.period;
    json cycle = json::array();
    for (const Vector& state : diag.cycle) cycle.push_back(vector_json(state));
    out["cycle"] = std::move(cycle);
    json branches = json::array();
    for (const BranchRecord& rec : diag.branches) {
        json b;
        b["pattern"] = rec.pattern;
        b["wealths"] = rec.wealths.size() ? vector_json(rec.wealths) : json::array();
        b["solved"] = rec.solved;
        b["consistent"] = rec.consistent;
        b["exhausted"] = rec.exhausted;
        b["extremal_certified"] = rec.extremal_certified;
        b["note"] = rec.note;
        branches.push_back(std::move(b));
    }
    out["branches"] = std::move(branches);
    if (!diag.trace.empty()) {
        json trace = json::array();
        for (const Vector& state : diag.trace) trace.push_back(vector_json(state));
        out["trace"] = std::move(trace);
    }
    return out;
}

json audit_json(const ConservationAudit& audit) {
    return json{{"positive_equity", audit.positive_equity},
                {"reference_total", audit.reference_total},
                {"gap", audit.gap},
                {"pass", audit.pass}};
}

json nonspeculative_json(const NonspeculativeReport& report) {
    json out;
    out["falsified"] = report.falsified;
    out["strict_falsified"] = report.strict_falsified;
    out["samples"] = report.samples;
    out["strict_samples"] = report.strict_samples;
    if (report.witness) {
        out["witness"] = json{{"lower", vector_json(report.witness->lower)},
                              {"upper", vector_json(report.witness->upper)},
                              {"firm", report.witness->firm},
                              {"gap", report.witness->gap}};
    }
    return out;
}

}  // namespace

std::vector<std::string> Scenario::node_ids() const {
    std::vector<std::string> ids;
    ids.reserve(nodes.size());
    for (const ScenarioNode& node : nodes) ids.push_back(node.id);
    return ids;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open scenario file: " + path.string());
    json doc = json::parse(in);  // propagates nlohmann parse_error with position
    return parse_scenario_json(doc);
}

Scenario parse_scenario_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("schema"))
        throw InvalidInputError("scenario is missing the schema field");
    if (doc.at("schema").get<std::string>() != kScenarioSchema)
        throw InvalidInputError("unsupported schema: " + doc.at("schema").dump());

    Scenario scenario;
    if (doc.contains("meta")) {
        const json& meta = doc.at("meta");
        scenario.name = meta.value("name", "");
        scenario.description = meta.value("description", "");
    }

    const std::string mode = doc.value("mode", "static");
    if (mode == "static") scenario.mode = ScenarioMode::Static;
    else if (mode == "dynamic") scenario.mode = ScenarioMode::Dynamic;
    else throw InvalidInputError("mode must be 'static' or 'dynamic', got '" + mode + "'");

    scenario.horizon = doc.value("horizon", scenario.mode == ScenarioMode::Dynamic ? 1 : 0);
    if (scenario.mode == ScenarioMode::Dynamic && scenario.horizon < 0)
        throw InvalidInputError("horizon must be nonnegative");
    scenario.epsilon_default = doc.contains("epsilon_default")
                                   ? parse_number_like(doc.at("epsilon_default"), "epsilon_default")
                                   : 0.0;

    if (!doc.contains("network") || !doc.at("network").contains("nodes"))
        throw InvalidInputError("scenario is missing network.nodes");
    const json& network = doc.at("network");
    const bool declared_society = network.value("has_society", false);

    std::vector<ScenarioNode> parsed;
    int society_index = -1;
    for (const json& entry : network.at("nodes")) {
        ScenarioNode node;
        node.id = entry.at("id").get<std::string>();
        node.society = entry.value("society", false) || node.id == "society";
        const std::string what = "node '" + node.id + "'";
        if (entry.contains("cash_flows")) {
            for (const json& v : entry.at("cash_flows")) node.cash.push_back(parse_affine(v, what));
        } else if (entry.contains("assets")) {
            node.cash.push_back(parse_affine(entry.at("assets"), what));
        } else {
            throw InvalidInputError(what + " needs 'assets' or 'cash_flows'");
        }
        if (node.society) {
            if (society_index >= 0) throw InvalidInputError("more than one society node");
            society_index = static_cast<int>(parsed.size());
        }
        parsed.push_back(std::move(node));
    }
    if (declared_society && society_index < 0)
        throw InvalidInputError("has_society is set but no node is flagged as society");
    scenario.has_society = society_index >= 0;

    // Internal order puts society first.
    if (society_index > 0) {
        ScenarioNode society = std::move(parsed[society_index]);
        parsed.erase(parsed.begin() + society_index);
        parsed.insert(parsed.begin(), std::move(society));
    }
    scenario.nodes = std::move(parsed);

    std::map<std::string, int> index_of;
    for (std::size_t i = 0; i < scenario.nodes.size(); ++i) {
        if (!index_of.emplace(scenario.nodes[i].id, static_cast<int>(i)).second)
            throw InvalidInputError("duplicate node id '" + scenario.nodes[i].id + "'");
    }
    auto resolve = [&](const json& v, const std::string& what) {
        const std::string id = v.get<std::string>();
        const auto it = index_of.find(id);
        if (it == index_of.end())
            throw InvalidInputError(what + " references unknown node '" + id + "'");
        return it->second;
    };

    const int times = scenario.mode == ScenarioMode::Dynamic ? scenario.horizon + 1 : 1;
    for (ScenarioNode& node : scenario.nodes) {
        if (static_cast<int>(node.cash.size()) == 1 && times > 1)
            node.cash.resize(times);  // assets shorthand: everything at t = 0
        if (static_cast<int>(node.cash.size()) != times)
            throw InvalidInputError("node '" + node.id + "' must provide " +
                                    std::to_string(times) + " cash flow entries");
    }

    for (const json& entry : doc.value("liabilities", json::array())) {
        ScenarioLiability liability;
        liability.time = entry.value("time", 0);
        if (liability.time < 0 || liability.time >= times)
            throw InvalidInputError("liability time outside the horizon");
        liability.from = resolve(entry.at("from"), "liability");
        liability.to = resolve(entry.at("to"), "liability");
        liability.amount = parse_number_like(entry.at("amount"), "liability amount");
        scenario.liabilities.push_back(liability);
    }

    for (const json& entry : doc.value("contracts", json::array())) {
        ScenarioContract sc;
        const std::string kind = entry.at("kind").get<std::string>();
        const auto it = kind_names().find(kind);
        if (it == kind_names().end())
            throw InvalidInputError("unknown contract kind '" + kind + "'");
        sc.contract.kind = it->second;
        sc.contract.writer = resolve(entry.at("writer"), "contract");
        sc.contract.beneficiary = resolve(entry.at("beneficiary"), "contract");
        sc.contract.reference = entry.contains("reference")
                                    ? resolve(entry.at("reference"), "contract")
                                    : sc.contract.beneficiary;
        if (entry.contains("eta")) sc.contract.eta = parse_number_like(entry.at("eta"), "eta");
        if (entry.contains("tau")) sc.contract.tau = parse_number_like(entry.at("tau"), "tau");
        if (entry.contains("notional"))
            sc.contract.notional = parse_number_like(entry.at("notional"), "notional");
        sc.time = entry.value("time", 1);
        if (scenario.mode == ScenarioMode::Dynamic && (sc.time < 0 || sc.time > scenario.horizon))
            throw InvalidInputError("contract due time outside the horizon");
        scenario.contracts.push_back(sc);
    }

    if (doc.contains("solver")) {
        const json& solver = doc.at("solver");
        scenario.solver.tolerance = solver.value("tolerance", scenario.solver.tolerance);
        scenario.solver.max_iterations =
            solver.value("max_iterations", scenario.solver.max_iterations);
        const std::string direction = solver.value("direction", "greatest");
        if (direction == "greatest") scenario.solver.direction = Direction::Greatest;
        else if (direction == "least") scenario.solver.direction = Direction::Least;
        else throw InvalidInputError("solver direction must be 'greatest' or 'least'");
        const std::string policy = solver.value("removal_policy", "roll_forward_only");
        if (policy == "roll_forward_only")
            scenario.solver.removal_policy = RemovalPolicy::RollForwardOnly;
        else if (policy == "remove_on_default")
            scenario.solver.removal_policy = RemovalPolicy::RemoveOnDefault;
        else throw InvalidInputError("unknown removal policy '" + policy + "'");
    }
    return scenario;
}

json scenario_to_json(const Scenario& scenario) {
    json doc;
    doc["schema"] = kScenarioSchema;
    doc["meta"] = json{{"name", scenario.name}, {"description", scenario.description}};
    doc["mode"] = scenario.mode == ScenarioMode::Static ? "static" : "dynamic";
    if (scenario.mode == ScenarioMode::Dynamic) doc["horizon"] = scenario.horizon;
    doc["epsilon_default"] = scenario.epsilon_default;

    json nodes = json::array();
    for (const ScenarioNode& node : scenario.nodes) {
        json entry;
        entry["id"] = node.id;
        if (node.society) entry["society"] = true;
        if (node.cash.size() == 1) {
            entry["assets"] = affine_to_json(node.cash.front());
        } else {
            json flows = json::array();
            for (const AffineValue& v : node.cash) flows.push_back(affine_to_json(v));
            entry["cash_flows"] = std::move(flows);
        }
        nodes.push_back(std::move(entry));
    }
    doc["network"] = json{{"has_society", scenario.has_society}, {"nodes", std::move(nodes)}};

    json liabilities = json::array();
    for (const ScenarioLiability& liability : scenario.liabilities) {
        json entry;
        if (scenario.mode == ScenarioMode::Dynamic) entry["time"] = liability.time;
        entry["from"] = scenario.nodes[liability.from].id;
        entry["to"] = scenario.nodes[liability.to].id;
        entry["amount"] = liability.amount;
        liabilities.push_back(std::move(entry));
    }
    doc["liabilities"] = std::move(liabilities);

    json contracts = json::array();
    for (const ScenarioContract& sc : scenario.contracts) {
        json entry;
        entry["kind"] = to_string(sc.contract.kind);
        entry["writer"] = scenario.nodes[sc.contract.writer].id;
        entry["beneficiary"] = scenario.nodes[sc.contract.beneficiary].id;
        entry["reference"] = scenario.nodes[sc.contract.reference].id;
        entry["eta"] = sc.contract.eta;
        entry["tau"] = sc.contract.tau;
        entry["notional"] = sc.contract.notional;
        if (scenario.mode == ScenarioMode::Dynamic) entry["time"] = sc.time;
        contracts.push_back(std::move(entry));
    }
    doc["contracts"] = std::move(contracts);

    doc["solver"] = json{{"tolerance", scenario.solver.tolerance},
                         {"max_iterations", scenario.solver.max_iterations},
                         {"direction", to_string(scenario.solver.direction)},
                         {"removal_policy", to_string(scenario.solver.removal_policy)}};
    return doc;
}

FinancialNetwork Scenario::static_network(double epsilon) const {
    FinancialNetwork net;
    net.node_count = node_count();
    net.has_society = has_society;
    net.external_assets = Vector::Zero(net.node_count);
    net.base_liabilities = Matrix::Zero(net.node_count, net.node_count);
    for (int i = 0; i < net.node_count; ++i) {
        for (const AffineValue& v : nodes[i].cash) net.external_assets[i] += v.at(epsilon);
    }
    for (const ScenarioLiability& liability : liabilities)
        net.base_liabilities(liability.from, liability.to) += liability.amount;
    for (const ScenarioContract& sc : contracts) net.contracts.push_back(sc.contract);
    return net;
}

LiabilitySpec Scenario::static_spec(double epsilon) const {
    return make_liability_spec(static_network(epsilon));
}

DynamicSpec Scenario::dynamic_spec(double epsilon) const {
    DynamicSpec spec;
    spec.node_count = node_count();
    spec.has_society = has_society;
    spec.removal_policy = solver.removal_policy;
    spec.initial_wealths = Vector::Zero(spec.node_count);

    const int times = mode == ScenarioMode::Dynamic ? horizon + 1 : 2;
    spec.cash_flows.assign(times, Vector::Zero(spec.node_count));
    spec.base_liabilities.assign(times, Matrix::Zero(spec.node_count, spec.node_count));
    for (int i = 0; i < spec.node_count; ++i) {
        for (std::size_t t = 0; t < nodes[i].cash.size(); ++t)
            spec.cash_flows[t][i] = nodes[i].cash[t].at(epsilon);
    }
    for (const ScenarioLiability& liability : liabilities)
        spec.base_liabilities[liability.time](liability.from, liability.to) += liability.amount;
    for (const ScenarioContract& sc : contracts) {
        // Static files lift to the paper's two-period schedule: contingent
        // payouts settle one date after the claims they reference.
        const int due = mode == ScenarioMode::Dynamic ? sc.time : 1;
        spec.contracts.push_back(DynamicContract{due, sc.contract});
    }
    return spec;
}

SplitSchedule Scenario::split_schedule(double epsilon) const {
    const DynamicSpec spec = dynamic_spec(epsilon);
    if (spec.horizon() != 1)
        throw InvalidInputError("static/dynamic comparison needs a two-period schedule");
    return SplitSchedule{spec.cash_flows[0], spec.cash_flows[1]};
}

ScenarioSolver resolved_solver(const Scenario& scenario, const RunOverrides& overrides) {
    ScenarioSolver solver = scenario.solver;
    if (const char* env = std::getenv(kToleranceEnvVar)) {
        try {
            solver.tolerance = std::stod(env);
        } catch (const std::exception&) {
            throw InvalidInputError(std::string(kToleranceEnvVar) + " is not a number: " + env);
        }
    }
    if (overrides.tolerance) solver.tolerance = *overrides.tolerance;
    if (overrides.max_iterations) solver.max_iterations = *overrides.max_iterations;
    if (overrides.direction) solver.direction = *overrides.direction;
    return solver;
}

RunReport run_scenario(const Scenario& scenario, const RunOverrides& overrides) {
    const ScenarioSolver solver = resolved_solver(scenario, overrides);
    const ScenarioMode mode = overrides.mode.value_or(scenario.mode);
    const double epsilon = overrides.epsilon.value_or(scenario.epsilon_default);
    const SolveOptions opts{solver.tolerance, solver.max_iterations};

    RunReport report;
    json& doc = report.document;
    doc["schema"] = kReportSchema;
    doc["scenario"] = json{{"name", scenario.name}, {"description", scenario.description}};
    doc["mode"] = mode == ScenarioMode::Static ? "static" : "dynamic";
    doc["epsilon"] = epsilon;
    doc["solver"] = json{{"tolerance", solver.tolerance},
                         {"max_iterations", solver.max_iterations},
                         {"direction", to_string(solver.direction)},
                         {"removal_policy", to_string(solver.removal_policy)}};
    const std::vector<std::string> ids = scenario.node_ids();
    doc["nodes"] = ids;

    const auto started = std::chrono::steady_clock::now();
    try {
        if (mode == ScenarioMode::Static) {
            const LiabilitySpec spec = scenario.static_spec(epsilon);
            const NonspeculativeReport speculative = check_nonspeculative(spec, 4000);
            doc["nonspeculative"] = nonspeculative_json(speculative);

            ClearingResult result = clear_static(spec, solver.direction, opts);
            bool solved = result.converged;
            if (!solved) {
                NonexistenceDiagnosis diag = detect_nonexistence(spec, opts);
                if (diag.verdict == DiagnosisVerdict::FixedPointFound) {
                    result = diag.solution;
                    solved = true;
                } else {
                    doc["result"] = diagnosis_json(diag);
                    doc["result"]["status"] =
                        diag.verdict == DiagnosisVerdict::ConclusiveNonexistence
                            ? "nonexistence"
                            : "inconclusive";
                    report.exit_code = diag.verdict == DiagnosisVerdict::ConclusiveNonexistence
                                           ? kExitNonexistence
                                           : kExitInconclusive;
                }
            }
            if (solved) {
                if (speculative.falsified) {
                    result.warnings.push_back(
                        "system is speculative (monotonicity witness found); no uniqueness "
                        "guarantee");
                }
                bool regular_constant = spec.contracts.empty() && spec.has_society;
                for (int i = spec.first_bank(); regular_constant && i < spec.node_count; ++i)
                    regular_constant = spec.base(i, 0) > 0.0;
                doc["result"] = clearing_result_json(result, regular_constant);
                doc["audits"] = json{{"conservation",
                                      audit_json(conservation_audit(spec, result.wealths))},
                                     {"residual", result.residual}};
                for (int i = 0; i < spec.node_count; ++i) {
                    report.trajectory.push_back(
                        TrajectoryRow{0, ids[i], result.wealths[i], result.payments[i]});
                }
                report.exit_code = kExitSolved;
            }
        } else {
            const DynamicSpec spec = scenario.dynamic_spec(epsilon);
            const DynamicState state = clear_dynamic(spec, DynamicRoute::LinearSolve, opts);
            json result;
            result["status"] = "solved";
            result["times"] = state.times();
            json wealths = json::array(), payments = json::array(), totals = json::array();
            json cash = json::array(), active = json::array();
            for (int t = 0; t < state.times(); ++t) {
                wealths.push_back(vector_json(state.wealths[t]));
                payments.push_back(vector_json(state.payments[t]));
                totals.push_back(vector_json(state.totals[t]));
                cash.push_back(vector_json(state.cash[t]));
                active.push_back(state.active[t]);
            }
            result["wealths"] = std::move(wealths);
            result["payments"] = std::move(payments);
            result["totals"] = std::move(totals);
            result["cash"] = std::move(cash);
            result["active"] = std::move(active);
            result["inner_rounds"] = state.inner_rounds;
            result["step_residuals"] = state.step_residuals;
            result["recursion_residuals"] = state.recursion_residuals;
            result["regular_all_times"] = state.regular_all_times;
            result["cashflow_condition_ok"] = state.cashflow_condition_ok;
            doc["result"] = std::move(result);
            doc["audits"] =
                json{{"conservation", audit_json(conservation_audit(spec, state))},
                     {"max_step_residual",
                      *std::max_element(state.step_residuals.begin(), state.step_residuals.end())}};
            for (int t = 0; t < state.times(); ++t) {
                for (int i = 0; i < spec.node_count; ++i) {
                    report.trajectory.push_back(
                        TrajectoryRow{t, ids[i], state.wealths[t][i], state.payments[t][i]});
                }
            }
            report.exit_code = kExitSolved;
        }
    } catch (const NumericalError& err) {
        doc["result"] = json{{"status", "numerical_failure"},
                             {"message", err.what()},
                             {"best_residual", err.best_residual},
                             {"iterations", err.iterations}};
        report.exit_code = kExitInconclusive;
    }
    const auto finished = std::chrono::steady_clock::now();
    doc["timings"] = json{
        {"solve_ms",
         std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(finished - started)
             .count()}};
    doc["exit_code"] = report.exit_code;
    return report;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
    out << "time,node,wealth,payment\n";
    for (const TrajectoryRow& row : rows) {
        out << row.time << ',' << row.node << ',' << json(row.wealth).dump() << ','
            << json(row.payment).dump() << '\n';
    }
}

json report_for_check(const Scenario& scenario, const NonspeculativeReport& report,
                      double epsilon) {
    json doc;
    doc["schema"] = kReportSchema;
    doc["scenario"] = json{{"name", scenario.name}};
    doc["epsilon"] = epsilon;
    doc["check"] = nonspeculative_json(report);
    doc["check"]["seed"] = report.seed;
    return doc;
}

json report_for_diagnosis(const Scenario& scenario, const NonexistenceDiagnosis& diag,
                          double epsilon) {
    json doc;
    doc["schema"] = kReportSchema;
    doc["scenario"] = json{{"name", scenario.name}};
    doc["epsilon"] = epsilon;
    doc["diagnosis"] = diagnosis_json(diag);
    if (diag.verdict == DiagnosisVerdict::FixedPointFound)
        doc["diagnosis"]["solution"] = clearing_result_json(diag.solution, false);
    return doc;
}

json report_for_sensitivity(const Scenario& scenario, const SensitivityReport& report,
                            double epsilon) {
    json doc;
    doc["schema"] = kReportSchema;
    doc["scenario"] = json{{"name", scenario.name}};
    doc["epsilon"] = epsilon;
    json body;
    body["direction"] = to_std(report.direction);
    body["grid"] = report.grid;
    json wealths = json::array();
    for (const Vector& v : report.grid_wealths) wealths.push_back(vector_json(v));
    body["wealths"] = std::move(wealths);
    body["monotone"] = report.monotone;
    body["max_violation"] = report.max_violation;
    body["max_jump"] = report.max_jump;
    body["jump_threshold"] = report.jump_threshold;
    body["continuity_ok"] = report.continuity_ok;
    body["failure_index"] = report.failure_index;
    body["in_theorem_scope"] = report.in_theorem_scope;
    if (!report.in_theorem_scope)
        body["banner"] = "system is speculative: outside the scope of the monotonicity result";
    doc["sensitivity"] = std::move(body);
    return doc;
}

json report_for_comparison(const Scenario& scenario, const ComparisonReport& report,
                           double epsilon) {
    json doc;
    doc["schema"] = kReportSchema;
    doc["scenario"] = json{{"name", scenario.name}};
    doc["epsilon"] = epsilon;
    json body;
    body["static_solved"] = report.static_solved;
    if (report.static_solved) body["static"] = clearing_result_json(report.static_result, false);
    if (report.static_diagnosis) body["static_diagnosis"] = diagnosis_json(*report.static_diagnosis);
    body["terminal_wealths"] = vector_json(report.terminal_wealths);
    body["coincide"] = report.coincide;
    body["max_difference"] = report.max_difference;
    if (report.matching_branch) body["matching_branch"] = *report.matching_branch;
    body["note"] = report.note;
    doc["comparison"] = std::move(body);
    return doc;
}

}  // namespace contagion
