#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "contagion/analysis.hpp"
#include "contagion/scenario.hpp"

namespace py = pybind11;
using namespace contagion;

namespace {

py::object json_to_py(const nlohmann::json& doc) {
    return py::module_::import("json").attr("loads")(doc.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Clearing engine for interbank networks with contingent payments";

    py::enum_<ContractKind>(m, "ContractKind")
        .value("Insurance", ContractKind::Insurance)
        .value("ThresholdInsurance", ContractKind::ThresholdInsurance)
        .value("Cds", ContractKind::Cds)
        .value("DigitalCds", ContractKind::DigitalCds)
        .value("SelfInsurance", ContractKind::SelfInsurance)
        .value("StabilityFundClaim", ContractKind::StabilityFundClaim);

    py::enum_<Direction>(m, "Direction")
        .value("Greatest", Direction::Greatest)
        .value("Least", Direction::Least)
        .value("Single", Direction::Single);

    py::enum_<RemovalPolicy>(m, "RemovalPolicy")
        .value("RollForwardOnly", RemovalPolicy::RollForwardOnly)
        .value("RemoveOnDefault", RemovalPolicy::RemoveOnDefault);

    py::enum_<DynamicRoute>(m, "DynamicRoute")
        .value("LinearSolve", DynamicRoute::LinearSolve)
        .value("PicardIteration", DynamicRoute::PicardIteration);

    py::enum_<DiagnosisVerdict>(m, "DiagnosisVerdict")
        .value("FixedPointFound", DiagnosisVerdict::FixedPointFound)
        .value("ConclusiveNonexistence", DiagnosisVerdict::ConclusiveNonexistence)
        .value("Inconclusive", DiagnosisVerdict::Inconclusive);

    py::enum_<FundMode>(m, "FundMode")
        .value("PreCollected", FundMode::PreCollected)
        .value("InClearing", FundMode::InClearing);

    py::class_<SolveOptions>(m, "SolveOptions")
        .def(py::init<>())
        .def(py::init([](double tolerance, int max_iterations) {
                 return SolveOptions{tolerance, max_iterations};
             }),
             py::arg("tolerance") = 1e-10, py::arg("max_iterations") = 10000)
        .def_readwrite("tolerance", &SolveOptions::tolerance)
        .def_readwrite("max_iterations", &SolveOptions::max_iterations);

    py::class_<ContingentContract>(m, "ContingentContract")
        .def(py::init([](ContractKind kind, int writer, int beneficiary, int reference,
                         double eta, double tau, double notional) {
                 ContingentContract c;
                 c.kind = kind;
                 c.writer = writer;
                 c.beneficiary = beneficiary;
                 c.reference = reference >= 0 ? reference : beneficiary;
                 c.eta = eta;
                 c.tau = tau;
                 c.notional = notional;
                 return c;
             }),
             py::arg("kind"), py::arg("writer"), py::arg("beneficiary"),
             py::arg("reference") = -1, py::arg("eta") = 0.0, py::arg("tau") = 0.0,
             py::arg("notional") = 0.0)
        .def_readwrite("kind", &ContingentContract::kind)
        .def_readwrite("writer", &ContingentContract::writer)
        .def_readwrite("beneficiary", &ContingentContract::beneficiary)
        .def_readwrite("reference", &ContingentContract::reference)
        .def_readwrite("eta", &ContingentContract::eta)
        .def_readwrite("tau", &ContingentContract::tau)
        .def_readwrite("notional", &ContingentContract::notional);

    py::class_<FinancialNetwork>(m, "FinancialNetwork")
        .def(py::init([](Vector external_assets, Matrix base_liabilities, bool has_society,
                         std::vector<ContingentContract> contracts) {
                 FinancialNetwork net;
                 net.node_count = static_cast<int>(external_assets.size());
                 net.has_society = has_society;
                 net.external_assets = std::move(external_assets);
                 net.base_liabilities = std::move(base_liabilities);
                 net.contracts = std::move(contracts);
                 return net;
             }),
             py::arg("external_assets"), py::arg("base_liabilities"),
             py::arg("has_society") = false,
             py::arg("contracts") = std::vector<ContingentContract>{})
        .def_readonly("node_count", &FinancialNetwork::node_count)
        .def_readonly("has_society", &FinancialNetwork::has_society)
        .def_readonly("external_assets", &FinancialNetwork::external_assets)
        .def_readonly("base_liabilities", &FinancialNetwork::base_liabilities)
        .def_readonly("contracts", &FinancialNetwork::contracts)
        .def_property_readonly("banks", &FinancialNetwork::banks);

    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("violations", &ValidationReport::violations)
        .def_readonly("warnings", &ValidationReport::warnings)
        .def("valid", &ValidationReport::valid);

    py::class_<LiabilitySpec>(m, "LiabilitySpec")
        .def_readonly("node_count", &LiabilitySpec::node_count)
        .def_readonly("has_society", &LiabilitySpec::has_society)
        .def_readonly("external_assets", &LiabilitySpec::external_assets)
        .def_readonly("base", &LiabilitySpec::base)
        .def_readonly("upper_bounds", &LiabilitySpec::upper_bounds)
        .def_readonly("box_lo", &LiabilitySpec::box_lo)
        .def_readonly("box_hi", &LiabilitySpec::box_hi);

    py::class_<ClearingResult>(m, "ClearingResult")
        .def_readonly("wealths", &ClearingResult::wealths)
        .def_readonly("payments", &ClearingResult::payments)
        .def_readonly("defaults", &ClearingResult::defaults)
        .def_readonly("residual", &ClearingResult::residual)
        .def_readonly("iterations", &ClearingResult::iterations)
        .def_readonly("rounds", &ClearingResult::rounds)
        .def_readonly("direction", &ClearingResult::direction)
        .def_readonly("converged", &ClearingResult::converged)
        .def_readonly("monotone_iteration", &ClearingResult::monotone_iteration)
        .def_readonly("uniqueness_guaranteed", &ClearingResult::uniqueness_guaranteed)
        .def_readonly("warnings", &ClearingResult::warnings)
        .def("__repr__", [](const ClearingResult& r) {
            return "<ClearingResult converged=" + std::string(r.converged ? "True" : "False") +
                   " residual=" + std::to_string(r.residual) + ">";
        });

    py::class_<MonotonicityWitness>(m, "MonotonicityWitness")
        .def_readonly("lower", &MonotonicityWitness::lower)
        .def_readonly("upper", &MonotonicityWitness::upper)
        .def_readonly("firm", &MonotonicityWitness::firm)
        .def_readonly("gap", &MonotonicityWitness::gap);

    py::class_<NonspeculativeReport>(m, "NonspeculativeReport")
        .def_readonly("falsified", &NonspeculativeReport::falsified)
        .def_readonly("witness", &NonspeculativeReport::witness)
        .def_readonly("strict_falsified", &NonspeculativeReport::strict_falsified)
        .def_readonly("strict_witness", &NonspeculativeReport::strict_witness)
        .def_readonly("samples", &NonspeculativeReport::samples)
        .def_readonly("strict_samples", &NonspeculativeReport::strict_samples);

    py::class_<BranchRecord>(m, "BranchRecord")
        .def_readonly("pattern", &BranchRecord::pattern)
        .def_readonly("wealths", &BranchRecord::wealths)
        .def_readonly("solved", &BranchRecord::solved)
        .def_readonly("consistent", &BranchRecord::consistent)
        .def_readonly("exhausted", &BranchRecord::exhausted)
        .def_readonly("note", &BranchRecord::note);

    py::class_<NonexistenceDiagnosis>(m, "NonexistenceDiagnosis")
        .def_readonly("verdict", &NonexistenceDiagnosis::verdict)
        .def_readonly("solution", &NonexistenceDiagnosis::solution)
        .def_readonly("cycle", &NonexistenceDiagnosis::cycle)
        .def_readonly("period", &NonexistenceDiagnosis::period)
        .def_readonly("branches", &NonexistenceDiagnosis::branches);

    py::class_<DynamicContract>(m, "DynamicContract")
        .def(py::init([](int due_time, ContingentContract contract) {
                 return DynamicContract{due_time, std::move(contract)};
             }),
             py::arg("due_time"), py::arg("contract"))
        .def_readwrite("due_time", &DynamicContract::due_time)
        .def_readwrite("contract", &DynamicContract::contract);

    py::class_<DynamicSpec>(m, "DynamicSpec")
        .def(py::init([](std::vector<Vector> cash_flows, std::vector<Matrix> base_liabilities,
                         bool has_society, std::vector<DynamicContract> contracts,
                         RemovalPolicy policy, Vector initial_wealths) {
                 DynamicSpec spec;
                 spec.node_count =
                     cash_flows.empty() ? 0 : static_cast<int>(cash_flows.front().size());
                 spec.has_society = has_society;
                 spec.cash_flows = std::move(cash_flows);
                 spec.base_liabilities = std::move(base_liabilities);
                 spec.contracts = std::move(contracts);
                 spec.removal_policy = policy;
                 spec.initial_wealths = std::move(initial_wealths);
                 return spec;
             }),
             py::arg("cash_flows"), py::arg("base_liabilities"), py::arg("has_society") = false,
             py::arg("contracts") = std::vector<DynamicContract>{},
             py::arg("removal_policy") = RemovalPolicy::RollForwardOnly,
             py::arg("initial_wealths") = Vector())
        .def_readonly("node_count", &DynamicSpec::node_count)
        .def_property_readonly("horizon", &DynamicSpec::horizon);

    py::class_<DynamicState>(m, "DynamicState")
        .def_readonly("wealths", &DynamicState::wealths)
        .def_readonly("totals", &DynamicState::totals)
        .def_readonly("payments", &DynamicState::payments)
        .def_readonly("cash", &DynamicState::cash)
        .def_readonly("rel_liabilities", &DynamicState::rel_liabilities)
        .def_readonly("rel_exposure", &DynamicState::rel_exposure)
        .def_readonly("active", &DynamicState::active)
        .def_readonly("inner_rounds", &DynamicState::inner_rounds)
        .def_readonly("step_residuals", &DynamicState::step_residuals)
        .def_property_readonly("times", &DynamicState::times)
        .def("total_rounds", &DynamicState::total_rounds);

    py::class_<ConservationAudit>(m, "ConservationAudit")
        .def_readonly("positive_equity", &ConservationAudit::positive_equity)
        .def_readonly("reference_total", &ConservationAudit::reference_total)
        .def_readonly("gap", &ConservationAudit::gap)
        .def_readonly("pass_", &ConservationAudit::pass);

    py::class_<SensitivityReport>(m, "SensitivityReport")
        .def_readonly("monotone", &SensitivityReport::monotone)
        .def_readonly("max_violation", &SensitivityReport::max_violation)
        .def_readonly("max_jump", &SensitivityReport::max_jump)
        .def_readonly("continuity_ok", &SensitivityReport::continuity_ok)
        .def_readonly("failure_index", &SensitivityReport::failure_index)
        .def_readonly("grid", &SensitivityReport::grid)
        .def_readonly("grid_wealths", &SensitivityReport::grid_wealths)
        .def_readonly("in_theorem_scope", &SensitivityReport::in_theorem_scope);

    py::class_<ComparisonReport>(m, "ComparisonReport")
        .def_readonly("static_solved", &ComparisonReport::static_solved)
        .def_readonly("static_result", &ComparisonReport::static_result)
        .def_readonly("terminal_wealths", &ComparisonReport::terminal_wealths)
        .def_readonly("coincide", &ComparisonReport::coincide)
        .def_readonly("max_difference", &ComparisonReport::max_difference)
        .def_readonly("matching_branch", &ComparisonReport::matching_branch)
        .def_readonly("note", &ComparisonReport::note);

    m.def("validate_network", &validate_network, py::arg("network"));
    m.def("make_liability_spec",
          static_cast<LiabilitySpec (*)(const FinancialNetwork&)>(&make_liability_spec),
          py::arg("network"));
    m.def("evaluate_liabilities", &evaluate_liabilities, py::arg("spec"), py::arg("wealths"));
    m.def("clear_eisenberg_noe", &clear_eisenberg_noe, py::arg("network"),
          py::arg("options") = SolveOptions{});
    m.def("clearing_map", &clearing_map, py::arg("spec"), py::arg("wealths"));
    m.def("residual", &residual, py::arg("spec"), py::arg("wealths"));
    m.def("clear_static", &clear_static, py::arg("spec"),
          py::arg("direction") = Direction::Greatest, py::arg("options") = SolveOptions{});
    m.def("fictitious_default_static", &fictitious_default_static, py::arg("spec"),
          py::arg("options") = SolveOptions{});
    m.def("check_nonspeculative", &check_nonspeculative, py::arg("spec"),
          py::arg("sample_count") = 10000, py::arg("seed") = 0x5eed);
    m.def("detect_nonexistence", &detect_nonexistence, py::arg("spec"),
          py::arg("options") = SolveOptions{});
    m.def(
        "build_stability_fund",
        [](const FinancialNetwork& net, const Vector& contributions, FundMode mode) {
            return build_stability_fund(net, StabilityFundConfig{contributions, mode});
        },
        py::arg("network"), py::arg("contributions"), py::arg("mode") = FundMode::PreCollected);
    m.def("clear_dynamic", &clear_dynamic, py::arg("spec"),
          py::arg("route") = DynamicRoute::LinearSolve, py::arg("options") = SolveOptions{});
    m.def("conservation_audit",
          static_cast<ConservationAudit (*)(const LiabilitySpec&, const Vector&, double)>(
              &conservation_audit),
          py::arg("spec"), py::arg("wealths"), py::arg("tol") = 1e-8);
    m.def("conservation_audit",
          static_cast<ConservationAudit (*)(const DynamicSpec&, const DynamicState&, double)>(
              &conservation_audit),
          py::arg("spec"), py::arg("state"), py::arg("tol") = 1e-8);
    m.def("sensitivity_in_assets", &sensitivity_in_assets, py::arg("spec"), py::arg("direction"),
          py::arg("steps") = 21, py::arg("options") = SolveOptions{},
          py::arg("jump_factor") = 10.0);
    m.def(
        "compare_static_dynamic",
        [](const LiabilitySpec& spec, const Vector& assets_t0, const Vector& assets_t1,
           const SolveOptions& options) {
            return compare_static_dynamic(spec, SplitSchedule{assets_t0, assets_t1}, options);
        },
        py::arg("spec"), py::arg("assets_t0"), py::arg("assets_t1"),
        py::arg("options") = SolveOptions{});

    m.def(
        "run_scenario_file",
        [](const std::filesystem::path& path, const std::string& mode, const std::string& direction,
           std::optional<double> epsilon, std::optional<double> tolerance) {
            const Scenario scenario = parse_scenario(path);
            RunOverrides overrides;
            if (mode == "static") overrides.mode = ScenarioMode::Static;
            else if (mode == "dynamic") overrides.mode = ScenarioMode::Dynamic;
            else if (!mode.empty()) throw InvalidInputError("mode must be static or dynamic");
            if (direction == "greatest") overrides.direction = Direction::Greatest;
            else if (direction == "least") overrides.direction = Direction::Least;
            else if (!direction.empty())
                throw InvalidInputError("direction must be greatest or least");
            overrides.epsilon = epsilon;
            overrides.tolerance = tolerance;
            const RunReport report = run_scenario(scenario, overrides);
            return py::make_tuple(report.exit_code, json_to_py(report.document));
        },
        py::arg("path"), py::arg("mode") = "", py::arg("direction") = "",
        py::arg("epsilon") = std::nullopt, py::arg("tolerance") = std::nullopt,
        "Run a scenario file; returns (exit_code, report_dict)");

    py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<ContractStructureError>(m, "ContractStructureError",
                                                   PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
}
