#include "contagion/analysis.hpp"

#include <cmath>

namespace contagion {

SensitivityReport sensitivity_in_assets(const LiabilitySpec& spec, const Vector& direction,
                                        int steps, const SolveOptions& opts, double jump_factor) {
    if (direction.size() != spec.node_count)
        throw InvalidInputError("direction vector size does not match node count");
    if ((direction.array() < 0.0).any())
        throw InvalidInputError("direction must be componentwise nonnegative");
    if (steps < 2) throw InvalidInputError("sensitivity grid needs at least 2 steps");

    SensitivityReport report;
    report.base_x = spec.external_assets;
    report.direction = direction;
    report.in_theorem_scope = !check_nonspeculative(spec, 2000).falsified;

    const double step_size = 1.0 / static_cast<double>(steps - 1);
    report.jump_threshold = jump_factor * step_size * sup_norm(direction);

    for (int j = 0; j < steps; ++j) {
        const double s = static_cast<double>(j) * step_size;
        const Vector x = spec.external_assets + s * direction;
        const LiabilitySpec shifted =
            make_liability_spec(spec.node_count, spec.has_society, x, spec.base, spec.contracts);
        const ClearingResult result = clear_static(shifted, Direction::Greatest, opts);
        if (!result.converged) {
            report.failure_index = j;
            break;
        }
        report.grid.push_back(s);
        report.grid_wealths.push_back(result.wealths);
        if (j > 0) {
            const Vector& prior = report.grid_wealths[report.grid_wealths.size() - 2];
            const Vector diff = result.wealths - prior;
            const double drop = -diff.minCoeff();
            report.max_violation = std::max(report.max_violation, drop);
            report.max_jump = std::max(report.max_jump, sup_norm(diff));
        }
    }
    report.monotone = report.max_violation <= 1e-8;
    report.continuity_ok =
        report.jump_threshold <= 0.0 || report.max_jump <= report.jump_threshold;
    if (!report.grid_wealths.empty()) {
        report.base_wealths = report.grid_wealths.front();
        report.perturbed_wealths = report.grid_wealths.back();
        report.perturbed_x = spec.external_assets + report.grid.back() * direction;
    }
    return report;
}

ConservationAudit conservation_audit(const LiabilitySpec& spec, const Vector& wealths,
                                     double tol) {
    ConservationAudit audit;
    audit.positive_equity = positive_part(wealths).sum();
    audit.reference_total = spec.external_assets.sum();
    audit.gap = std::abs(audit.positive_equity - audit.reference_total);
    audit.pass = audit.gap <= tol;
    return audit;
}

ConservationAudit conservation_audit(const DynamicSpec& spec, const DynamicState& state,
                                     double tol) {
    ConservationAudit audit;
    if (state.wealths.empty()) return audit;
    audit.positive_equity = positive_part(state.wealths.back()).sum();
    audit.reference_total = positive_part(state.initial_wealths).sum();
    for (const Vector& x : spec.cash_flows) audit.reference_total += x.sum();
    audit.gap = std::abs(audit.positive_equity - audit.reference_total);
    audit.pass = audit.gap <= tol;
    return audit;
}

DynamicSpec two_period_dynamic(const LiabilitySpec& spec, const SplitSchedule& split,
                               RemovalPolicy policy) {
    const int n = spec.node_count;
    if (split.assets_t0.size() != n || split.assets_t1.size() != n)
        throw InvalidInputError("split schedule size does not match node count");
    if ((split.assets_t0.array() < 0.0).any() || (split.assets_t1.array() < 0.0).any())
        throw InvalidInputError("split schedule must be nonnegative");
    if (sup_norm(split.assets_t0 + split.assets_t1 - spec.external_assets) > 1e-12)
        throw InvalidInputError("split schedule must preserve total assets");

    DynamicSpec dyn;
    dyn.node_count = n;
    dyn.has_society = spec.has_society;
    dyn.cash_flows = {split.assets_t0, split.assets_t1};
    dyn.base_liabilities = {spec.base, Matrix::Zero(n, n)};
    for (const ContingentContract& contract : spec.contracts)
        dyn.contracts.push_back(DynamicContract{1, contract});
    dyn.removal_policy = policy;
    dyn.initial_wealths = Vector::Zero(n);
    return dyn;
}

ComparisonReport compare_static_dynamic(const LiabilitySpec& spec, const SplitSchedule& split,
                                        const SolveOptions& opts, double match_tol) {
    ComparisonReport report;

    ClearingResult statics = clear_static(spec, Direction::Greatest, opts);
    if (statics.converged) {
        report.static_solved = true;
        report.static_result = std::move(statics);
    } else {
        NonexistenceDiagnosis diag = detect_nonexistence(spec, opts);
        if (diag.verdict == DiagnosisVerdict::FixedPointFound) {
            report.static_solved = true;
            report.static_result = diag.solution;
        }
        report.static_diagnosis = std::move(diag);
    }

    const DynamicSpec dyn = two_period_dynamic(spec, split);
    report.dynamic_state = clear_dynamic(dyn, DynamicRoute::LinearSolve, opts);
    report.terminal_wealths = report.dynamic_state.wealths.back();

    if (report.static_solved) {
        report.max_difference =
            sup_norm(report.terminal_wealths - report.static_result.wealths);
        report.coincide = report.max_difference <= match_tol;
        report.note = report.coincide
                          ? "terminal dynamic wealths coincide with the static equilibrium"
                          : "terminal dynamic wealths differ from the static equilibrium";
    } else if (report.static_diagnosis &&
               report.static_diagnosis->verdict == DiagnosisVerdict::ConclusiveNonexistence) {
        report.note = "no static equilibrium exists";
        for (std::size_t b = 0; b < report.static_diagnosis->branches.size(); ++b) {
            const BranchRecord& branch = report.static_diagnosis->branches[b];
            if (branch.wealths.size() == report.terminal_wealths.size() &&
                sup_norm(report.terminal_wealths - branch.wealths) <= match_tol) {
                report.matching_branch = static_cast<int>(b);
                report.note += "; terminal dynamic wealths match the inconsistent branch proposal " +
                               std::to_string(b);
                break;
            }
        }
    } else {
        report.note = "static clearing was inconclusive";
    }
    return report;
}

}  // namespace contagion
