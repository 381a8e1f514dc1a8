#pragma once

#include "contagion/network.hpp"

#include <utility>
#include <vector>

namespace contagion {

/// How firms that default before the terminal date are treated. The paper's
/// primary reading rolls all unpaid debt forward; removal zeroes a defaulted
/// firm's new and rolled obligations as well as new claims owed to it.
enum class RemovalPolicy { RollForwardOnly, RemoveOnDefault };

const char* to_string(RemovalPolicy policy);

/// Inner solver for each time step. The linear route solves
/// (I - Pi^T Lambda) V = base directly; the Picard route iterates the wealth
/// map. Both settle the same fixed point and serve as independent checks.
enum class DynamicRoute { LinearSolve, PicardIteration };

/// A contingent obligation due at a fixed clearing date, triggered by the
/// wealths of the previous date.
struct DynamicContract {
    int due_time = 1;
    ContingentContract contract;
};

struct DynamicSpec {
    int node_count = 0;
    bool has_society = false;
    std::vector<Vector> cash_flows;        // x(t), one entry per time 0..T
    std::vector<Matrix> base_liabilities;  // L0(t)
    std::vector<DynamicContract> contracts;
    RemovalPolicy removal_policy = RemovalPolicy::RollForwardOnly;
    Vector initial_wealths;  // V(-1) >= 0; defaults to zero when empty

    int horizon() const { return static_cast<int>(cash_flows.size()) - 1; }
    int banks() const { return node_count - (has_society ? 1 : 0); }
    int first_bank() const { return has_society ? 1 : 0; }
};

/// Per-time clearing history. Arrays share the index t = 0..T once a run
/// completes; during a run they hold the prefix of settled dates.
struct DynamicState {
    Vector initial_wealths;                 // V(-1)
    std::vector<Vector> wealths;            // V(t)
    std::vector<Vector> totals;             // pbar(t), includes rolled shortfalls
    std::vector<Matrix> rel_liabilities;    // Pi(t)
    std::vector<Matrix> rel_exposure;       // A(t)
    std::vector<Vector> cash;               // c(t)
    std::vector<Vector> payments;           // [pbar(t) - V(t)^-]^+
    std::vector<std::vector<bool>> active;  // N0^t
    std::vector<int> inner_rounds;          // linear solves per step
    std::vector<double> step_residuals;     // defect of the time-t fixed point
    std::vector<double> recursion_residuals;  // defect of the exposure recursion
    bool regular_all_times = true;            // x_i(t) + L_i0(t) > 0 along the path
    bool cashflow_condition_ok = true;

    int times() const { return static_cast<int>(wealths.size()); }
    int total_rounds() const;
};

void validate_dynamic_spec(const DynamicSpec& spec);

/// Nominal liabilities L(t, V_{t-1}): scheduled obligations plus contingent
/// payouts due at t, with removed firms' rows and columns zeroed.
Matrix dynamic_liabilities(const DynamicSpec& spec, int t, const DynamicState& state);

/// Total and relative liabilities at time t. Rolled shortfalls blend into
/// the pro-rata shares weighted by the prior Pi.
std::pair<Vector, Matrix> dynamic_totals(const DynamicSpec& spec, int t, const DynamicState& state);

/// Net cash flow c(t) = x(t) + L(t)^T 1 - L(t) 1.
Vector net_cash_flow(const DynamicSpec& spec, int t, const DynamicState& state);

/// Relative exposure matrix A(t) for a candidate V(t): pro-rata shares while
/// the shortfall stays within total obligations, rescaled by the realized
/// shortfall otherwise.
Matrix relative_exposure(const DynamicSpec& spec, int t, const DynamicState& state,
                         const Vector& wealths_t);

/// Active set N0^t given the history through t-1.
std::vector<bool> default_set_update(const DynamicSpec& spec, int t, const DynamicState& state);

/// Settles time t and appends it to the state. The returned wealths satisfy
/// the time-t fixed point to the configured tolerance.
Vector clear_step(const DynamicSpec& spec, DynamicState& state, int t,
                  DynamicRoute route = DynamicRoute::LinearSolve, const SolveOptions& opts = {});

/// Runs the full horizon. Work is at most `banks` inner rounds per step.
DynamicState clear_dynamic(const DynamicSpec& spec, DynamicRoute route = DynamicRoute::LinearSolve,
                           const SolveOptions& opts = {});

}  // namespace contagion
