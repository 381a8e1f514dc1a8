#pragma once

#include "contagion/dynamic_clearing.hpp"
#include "contagion/static_clearing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace contagion {

/// Comparative statics of clearing wealths along an asset ramp
/// x + s * direction, s on a uniform grid in [0, 1].
struct SensitivityReport {
    Vector base_x;
    Vector perturbed_x;
    Vector base_wealths;
    Vector perturbed_wealths;
    Vector direction;
    bool monotone = true;
    double max_violation = 0.0;  // largest componentwise decrease between grid points
    double max_jump = 0.0;       // largest sup-norm step between grid points
    double jump_threshold = 0.0;
    bool continuity_ok = true;
    int failure_index = -1;  // grid index where clearing failed, -1 if none
    std::vector<double> grid;
    std::vector<Vector> grid_wealths;
    bool in_theorem_scope = true;  // false when the spec was falsified as speculative
};

SensitivityReport sensitivity_in_assets(const LiabilitySpec& spec, const Vector& direction,
                                        int steps = 21, const SolveOptions& opts = {},
                                        double jump_factor = 10.0);

/// Positive-equity conservation audit: at a certified static fixed point the
/// total positive equity equals total external assets; over a dynamic run it
/// equals initial positive equity plus all cash inflows.
struct ConservationAudit {
    double positive_equity = 0.0;
    double reference_total = 0.0;
    double gap = 0.0;
    bool pass = false;
};

ConservationAudit conservation_audit(const LiabilitySpec& spec, const Vector& wealths,
                                     double tol = 1e-8);
ConservationAudit conservation_audit(const DynamicSpec& spec, const DynamicState& state,
                                     double tol = 1e-8);

/// Assignment of a static problem's external assets to the two dates of the
/// paper-style dynamic reading (base claims at t = 0, contingent at t = 1).
struct SplitSchedule {
    Vector assets_t0;
    Vector assets_t1;
};

/// Builds the two-period dynamic spec corresponding to a static spec.
DynamicSpec two_period_dynamic(const LiabilitySpec& spec, const SplitSchedule& split,
                               RemovalPolicy policy = RemovalPolicy::RollForwardOnly);

struct ComparisonReport {
    bool static_solved = false;
    ClearingResult static_result;
    std::optional<NonexistenceDiagnosis> static_diagnosis;
    DynamicState dynamic_state;
    Vector terminal_wealths;
    bool coincide = false;       // terminal wealths match the static solution
    double max_difference = 0.0;
    std::optional<int> matching_branch;  // branch proposal matched on static nonexistence
    std::string note;
};

/// Clears the same system in both frameworks and reports whether the
/// terminal dynamic wealths reproduce a static equilibrium (or, under static
/// nonexistence, one of the inconsistent branch proposals).
ComparisonReport compare_static_dynamic(const LiabilitySpec& spec, const SplitSchedule& split,
                                        const SolveOptions& opts = {}, double match_tol = 1e-8);

}  // namespace contagion
