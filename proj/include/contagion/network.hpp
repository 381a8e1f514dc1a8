#pragma once

#include "contagion/contracts.hpp"
#include "contagion/types.hpp"

#include <string>
#include <vector>

namespace contagion {

/// Interbank network with optional societal node. When the societal node is
/// present it occupies index 0, holds no obligations, and only receives.
struct FinancialNetwork {
    int node_count = 0;
    bool has_society = false;
    Vector external_assets;   // x, one entry per node, >= 0
    Matrix base_liabilities;  // L0, zero diagonal, zero society row
    std::vector<ContingentContract> contracts;

    int banks() const { return node_count - (has_society ? 1 : 0); }
    int first_bank() const { return has_society ? 1 : 0; }
};

/// Total liabilities pbar and pro-rata shares pi. Rows with pbar_i = 0 use
/// the uniform off-diagonal convention so every row still sums to 1.
struct RelativeLiabilities {
    Matrix pi;
    Vector pbar;
};

enum class Direction { Greatest, Least, Single };

const char* to_string(Direction direction);

/// Outcome of a static clearing computation. `payments` is recomputed from
/// the wealths as [pbar(V) - V^-]^+ so the payment/wealth equivalence holds
/// exactly on the stored values.
struct ClearingResult {
    Vector wealths;
    Vector payments;
    std::vector<int> defaults;  // nodes with V_i < 0
    double residual = 0.0;      // sup-norm defect of the wealth fixed point
    int iterations = 0;
    int rounds = 0;  // fictitious-default outer rounds (0 for plain iteration)
    Direction direction = Direction::Single;
    bool converged = false;
    bool monotone_iteration = true;
    bool uniqueness_guaranteed = false;
    std::vector<std::string> warnings;
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool valid() const { return violations.empty(); }
};

RelativeLiabilities total_and_relative_liabilities(const Matrix& liabilities);

/// p = [pbar - V^-]^+, the payments made by firms with wealths V.
Vector payments_from_wealth(const Vector& pbar, const Vector& wealths);

/// Clearing for a constant liability matrix (no contingent contracts).
/// Iterates the wealth fixed point V = x + Pi^T [pbar - V^-]^+ - pbar from
/// the full-payment wealth. Throws NumericalError if the iteration budget is
/// exhausted. The uniqueness flag is set for regular networks (every bank
/// owes society).
ClearingResult clear_eisenberg_noe(const FinancialNetwork& net, const SolveOptions& opts = {});

ValidationReport validate_network(const FinancialNetwork& net);

/// Compiles a network into an evaluatable liability spec (bounds, box, and
/// insurance resolution order included). Throws on invalid input.
LiabilitySpec make_liability_spec(const FinancialNetwork& net);

/// Appends a stability fund node B (last index) that owes each bank its
/// shortfall and is capitalized by `cfg.contributions`, either collected up
/// front or owed in clearing.
FinancialNetwork build_stability_fund(const FinancialNetwork& net, const StabilityFundConfig& cfg);

}  // namespace contagion
