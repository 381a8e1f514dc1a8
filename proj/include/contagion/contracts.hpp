#pragma once

#include "contagion/types.hpp"

#include <string>
#include <vector>

namespace contagion {

/// Families of wealth-dependent obligations. Payouts are functions of the
/// debtor wealth vector only through its negative parts.
enum class ContractKind {
    Insurance,           // writer covers beneficiary's pro-rata loss on reference's debt
    ThresholdInsurance,  // insurance whose coverage level depends on the realized payment
    Cds,                 // writer pays eta * (reference shortfall), no insurable interest needed
    DigitalCds,          // fixed notional paid when the reference has negative wealth
    SelfInsurance,       // writer pays the beneficiary's own shortfall, scaled by eta
    StabilityFundClaim,  // fund node owes each firm its shortfall (eta = 1 in the base design)
};

const char* to_string(ContractKind kind);

/// One contingent obligation from `writer` to `beneficiary`. `reference` is
/// the node whose distress triggers the payment (ignored by the kinds that
/// key off the beneficiary's own shortfall).
struct ContingentContract {
    ContractKind kind = ContractKind::Cds;
    int writer = -1;
    int beneficiary = -1;
    int reference = -1;
    double eta = 0.0;       // coverage level; [0,1] for insurance kinds, >= 0 for CDS
    double tau = 0.0;       // payment threshold, ThresholdInsurance only
    double notional = 0.0;  // fixed payout, DigitalCds only
};

/// Evaluatable description of the nominal liability matrix L(V):
/// constant base obligations plus typed contingent contracts. Built through
/// make_liability_spec, which validates the contracts, resolves the insurance
/// evaluation order, and computes the liability upper bounds and the wealth
/// box that contains every fixed point.
struct LiabilitySpec {
    int node_count = 0;
    bool has_society = false;
    Vector external_assets;
    Matrix base;
    std::vector<ContingentContract> contracts;

    // Derived by make_liability_spec.
    Matrix upper_bounds;  // componentwise bound on L(V) over the wealth box
    Vector box_lo;        // x_i - sum_j ubar_ij
    Vector box_hi;        // x_i + sum_j ubar_ji
    std::vector<int> insurance_order;  // insurance contract indices, references first

    int banks() const { return node_count - (has_society ? 1 : 0); }
    int first_bank() const { return has_society ? 1 : 0; }
};

/// Collateral schedule for Example-style stability funds. `y` is collected
/// from each firm, either up front or as an in-clearing obligation.
enum class FundMode { PreCollected, InClearing };

struct StabilityFundConfig {
    Vector contributions;  // y, componentwise within [0, x]
    FundMode mode = FundMode::PreCollected;
};

struct TreeCheckResult {
    bool pass = true;
    std::vector<int> cycle;  // node indices of one violating chain, empty on pass
    std::string message;
};

LiabilitySpec make_liability_spec(int node_count, bool has_society, Vector external_assets,
                                  Matrix base, std::vector<ContingentContract> contracts);

/// Resolves L(V). Insurance contributions are computed along the precomputed
/// topological order so every reference row is final before it is read.
Matrix evaluate_liabilities(const LiabilitySpec& spec, const Vector& wealths);

/// Coverage coefficient for a ThresholdInsurance contract given the resolved
/// liability rows of its reference. Clamped to [0, eta]; returns 0 when the
/// realized payment from reference to beneficiary is zero.
double threshold_eta(const ContingentContract& contract, const Vector& wealths,
                     const Matrix& resolved_liabilities);

/// Componentwise upper bound ubar with evaluate_liabilities(spec, V) <= ubar
/// for every V in the wealth box. Iterates bounds -> box -> bounds; a chain
/// of contingent contracts that fails to stabilize in node_count + 1 sweeps
/// is rejected as unbounded.
Matrix upper_bound_matrix(int node_count, const Vector& external_assets, const Matrix& base,
                          const std::vector<ContingentContract>& contracts);

/// Verifies the per-beneficiary tree condition: no cyclic chain of insurance
/// contracts covering the same beneficiary.
TreeCheckResult check_insurance_tree(const std::vector<ContingentContract>& contracts,
                                     int node_count);

}  // namespace contagion
