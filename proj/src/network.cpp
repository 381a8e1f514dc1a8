#include "contagion/network.hpp"

#include <cmath>
#include <sstream>

namespace contagion {

const char* to_string(Direction direction) {
    switch (direction) {
        case Direction::Greatest: return "greatest";
        case Direction::Least: return "least";
        case Direction::Single: return "single";
    }
    return "unknown";
}

namespace {

void require_finite_nonnegative(const Matrix& m, const char* what) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                std::ostringstream oss;
                oss << what << " entry (" << i << ", " << j << ") is " << v
                    << "; expected a finite nonnegative value";
                throw InvalidInputError(oss.str());
            }
        }
    }
}

std::vector<int> negative_nodes(const Vector& wealths) {
    std::vector<int> out;
    for (Eigen::Index i = 0; i < wealths.size(); ++i) {
        if (wealths[i] < 0.0) out.push_back(static_cast<int>(i));
    }
    return out;
}

}  // namespace

RelativeLiabilities total_and_relative_liabilities(const Matrix& liabilities) {
    require_finite_nonnegative(liabilities, "liability matrix");
    const Eigen::Index n = liabilities.rows();
    if (liabilities.cols() != n) throw InvalidInputError("liability matrix must be square");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (liabilities(i, i) != 0.0)
            throw InvalidInputError("liability matrix must have a zero diagonal");
    }

    RelativeLiabilities rl;
    rl.pbar = liabilities.rowwise().sum();
    rl.pi = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (rl.pbar[i] > 0.0) {
            rl.pi.row(i) = liabilities.row(i) / rl.pbar[i];
        } else if (n > 1) {
            // Zero-debt rows keep the matrix row-stochastic: uniform shares
            // over the other nodes, nothing to itself.
            const double share = 1.0 / static_cast<double>(n - 1);
            rl.pi.row(i).setConstant(share);
            rl.pi(i, i) = 0.0;
        }
    }
    return rl;
}

Vector payments_from_wealth(const Vector& pbar, const Vector& wealths) {
    return (pbar - negative_part(wealths)).cwiseMax(0.0);
}

ClearingResult clear_eisenberg_noe(const FinancialNetwork& net, const SolveOptions& opts) {
    if (!net.contracts.empty())
        throw InvalidInputError("clear_eisenberg_noe requires a constant liability matrix");
    const ValidationReport report = validate_network(net);
    if (!report.valid()) throw InvalidInputError("invalid network: " + report.violations.front());

    const RelativeLiabilities rl = total_and_relative_liabilities(net.base_liabilities);
    const Vector& x = net.external_assets;

    auto step = [&](const Vector& v) -> Vector {
        return x + rl.pi.transpose() * payments_from_wealth(rl.pbar, v) - rl.pbar;
    };

    // Full-payment wealth; iterates decrease monotonically toward the
    // greatest (here unique, for regular networks) clearing wealths.
    Vector wealths = x + rl.pi.transpose() * rl.pbar - rl.pbar;
    double change = std::numeric_limits<double>::infinity();
    int iterations = 0;
    for (; iterations < opts.max_iterations; ++iterations) {
        Vector next = step(wealths);
        change = sup_norm(next - wealths);
        wealths = std::move(next);
        if (change <= opts.tolerance) break;
    }
    const double defect = sup_norm(step(wealths) - wealths);
    if (change > opts.tolerance || defect > opts.tolerance)
        throw NumericalError("Eisenberg-Noe iteration did not converge", defect, iterations);

    ClearingResult result;
    result.wealths = wealths;
    result.payments = payments_from_wealth(rl.pbar, wealths);
    result.defaults = negative_nodes(wealths);
    result.residual = defect;
    result.iterations = iterations + 1;
    result.direction = Direction::Single;
    result.converged = true;

    bool regular = net.has_society;
    for (int i = net.first_bank(); regular && i < net.node_count; ++i) {
        regular = net.base_liabilities(i, 0) > 0.0;
    }
    result.uniqueness_guaranteed = regular;
    return result;
}

ValidationReport validate_network(const FinancialNetwork& net) {
    ValidationReport report;
    auto flag = [&](const std::string& message) { report.violations.push_back(message); };

    const int n = net.node_count;
    if (n <= 0) {
        flag("network has no nodes");
        return report;
    }
    if (net.external_assets.size() != n) flag("external assets size does not match node count");
    if (net.base_liabilities.rows() != n || net.base_liabilities.cols() != n)
        flag("liability matrix shape does not match node count");
    if (!report.violations.empty()) return report;

    for (int i = 0; i < n; ++i) {
        const double xi = net.external_assets[i];
        if (!std::isfinite(xi)) flag("non-finite external assets at node " + std::to_string(i));
        else if (xi < 0.0) flag("negative external assets at node " + std::to_string(i));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = net.base_liabilities(i, j);
            if (!std::isfinite(v)) {
                flag("non-finite liability from node " + std::to_string(i) + " to " +
                     std::to_string(j));
            } else if (v < 0.0) {
                flag("negative liability from node " + std::to_string(i) + " to " +
                     std::to_string(j));
            }
        }
        if (net.base_liabilities(i, i) != 0.0)
            flag("nonzero diagonal at node " + std::to_string(i));
    }
    if (net.has_society) {
        for (int j = 0; j < n; ++j) {
            if (net.base_liabilities(0, j) != 0.0) {
                flag("society with liabilities (to node " + std::to_string(j) + ")");
                break;
            }
        }
    }

    const int first = net.first_bank();
    for (std::size_t c = 0; c < net.contracts.size(); ++c) {
        const ContingentContract& contract = net.contracts[c];
        const std::string tag = "contract " + std::to_string(c);
        auto in_range = [&](int node) { return node >= 0 && node < n; };
        if (!in_range(contract.writer) || !in_range(contract.beneficiary)) {
            flag(tag + " references an unknown node");
            continue;
        }
        if (contract.writer < first) flag(tag + ": society cannot write contracts");
        if (contract.writer == contract.beneficiary) flag(tag + ": writer equals beneficiary");
        switch (contract.kind) {
            case ContractKind::Insurance:
            case ContractKind::ThresholdInsurance:
                if (!in_range(contract.reference)) flag(tag + " references an unknown node");
                else if (contract.writer == contract.reference)
                    flag(tag + ": insurer cannot insure against itself");
                if (contract.eta < 0.0 || contract.eta > 1.0)
                    flag(tag + ": insurance eta must lie in [0, 1]");
                if (contract.tau < 0.0) flag(tag + ": threshold must be nonnegative");
                break;
            case ContractKind::Cds:
            case ContractKind::DigitalCds:
                if (!in_range(contract.reference)) flag(tag + " references an unknown node");
                if (contract.eta < 0.0) flag(tag + ": eta must be nonnegative");
                if (contract.kind == ContractKind::DigitalCds && contract.notional < 0.0)
                    flag(tag + ": notional must be nonnegative");
                break;
            case ContractKind::SelfInsurance:
            case ContractKind::StabilityFundClaim:
                if (contract.eta < 0.0) flag(tag + ": eta must be nonnegative");
                break;
        }
    }

    // Over-insurance is legal input but worth flagging: total coverage on a
    // single payment above 1 is swap territory, not insurance.
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            double coverage = 0.0;
            for (const ContingentContract& contract : net.contracts) {
                const bool insurance = contract.kind == ContractKind::Insurance ||
                                       contract.kind == ContractKind::ThresholdInsurance;
                if (insurance && contract.reference == k && contract.beneficiary == j)
                    coverage += contract.eta;
            }
            if (coverage > 1.0) {
                report.warnings.push_back("over-insurance on payments from node " +
                                          std::to_string(k) + " to node " + std::to_string(j) +
                                          " (total eta " + std::to_string(coverage) + ")");
            }
        }
    }

    const TreeCheckResult tree = check_insurance_tree(net.contracts, n);
    if (!tree.pass) flag(tree.message);
    return report;
}

LiabilitySpec make_liability_spec(const FinancialNetwork& net) {
    const ValidationReport report = validate_network(net);
    if (!report.valid()) throw InvalidInputError("invalid network: " + report.violations.front());
    return make_liability_spec(net.node_count, net.has_society, net.external_assets,
                               net.base_liabilities, net.contracts);
}

FinancialNetwork build_stability_fund(const FinancialNetwork& net,
                                      const StabilityFundConfig& cfg) {
    const int n = net.node_count;
    if (cfg.contributions.size() != n)
        throw InvalidInputError("stability fund contributions size does not match node count");
    for (int i = 0; i < n; ++i) {
        const double yi = cfg.contributions[i];
        if (!std::isfinite(yi) || yi < 0.0 || yi > net.external_assets[i])
            throw InvalidInputError("stability fund contribution at node " + std::to_string(i) +
                                    " must lie in [0, x]");
        if (net.has_society && i == 0 && yi != 0.0)
            throw InvalidInputError("society does not contribute to the stability fund");
    }

    FinancialNetwork out;
    out.node_count = n + 1;  // fund node B appended last
    out.has_society = net.has_society;
    const int fund = n;

    out.external_assets = Vector::Zero(n + 1);
    out.base_liabilities = Matrix::Zero(n + 1, n + 1);
    out.base_liabilities.topLeftCorner(n, n) = net.base_liabilities;
    out.contracts = net.contracts;

    if (cfg.mode == FundMode::PreCollected) {
        out.external_assets.head(n) = net.external_assets - cfg.contributions;
        out.external_assets[fund] = cfg.contributions.sum();
    } else {
        out.external_assets.head(n) = net.external_assets;
        for (int i = net.first_bank(); i < n; ++i)
            out.base_liabilities(i, fund) = cfg.contributions[i];
    }

    for (int i = net.first_bank(); i < n; ++i) {
        ContingentContract claim;
        claim.kind = ContractKind::StabilityFundClaim;
        claim.writer = fund;
        claim.beneficiary = i;
        claim.reference = i;
        claim.eta = 1.0;
        out.contracts.push_back(claim);
    }
    return out;
}

}  // namespace contagion
