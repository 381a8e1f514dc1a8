#include "contagion/contracts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace contagion {

const char* to_string(ContractKind kind) {
    switch (kind) {
        case ContractKind::Insurance: return "insurance";
        case ContractKind::ThresholdInsurance: return "threshold_insurance";
        case ContractKind::Cds: return "cds";
        case ContractKind::DigitalCds: return "digital_cds";
        case ContractKind::SelfInsurance: return "self_insurance";
        case ContractKind::StabilityFundClaim: return "stability_fund_claim";
    }
    return "unknown";
}

namespace {

bool is_insurance(const ContingentContract& c) {
    return c.kind == ContractKind::Insurance || c.kind == ContractKind::ThresholdInsurance;
}

std::string describe_cycle(const std::vector<int>& cycle) {
    std::ostringstream oss;
    oss << "(";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        if (i) oss << ", ";
        oss << cycle[i];
    }
    oss << ")";
    return oss.str();
}

// Directed cycle search over an adjacency list; returns one cycle if found.
std::vector<int> find_cycle(const std::vector<std::vector<int>>& adjacency) {
    const int n = static_cast<int>(adjacency.size());
    std::vector<int> color(n, 0);  // 0 unvisited, 1 on stack, 2 done
    std::vector<int> parent(n, -1);

    for (int root = 0; root < n; ++root) {
        if (color[root] != 0) continue;
        std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
        color[root] = 1;
        while (!stack.empty()) {
            auto& [node, edge] = stack.back();
            if (edge < adjacency[node].size()) {
                const int next = adjacency[node][edge++];
                if (color[next] == 1) {
                    std::vector<int> cycle{next};
                    for (int v = node; v != next; v = parent[v]) cycle.push_back(v);
                    std::reverse(cycle.begin() + 1, cycle.end());
                    return cycle;
                }
                if (color[next] == 0) {
                    color[next] = 1;
                    parent[next] = node;
                    stack.emplace_back(next, 0);
                }
            } else {
                color[node] = 2;
                stack.pop_back();
            }
        }
    }
    return {};
}

// Evaluation order for insurance contracts. A contract written by w that
// references r needs r's full liability row resolved, so writers are sorted
// with references first. This is stricter than the per-beneficiary tree
// condition: a reference cycle across different beneficiaries also makes the
// row sums circular and is rejected here.
std::vector<int> insurance_topological_order(const std::vector<ContingentContract>& contracts,
                                             int node_count) {
    std::vector<int> insurance_ids;
    for (std::size_t c = 0; c < contracts.size(); ++c) {
        if (is_insurance(contracts[c])) insurance_ids.push_back(static_cast<int>(c));
    }
    if (insurance_ids.empty()) return {};

    std::vector<std::vector<int>> writer_adj(node_count);
    std::vector<int> indegree(node_count, 0);
    for (int c : insurance_ids) {
        writer_adj[contracts[c].reference].push_back(contracts[c].writer);
        ++indegree[contracts[c].writer];
    }

    std::vector<int> order_of_writer(node_count, -1);
    std::vector<int> queue;
    for (int v = 0; v < node_count; ++v) {
        if (indegree[v] == 0) queue.push_back(v);
    }
    int rank = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int v = queue[head];
        order_of_writer[v] = rank++;
        for (int w : writer_adj[v]) {
            if (--indegree[w] == 0) queue.push_back(w);
        }
    }
    if (rank != node_count) {
        const std::vector<int> cycle = find_cycle(writer_adj);
        throw ContractStructureError("cyclic insurance dependencies among nodes " +
                                     describe_cycle(cycle));
    }

    std::stable_sort(insurance_ids.begin(), insurance_ids.end(), [&](int a, int b) {
        return order_of_writer[contracts[a].writer] < order_of_writer[contracts[b].writer];
    });
    return insurance_ids;
}

}  // namespace

TreeCheckResult check_insurance_tree(const std::vector<ContingentContract>& contracts,
                                     int node_count) {
    TreeCheckResult result;
    std::vector<int> beneficiaries;
    for (const ContingentContract& c : contracts) {
        if (is_insurance(c)) beneficiaries.push_back(c.beneficiary);
    }
    std::sort(beneficiaries.begin(), beneficiaries.end());
    beneficiaries.erase(std::unique(beneficiaries.begin(), beneficiaries.end()),
                        beneficiaries.end());

    for (int j : beneficiaries) {
        std::vector<std::vector<int>> adjacency(node_count);
        for (const ContingentContract& c : contracts) {
            if (is_insurance(c) && c.beneficiary == j)
                adjacency[c.reference].push_back(c.writer);
        }
        const std::vector<int> cycle = find_cycle(adjacency);
        if (!cycle.empty()) {
            result.pass = false;
            result.cycle = cycle;
            result.message = "insurance chain for beneficiary " + std::to_string(j) +
                             " is cyclic through nodes " + describe_cycle(cycle);
            return result;
        }
    }
    result.message = "no cyclic insurance chains";
    return result;
}

double threshold_eta(const ContingentContract& contract, const Vector& wealths,
                     const Matrix& resolved_liabilities) {
    const int k = contract.reference;
    const int j = contract.beneficiary;
    const double owed = resolved_liabilities(k, j);
    const double row_total = resolved_liabilities.row(k).sum();
    const double shortfall = std::max(-wealths[k], 0.0);
    const double prorata_loss = row_total > 0.0 ? owed * shortfall / row_total : 0.0;
    const double payment = std::max(owed - prorata_loss, 0.0);
    if (payment <= 0.0) return 0.0;
    const double boosted = std::max(payment + contract.tau, 0.0);
    return contract.eta * std::min(1.0, boosted / payment);
}

Matrix evaluate_liabilities(const LiabilitySpec& spec, const Vector& wealths) {
    if (wealths.size() != spec.node_count)
        throw InvalidInputError("wealth vector size does not match node count");
    const Vector shortfall = negative_part(wealths);
    Matrix liabilities = spec.base;

    for (const ContingentContract& c : spec.contracts) {
        switch (c.kind) {
            case ContractKind::Cds:
                liabilities(c.writer, c.beneficiary) += c.eta * shortfall[c.reference];
                break;
            case ContractKind::DigitalCds:
                if (wealths[c.reference] < 0.0)
                    liabilities(c.writer, c.beneficiary) += c.notional;
                break;
            case ContractKind::SelfInsurance:
            case ContractKind::StabilityFundClaim:
                liabilities(c.writer, c.beneficiary) += c.eta * shortfall[c.beneficiary];
                break;
            case ContractKind::Insurance:
            case ContractKind::ThresholdInsurance:
                break;  // handled below in dependency order
        }
    }

    for (int id : spec.insurance_order) {
        const ContingentContract& c = spec.contracts[id];
        const int k = c.reference;
        if (shortfall[k] <= 0.0) continue;
        const double row_total = liabilities.row(k).sum();
        if (row_total <= 0.0) continue;  // no obligations, no loss to insure
        const double coverage = c.kind == ContractKind::ThresholdInsurance
                                    ? threshold_eta(c, wealths, liabilities)
                                    : c.eta;
        liabilities(c.writer, c.beneficiary) +=
            coverage * liabilities(k, c.beneficiary) / row_total * shortfall[k];
    }
    return liabilities;
}

Matrix upper_bound_matrix(int node_count, const Vector& external_assets, const Matrix& base,
                          const std::vector<ContingentContract>& contracts) {
    Matrix bounds = base;
    const int sweeps = node_count + 1;
    for (int sweep = 0; sweep <= sweeps; ++sweep) {
        // Largest shortfall any node can realize inside the current box.
        Vector shortfall_cap(node_count);
        for (int i = 0; i < node_count; ++i)
            shortfall_cap[i] = std::max(bounds.row(i).sum() - external_assets[i], 0.0);

        Matrix next = base;
        for (const ContingentContract& c : contracts) {
            switch (c.kind) {
                case ContractKind::Cds:
                    next(c.writer, c.beneficiary) += c.eta * shortfall_cap[c.reference];
                    break;
                case ContractKind::DigitalCds:
                    next(c.writer, c.beneficiary) += c.notional;
                    break;
                case ContractKind::SelfInsurance:
                case ContractKind::StabilityFundClaim:
                    next(c.writer, c.beneficiary) += c.eta * shortfall_cap[c.beneficiary];
                    break;
                case ContractKind::Insurance:
                case ContractKind::ThresholdInsurance:
                    // Pro-rata share of the reference shortfall never exceeds
                    // the shortfall itself.
                    next(c.writer, c.beneficiary) += c.eta * shortfall_cap[c.reference];
                    break;
            }
        }
        const double change = (next - bounds).cwiseAbs().maxCoeff();
        bounds = std::move(next);
        if (change <= 1e-12) return bounds;
    }
    throw ContractStructureError(
        "liability bounds did not stabilize; a contingent chain is unbounded");
}

LiabilitySpec make_liability_spec(int node_count, bool has_society, Vector external_assets,
                                  Matrix base, std::vector<ContingentContract> contracts) {
    LiabilitySpec spec;
    spec.node_count = node_count;
    spec.has_society = has_society;
    spec.external_assets = std::move(external_assets);
    spec.base = std::move(base);
    spec.contracts = std::move(contracts);

    const TreeCheckResult tree = check_insurance_tree(spec.contracts, node_count);
    if (!tree.pass) throw ContractStructureError(tree.message);
    spec.insurance_order = insurance_topological_order(spec.contracts, node_count);

    spec.upper_bounds =
        upper_bound_matrix(node_count, spec.external_assets, spec.base, spec.contracts);
    spec.box_lo = spec.external_assets - spec.upper_bounds.rowwise().sum();
    spec.box_hi = spec.external_assets + spec.upper_bounds.colwise().sum().transpose();
    return spec;
}

}  // namespace contagion
