#include "contagion/dynamic_clearing.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numeric>
#include <sstream>

namespace contagion {

const char* to_string(RemovalPolicy policy) {
    switch (policy) {
        case RemovalPolicy::RollForwardOnly: return "roll_forward_only";
        case RemovalPolicy::RemoveOnDefault: return "remove_on_default";
    }
    return "unknown";
}

int DynamicState::total_rounds() const {
    return std::accumulate(inner_rounds.begin(), inner_rounds.end(), 0);
}

namespace {

Vector previous_wealths(const DynamicSpec& spec, int t, const DynamicState& state) {
    if (t == 0) {
        if (state.initial_wealths.size() == spec.node_count) return state.initial_wealths;
        return Vector::Zero(spec.node_count);
    }
    return state.wealths[t - 1];
}

// Rolled shortfalls owed at time t. Removal extinguishes the rolled debt of
// firms dropped from the active set.
Vector rolled_shortfall(const DynamicSpec& spec, int t, const DynamicState& state,
                        const std::vector<bool>& active) {
    Vector roll = negative_part(previous_wealths(spec, t, state));
    for (int i = 0; i < spec.node_count; ++i) {
        if (!active[i]) roll[i] = 0.0;
    }
    return roll;
}

std::string set_to_string(const std::vector<char>& mask) {
    std::ostringstream oss;
    oss << "{";
    bool first = true;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        if (!first) oss << ", ";
        oss << i;
        first = false;
    }
    oss << "}";
    return oss.str();
}

}  // namespace

void validate_dynamic_spec(const DynamicSpec& spec) {
    const int n = spec.node_count;
    if (n <= 0) throw InvalidInputError("dynamic spec has no nodes");
    if (spec.cash_flows.empty()) throw InvalidInputError("dynamic spec has an empty horizon");
    if (spec.base_liabilities.size() != spec.cash_flows.size())
        throw InvalidInputError("cash flows and scheduled liabilities cover different horizons");
    const int T = spec.horizon();
    for (int t = 0; t <= T; ++t) {
        if (spec.cash_flows[t].size() != n)
            throw InvalidInputError("cash flow vector size mismatch at time " + std::to_string(t));
        for (int i = 0; i < n; ++i) {
            const double v = spec.cash_flows[t][i];
            if (!std::isfinite(v) || v < 0.0)
                throw InvalidInputError("cash flow must be finite and nonnegative at time " +
                                        std::to_string(t) + ", node " + std::to_string(i));
        }
        const Matrix& L = spec.base_liabilities[t];
        if (L.rows() != n || L.cols() != n)
            throw InvalidInputError("liability matrix shape mismatch at time " + std::to_string(t));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double v = L(i, j);
                if (!std::isfinite(v) || v < 0.0)
                    throw InvalidInputError("liabilities must be finite and nonnegative at time " +
                                            std::to_string(t));
            }
            if (L(i, i) != 0.0)
                throw InvalidInputError("nonzero diagonal at time " + std::to_string(t) +
                                        ", node " + std::to_string(i));
        }
        if (spec.has_society && L.row(0).sum() != 0.0)
            throw InvalidInputError("society with liabilities at time " + std::to_string(t));
    }
    if (spec.initial_wealths.size() != 0) {
        if (spec.initial_wealths.size() != n)
            throw InvalidInputError("initial wealth vector size mismatch");
        for (int i = 0; i < n; ++i) {
            if (!(spec.initial_wealths[i] >= 0.0))
                throw InvalidInputError(
                    "all firms must start solvent: initial wealth is negative at node " +
                    std::to_string(i));
        }
    }
    for (const DynamicContract& dc : spec.contracts) {
        if (dc.due_time < 0 || dc.due_time > T)
            throw InvalidInputError("contract due time outside the horizon");
        const ContingentContract& c = dc.contract;
        auto in_range = [&](int node) { return node >= 0 && node < n; };
        if (!in_range(c.writer) || !in_range(c.beneficiary) ||
            (!in_range(c.reference) && c.kind != ContractKind::SelfInsurance &&
             c.kind != ContractKind::StabilityFundClaim))
            throw InvalidInputError("contract references an unknown node");
        if (c.writer == c.beneficiary)
            throw InvalidInputError("contract writer equals beneficiary");
        if (spec.has_society && c.writer == 0)
            throw InvalidInputError("society cannot write contracts");
    }
}

std::vector<bool> default_set_update(const DynamicSpec& spec, int t, const DynamicState& state) {
    if (t == 0) return std::vector<bool>(spec.node_count, true);
    std::vector<bool> active = state.active[t - 1];
    if (spec.removal_policy == RemovalPolicy::RemoveOnDefault) {
        for (int i = 0; i < spec.node_count; ++i) {
            if (state.wealths[t - 1][i] < 0.0) active[i] = false;
        }
    }
    return active;
}

Matrix dynamic_liabilities(const DynamicSpec& spec, int t, const DynamicState& state) {
    const std::vector<bool> active = default_set_update(spec, t, state);
    Matrix liabilities = spec.base_liabilities[t];
    const Vector prev = previous_wealths(spec, t, state);
    const Vector shortfall = negative_part(prev);

    for (const DynamicContract& dc : spec.contracts) {
        if (dc.due_time != t) continue;
        const ContingentContract& c = dc.contract;
        double payout = 0.0;
        switch (c.kind) {
            case ContractKind::Cds:
                payout = c.eta * shortfall[c.reference];
                break;
            case ContractKind::DigitalCds:
                payout = prev[c.reference] < 0.0 ? c.notional : 0.0;
                break;
            case ContractKind::SelfInsurance:
            case ContractKind::StabilityFundClaim:
                payout = c.eta * shortfall[c.beneficiary];
                break;
            case ContractKind::Insurance:
            case ContractKind::ThresholdInsurance: {
                // Insurance pays on the realized pro-rata loss of the prior
                // clearing date.
                if (t == 0 || shortfall[c.reference] <= 0.0) break;
                const double share = state.rel_liabilities[t - 1](c.reference, c.beneficiary);
                const double loss = share * shortfall[c.reference];
                double coverage = c.eta;
                if (c.kind == ContractKind::ThresholdInsurance) {
                    const double paid =
                        share * std::max(state.totals[t - 1][c.reference] -
                                             shortfall[c.reference], 0.0);
                    coverage = paid > 0.0
                                   ? c.eta * std::min(1.0, std::max(paid + c.tau, 0.0) / paid)
                                   : 0.0;
                }
                payout = coverage * loss;
                break;
            }
        }
        liabilities(c.writer, c.beneficiary) += payout;
    }

    for (int i = 0; i < spec.node_count; ++i) {
        if (active[i]) continue;
        liabilities.row(i).setZero();
        liabilities.col(i).setZero();
    }
    return liabilities;
}

std::pair<Vector, Matrix> dynamic_totals(const DynamicSpec& spec, int t,
                                         const DynamicState& state) {
    const int n = spec.node_count;
    const std::vector<bool> active = default_set_update(spec, t, state);
    const Matrix liabilities = dynamic_liabilities(spec, t, state);
    const Vector roll = rolled_shortfall(spec, t, state, active);

    Vector pbar = liabilities.rowwise().sum() + roll;
    Matrix pi = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (pbar[i] > 0.0) {
            for (int j = 0; j < n; ++j) {
                const double prior_share =
                    t > 0 ? state.rel_liabilities[t - 1](i, j) : 0.0;
                pi(i, j) = (liabilities(i, j) + prior_share * roll[i]) / pbar[i];
            }
        } else if (n > 1) {
            const double share = 1.0 / static_cast<double>(n - 1);
            pi.row(i).setConstant(share);
            pi(i, i) = 0.0;
        }
    }
    return {std::move(pbar), std::move(pi)};
}

Vector net_cash_flow(const DynamicSpec& spec, int t, const DynamicState& state) {
    const Matrix liabilities = dynamic_liabilities(spec, t, state);
    return spec.cash_flows[t] + liabilities.colwise().sum().transpose() -
           liabilities.rowwise().sum();
}

Matrix relative_exposure(const DynamicSpec& spec, int t, const DynamicState& state,
                         const Vector& wealths_t) {
    const int n = spec.node_count;
    const std::vector<bool> active = default_set_update(spec, t, state);
    const Matrix liabilities = dynamic_liabilities(spec, t, state);
    const auto [pbar, pi] = dynamic_totals(spec, t, state);
    const Vector roll = rolled_shortfall(spec, t, state, active);
    const Vector shortfall = negative_part(wealths_t);

    Matrix exposure = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (shortfall[i] <= 1e-15 || (active[i] && pbar[i] >= shortfall[i] - 1e-12)) {
            exposure.row(i) = pi.row(i);
        } else {
            for (int j = 0; j < n; ++j) {
                const double prior = t > 0 ? state.rel_exposure[t - 1](i, j) : 0.0;
                exposure(i, j) = (liabilities(i, j) + prior * roll[i]) / shortfall[i];
            }
        }
    }
    return exposure;
}

Vector clear_step(const DynamicSpec& spec, DynamicState& state, int t, DynamicRoute route,
                  const SolveOptions& opts) {
    const int n = spec.node_count;
    if (static_cast<int>(state.wealths.size()) != t)
        throw InvalidInputError("history is incomplete through time " + std::to_string(t - 1));

    const std::vector<bool> active = default_set_update(spec, t, state);
    const Matrix liabilities = dynamic_liabilities(spec, t, state);
    auto [pbar, pi] = dynamic_totals(spec, t, state);
    const Vector cash = spec.cash_flows[t] + liabilities.colwise().sum().transpose() -
                        liabilities.rowwise().sum();

    const Vector prev = previous_wealths(spec, t, state);
    const Vector prev_pos = positive_part(prev);
    // Wealth when every active firm pays in full; the fictitious default
    // iteration only moves down from here.
    const Vector full_payment = prev_pos + spec.cash_flows[t] + pi.transpose() * pbar - pbar;

    auto time_t_map = [&](const Vector& w) -> Vector {
        Vector pay = payments_from_wealth(pbar, w);
        for (int i = 0; i < n; ++i) {
            if (!active[i]) pay[i] = 0.0;
        }
        return prev_pos + spec.cash_flows[t] + pi.transpose() * pay - pbar;
    };

    Vector wealths;
    int rounds = 0;
    if (route == DynamicRoute::LinearSolve) {
        Vector v = full_payment;
        std::vector<char> defaulting_prev(n, 0);
        bool settled = false;
        for (int k = 1; k <= spec.banks() + 1; ++k) {
            std::vector<char> defaulting(n, 0);
            for (int i = spec.first_bank(); i < n; ++i)
                defaulting[i] = (active[i] && v[i] < 0.0) ? 1 : 0;
            if (defaulting == defaulting_prev) {
                wealths = v;
                settled = true;
                break;
            }
            Matrix system = Matrix::Identity(n, n);
            for (int j = 0; j < n; ++j) {
                if (defaulting[j]) system.col(j) -= pi.row(j).transpose();
            }
            const Eigen::PartialPivLU<Matrix> lu(system);
            Vector solved = lu.solve(full_payment);
            if (!solved.allFinite() ||
                sup_norm(system * solved - full_payment) > 1e-9 * (1.0 + sup_norm(full_payment))) {
                throw NumericalError("singular linear system at time " + std::to_string(t) +
                                         ", round " + std::to_string(k) + " with default set " +
                                         set_to_string(defaulting),
                                     0.0, k);
            }
            v = std::move(solved);
            defaulting_prev = std::move(defaulting);
            ++rounds;
        }
        if (!settled)
            throw NumericalError("fictitious default set did not settle at time " +
                                     std::to_string(t),
                                 sup_norm(time_t_map(v) - v), rounds);
    } else {
        Vector v = full_payment;
        bool settled = false;
        // Stop well below the certification tolerance: the iterate lags the
        // fixed point by about change * rho / (1 - rho).
        const double stop = std::max(opts.tolerance * 1e-3, 4e-16);
        for (int it = 0; it < opts.max_iterations; ++it) {
            Vector next = time_t_map(v);
            ++rounds;
            const double change = sup_norm(next - v);
            v = std::move(next);
            if (change <= stop) {
                settled = true;
                break;
            }
        }
        if (!settled)
            throw NumericalError("time-" + std::to_string(t) + " wealth iteration did not converge",
                                 sup_norm(time_t_map(v) - v), rounds);
        wealths = std::move(v);
    }

    const double step_residual = sup_norm(time_t_map(wealths) - wealths);
    if (step_residual > std::max(opts.tolerance, 1e-10) * (1.0 + sup_norm(wealths)))
        throw NumericalError("time-" + std::to_string(t) + " wealths failed certification",
                             step_residual, rounds);

    const Matrix exposure = relative_exposure(spec, t, state, wealths);

    // The exposure-based recursion is an independent restatement of the
    // fixed point; under roll-forward it must agree with the solved wealths.
    double recursion_residual = 0.0;
    if (spec.removal_policy == RemovalPolicy::RollForwardOnly) {
        const Matrix prev_exposure =
            t > 0 ? state.rel_exposure[t - 1] : Matrix::Zero(n, n);
        const Vector recursed = prev + cash - exposure.transpose() * negative_part(wealths) +
                                prev_exposure.transpose() * negative_part(prev);
        recursion_residual = sup_norm(wealths - recursed);
    }

    Vector payments = payments_from_wealth(pbar, wealths);
    for (int i = 0; i < n; ++i) {
        if (!active[i]) payments[i] = 0.0;
    }

    state.wealths.push_back(wealths);
    state.totals.push_back(std::move(pbar));
    state.rel_liabilities.push_back(std::move(pi));
    state.rel_exposure.push_back(exposure);
    state.cash.push_back(cash);
    state.payments.push_back(std::move(payments));
    state.active.push_back(active);
    state.inner_rounds.push_back(rounds);
    state.step_residuals.push_back(step_residual);
    state.recursion_residuals.push_back(recursion_residual);

    for (int i = spec.first_bank(); i < n; ++i) {
        if (!active[i]) continue;
        const double society_claim = spec.has_society ? liabilities(i, 0) : 0.0;
        if (!(spec.cash_flows[t][i] + society_claim > 0.0)) state.regular_all_times = false;
        double interbank_in = 0.0;
        for (int j = spec.first_bank(); j < n; ++j) interbank_in += liabilities(j, i);
        if (cash[i] < interbank_in - liabilities.row(i).sum() - 1e-12)
            state.cashflow_condition_ok = false;
    }
    return wealths;
}

DynamicState clear_dynamic(const DynamicSpec& spec, DynamicRoute route, const SolveOptions& opts) {
    validate_dynamic_spec(spec);
    DynamicState state;
    state.initial_wealths = spec.initial_wealths.size() == spec.node_count
                                ? spec.initial_wealths
                                : Vector::Zero(spec.node_count);
    for (int t = 0; t <= spec.horizon(); ++t) clear_step(spec, state, t, route, opts);
    return state;
}

}  // namespace contagion
