#include "contagion/static_clearing.hpp"

#include <algorithm>
#include <deque>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace contagion {

const char* to_string(DiagnosisVerdict verdict) {
    switch (verdict) {
        case DiagnosisVerdict::FixedPointFound: return "fixed_point_found";
        case DiagnosisVerdict::ConclusiveNonexistence: return "conclusive_nonexistence";
        case DiagnosisVerdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

Vector clearing_map(const LiabilitySpec& spec, const Vector& wealths) {
    const Matrix liabilities = evaluate_liabilities(spec, wealths);
    const RelativeLiabilities rl = total_and_relative_liabilities(liabilities);
    const Vector payments = payments_from_wealth(rl.pbar, wealths);
    return spec.external_assets + rl.pi.transpose() * payments - rl.pbar;
}

double residual(const LiabilitySpec& spec, const Vector& wealths) {
    return sup_norm(clearing_map(spec, wealths) - wealths);
}

namespace {

enum class MonotoneTrack { None, Down, Up };

struct IterationOutcome {
    Vector wealths;
    int iterations = 0;
    bool converged = false;
    bool monotone = true;
    double defect = std::numeric_limits<double>::infinity();
};

IterationOutcome iterate_map(const LiabilitySpec& spec, Vector start, double damping,
                             MonotoneTrack track, const SolveOptions& opts) {
    IterationOutcome out;
    Vector v = std::move(start);
    while (out.iterations < opts.max_iterations) {
        Vector image = clearing_map(spec, v);
        Vector next = damping == 1.0 ? std::move(image) : Vector(damping * image + (1.0 - damping) * v);
        ++out.iterations;
        const double change = sup_norm(next - v);
        if (track == MonotoneTrack::Down && (next.array() > v.array() + 1e-12).any())
            out.monotone = false;
        if (track == MonotoneTrack::Up && (next.array() < v.array() - 1e-12).any())
            out.monotone = false;
        v = std::move(next);
        if (change <= opts.tolerance) {
            out.defect = residual(spec, v);
            if (out.defect <= opts.tolerance) {
                out.converged = true;
                break;
            }
        }
    }
    if (!out.converged) out.defect = residual(spec, v);
    out.wealths = std::move(v);
    return out;
}

ClearingResult assemble_result(const LiabilitySpec& spec, const Vector& wealths, int iterations,
                               int rounds, Direction direction, bool converged, bool monotone,
                               double defect) {
    ClearingResult result;
    result.wealths = wealths;
    const Matrix liabilities = evaluate_liabilities(spec, wealths);
    const RelativeLiabilities rl = total_and_relative_liabilities(liabilities);
    result.payments = payments_from_wealth(rl.pbar, wealths);
    for (int i = 0; i < spec.node_count; ++i) {
        if (wealths[i] < 0.0) result.defaults.push_back(i);
    }
    result.residual = defect;
    result.iterations = iterations;
    result.rounds = rounds;
    result.direction = direction;
    result.converged = converged;
    result.monotone_iteration = monotone;
    if (!monotone) {
        result.warnings.push_back(
            "iterate sequence was not monotone; extremality of the limit is not guaranteed "
            "(the system may be speculative)");
    }
    return result;
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

ClearingResult clear_static(const LiabilitySpec& spec, Direction direction,
                            const SolveOptions& opts) {
    const bool greatest = direction != Direction::Least;
    const Vector start = greatest ? spec.box_hi : spec.box_lo;
    IterationOutcome out = iterate_map(spec, start, 1.0,
                                       greatest ? MonotoneTrack::Down : MonotoneTrack::Up, opts);
    return assemble_result(spec, out.wealths, out.iterations, 0, direction, out.converged,
                           out.monotone, out.defect);
}

ClearingResult fictitious_default_static(const LiabilitySpec& spec, const SolveOptions& opts) {
    const int n = spec.node_count;

    // The algorithm only sees wealths through the masked vector Lambda * V,
    // so it requires sign dependence: L(V) = L(-V^-). Probe a mixed corner.
    {
        Vector probe(n);
        for (int i = 0; i < n; ++i) probe[i] = (i % 2 == 0) ? spec.box_hi[i] : spec.box_lo[i];
        const Matrix a = evaluate_liabilities(spec, probe);
        const Matrix b = evaluate_liabilities(spec, -negative_part(probe));
        if ((a - b).cwiseAbs().maxCoeff() > 1e-9)
            throw InvalidInputError("fictitious default requires L(V) = L(-V^-)");
    }

    Vector v = clearing_map(spec, Vector::Zero(n));
    std::vector<char> defaulting_prev(n, 0);
    int rounds = 0;
    int iterations = 1;

    for (int k = 1; k <= spec.banks() + 1; ++k) {
        std::vector<char> defaulting(n, 0);
        for (int i = spec.first_bank(); i < n; ++i) defaulting[i] = v[i] < 0.0 ? 1 : 0;
        if (defaulting == defaulting_prev) {
            const double defect = residual(spec, v);
            return assemble_result(spec, v, iterations, rounds, Direction::Greatest,
                                   defect <= opts.tolerance, true, defect);
        }

        // Maximal solution of the round-k subproblem, iterated down from the
        // top of the wealth box. Firms outside the default set pay in full.
        Vector inner = spec.box_hi;
        bool settled = false;
        for (int it = 0; it < opts.max_iterations; ++it) {
            Vector masked = Vector::Zero(n);
            for (int i = 0; i < n; ++i) {
                if (defaulting[i]) masked[i] = inner[i];
            }
            const Matrix liabilities = evaluate_liabilities(spec, masked);
            const RelativeLiabilities rl = total_and_relative_liabilities(liabilities);
            Vector pay = rl.pbar;
            for (int i = 0; i < n; ++i) {
                if (defaulting[i]) pay[i] = std::max(rl.pbar[i] + inner[i], 0.0);
            }
            Vector next = spec.external_assets + rl.pi.transpose() * pay - rl.pbar;
            ++iterations;
            const double change = sup_norm(next - inner);
            inner = std::move(next);
            if (change <= opts.tolerance) {
                settled = true;
                break;
            }
        }
        if (!settled) {
            throw NumericalError("fictitious default inner fixed point did not converge at round " +
                                     std::to_string(k) + " with default set " +
                                     set_to_string(defaulting),
                                 residual(spec, inner), iterations);
        }
        v = std::move(inner);
        defaulting_prev = std::move(defaulting);
        ++rounds;
    }
    throw NumericalError("fictitious default set did not settle within the bank count",
                         residual(spec, v), iterations);
}

NonspeculativeReport check_nonspeculative(const LiabilitySpec& spec, int sample_count,
                                          std::uint64_t seed) {
    if (sample_count < 1) throw InvalidInputError("sample_count must be at least 1");
    NonspeculativeReport report;
    report.seed = seed;
    const int n = spec.node_count;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int s = 0; s < sample_count; ++s) {
        Vector lower(n), upper(n);
        for (int i = 0; i < n; ++i) {
            const double width = spec.box_hi[i] - spec.box_lo[i];
            lower[i] = spec.box_lo[i] + unit(rng) * width;
            const double bump = unit(rng) < 0.5 ? 0.0 : unit(rng) * 0.5 * width;
            upper[i] = std::min(lower[i] + bump, spec.box_hi[i]);
        }
        ++report.samples;
        const Vector map_lower = clearing_map(spec, lower);
        const Vector map_upper = clearing_map(spec, upper);
        for (int i = 0; i < n; ++i) {
            if (map_lower[i] > map_upper[i] + 1e-9) {
                report.falsified = true;
                report.witness = MonotonicityWitness{lower, upper, i, map_lower[i] - map_upper[i]};
                break;
            }
        }
        if (report.falsified) break;
    }

    // Strict increase of the society inflow on the negative orthant. With no
    // society, or a box that never reaches the orthant, there is nothing to
    // sample and the strict verdict stays unfalsified.
    if (spec.has_society) {
        const Vector lo = spec.box_lo.cwiseMin(0.0);
        auto inflow = [&](const Vector& v) { return clearing_map(spec, v)[0] - spec.external_assets[0]; };
        for (int s = 0; s < sample_count; ++s) {
            Vector lower(n), upper(n);
            bool distinct = false;
            for (int i = 0; i < n; ++i) {
                lower[i] = lo[i] + unit(rng) * (0.0 - lo[i]);
                const double bump = unit(rng) * 0.5 * (0.0 - lo[i]);
                upper[i] = std::min(lower[i] + bump, 0.0);
                distinct = distinct || upper[i] > lower[i];
            }
            if (!distinct) continue;
            ++report.strict_samples;
            const double g_lower = inflow(lower);
            const double g_upper = inflow(upper);
            if (g_upper <= g_lower + 1e-12) {
                report.strict_falsified = true;
                report.strict_witness =
                    MonotonicityWitness{lower, upper, 0, g_lower - g_upper};
                break;
            }
        }
    }
    return report;
}

namespace {

struct BranchProblem {
    const LiabilitySpec* spec;
    std::vector<int> digitals;
    SolveOptions opts;

    BranchRecord evaluate(unsigned mask) const {
        BranchRecord rec;
        Matrix base = spec->base;
        std::vector<ContingentContract> rest;
        for (std::size_t c = 0; c < spec->contracts.size(); ++c) {
            const ContingentContract& contract = spec->contracts[c];
            if (contract.kind != ContractKind::DigitalCds) {
                rest.push_back(contract);
            }
        }
        for (std::size_t d = 0; d < digitals.size(); ++d) {
            const bool triggered = (mask >> d) & 1u;
            rec.pattern.push_back(triggered);
            if (triggered) {
                const ContingentContract& contract = spec->contracts[digitals[d]];
                base(contract.writer, contract.beneficiary) += contract.notional;
            }
        }
        const LiabilitySpec branch = make_liability_spec(
            spec->node_count, spec->has_society, spec->external_assets, base, rest);
        const ClearingResult greatest = clear_static(branch, Direction::Greatest, opts);
        const ClearingResult least = clear_static(branch, Direction::Least, opts);
        rec.extremal_certified = greatest.converged && least.converged &&
                                 greatest.monotone_iteration && least.monotone_iteration;
        if (greatest.converged) {
            rec.solved = true;
            rec.wealths = greatest.wealths;
        } else if (least.converged) {
            rec.solved = true;
            rec.wealths = least.wealths;
        }

        auto consistent_at = [&](const Vector& v) {
            for (std::size_t d = 0; d < digitals.size(); ++d) {
                const int ref = spec->contracts[digitals[d]].reference;
                if (rec.pattern[d] != (v[ref] < 0.0)) return false;
            }
            return true;
        };

        // Exhaustion through the extremal solutions: if even the greatest
        // wealth is negative where the pattern assumes solvency (or the least
        // is solvent where it assumes default), no fixed point of the branch
        // can be consistent.
        for (std::size_t d = 0; d < digitals.size() && !rec.exhausted; ++d) {
            const int ref = spec->contracts[digitals[d]].reference;
            if (!rec.pattern[d] && greatest.converged && greatest.wealths[ref] < 0.0) {
                rec.exhausted = true;
                rec.note = "every fixed point of this branch has node " + std::to_string(ref) +
                           " insolvent, contradicting the assumed solvency";
            } else if (rec.pattern[d] && least.converged && least.wealths[ref] >= 0.0) {
                rec.exhausted = true;
                rec.note = "every fixed point of this branch has node " + std::to_string(ref) +
                           " solvent, contradicting the assumed default";
            }
        }
        if (!rec.exhausted) {
            if (greatest.converged && consistent_at(greatest.wealths)) {
                rec.consistent = true;
                rec.wealths = greatest.wealths;
            } else if (least.converged && consistent_at(least.wealths)) {
                rec.consistent = true;
                rec.wealths = least.wealths;
            } else if (rec.note.empty()) {
                rec.note = "branch could not be settled conclusively";
            }
        }
        return rec;
    }
};

}  // namespace

NonexistenceDiagnosis detect_nonexistence(const LiabilitySpec& spec, const SolveOptions& opts) {
    NonexistenceDiagnosis diag;

    for (Direction direction : {Direction::Greatest, Direction::Least}) {
        ClearingResult result = clear_static(spec, direction, opts);
        if (result.converged) {
            diag.verdict = DiagnosisVerdict::FixedPointFound;
            diag.solution = std::move(result);
            return diag;
        }
    }

    // Plain iteration with a short memory window; a revisited state means
    // the map is alternating among finitely many states.
    constexpr int kWindow = 8;
    constexpr double kCycleTol = 1e-8;
    std::deque<Vector> window;
    Vector v = spec.box_hi;
    for (int it = 0; it < opts.max_iterations && diag.cycle.empty(); ++it) {
        Vector next = clearing_map(spec, v);
        for (std::size_t idx = 0; idx < window.size(); ++idx) {
            if (sup_norm(next - window[idx]) <= kCycleTol) {
                diag.cycle.assign(window.begin() + static_cast<long>(idx), window.end());
                diag.period = static_cast<int>(diag.cycle.size());
                break;
            }
        }
        window.push_back(next);
        if (window.size() > kWindow) window.pop_front();
        v = std::move(next);
    }

    if (!diag.cycle.empty()) {
        // A cycle is not yet a verdict: restart from its mean, which often
        // sits in the basin of an interior fixed point, plainly and damped.
        Vector mean = Vector::Zero(spec.node_count);
        for (const Vector& state : diag.cycle) mean += state;
        mean /= static_cast<double>(diag.cycle.size());
        for (double damping : {1.0, 0.5}) {
            IterationOutcome out = iterate_map(spec, mean, damping, MonotoneTrack::None, opts);
            if (out.converged) {
                diag.verdict = DiagnosisVerdict::FixedPointFound;
                diag.solution = assemble_result(spec, out.wealths, out.iterations, 0,
                                                Direction::Single, true, true, out.defect);
                diag.solution.warnings.push_back(
                    "fixed point located by restarting from the mean of an iteration cycle; "
                    "extremality is not guaranteed");
                return diag;
            }
        }
    } else {
        diag.trace.assign(window.begin(), window.end());
    }

    // Indicator-driven systems admit exhaustive case analysis: freeze every
    // digital trigger pattern, clear the resulting continuous system, and
    // check the pattern against the realized signs.
    std::vector<int> digitals;
    for (std::size_t c = 0; c < spec.contracts.size(); ++c) {
        if (spec.contracts[c].kind == ContractKind::DigitalCds)
            digitals.push_back(static_cast<int>(c));
    }
    if (!digitals.empty() && digitals.size() <= 12) {
        const BranchProblem problem{&spec, digitals, opts};
        const unsigned pattern_count = 1u << digitals.size();
        diag.branches.resize(pattern_count);
        if (pattern_count > 64) {
            const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
            const unsigned chunk = (pattern_count + workers - 1) / workers;
            std::vector<std::future<void>> futures;
            for (unsigned w = 0; w < workers; ++w) {
                futures.push_back(std::async(std::launch::async, [&, w] {
                    const unsigned begin = w * chunk;
                    const unsigned end = std::min(pattern_count, begin + chunk);
                    for (unsigned mask = begin; mask < end; ++mask)
                        diag.branches[mask] = problem.evaluate(mask);
                }));
            }
            for (auto& f : futures) f.get();
        } else {
            for (unsigned mask = 0; mask < pattern_count; ++mask)
                diag.branches[mask] = problem.evaluate(mask);
        }

        bool all_exhausted = true;
        for (const BranchRecord& rec : diag.branches) {
            if (rec.consistent && rec.solved) {
                const double defect = residual(spec, rec.wealths);
                if (defect <= opts.tolerance) {
                    diag.verdict = DiagnosisVerdict::FixedPointFound;
                    diag.solution = assemble_result(spec, rec.wealths, 0, 0, Direction::Single,
                                                    true, true, defect);
                    diag.solution.warnings.push_back(
                        "fixed point located by indicator branch enumeration");
                    return diag;
                }
            }
            all_exhausted = all_exhausted && rec.exhausted && rec.extremal_certified;
        }
        if (all_exhausted) {
            diag.verdict = DiagnosisVerdict::ConclusiveNonexistence;
            return diag;
        }
    }

    diag.verdict = DiagnosisVerdict::Inconclusive;
    return diag;
}

}  // namespace contagion
