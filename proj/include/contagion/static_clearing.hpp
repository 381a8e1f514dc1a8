#pragma once

#include "contagion/network.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace contagion {

/// One step of the simultaneous-claims wealth map
///   Phi(V) = x + Pi(V)^T [pbar(V) - V^-]^+ - pbar(V).
Vector clearing_map(const LiabilitySpec& spec, const Vector& wealths);

/// Sup-norm fixed-point defect ||Phi(V) - V||_inf.
double residual(const LiabilitySpec& spec, const Vector& wealths);

/// Monotone iteration of Phi from a corner of the wealth box. For a
/// nonspeculative system this converges to the greatest (top corner) or
/// least (bottom corner) equilibrium. The result is certified purely by the
/// recomputed residual; when the iterate sequence is not monotone a warning
/// is attached since extremality is then not guaranteed.
ClearingResult clear_static(const LiabilitySpec& spec, Direction direction,
                            const SolveOptions& opts = {});

/// Fictitious default algorithm for specs with L(V) = L(-V^-). Tracks the
/// default set across outer rounds and solves the per-round maximal fixed
/// point by monotone iteration from the top of the wealth box. Throws
/// NumericalError (carrying the round and default set) when an inner loop or
/// the outer loop fails to settle.
ClearingResult fictitious_default_static(const LiabilitySpec& spec, const SolveOptions& opts = {});

struct MonotonicityWitness {
    Vector lower;
    Vector upper;
    int firm = -1;
    double gap = 0.0;
};

/// Sampling falsifier verdict for the nonspeculative property. `falsified`
/// refers to the per-firm clearing map; `strict_falsified` to the strict
/// increase of the society inflow on the negative orthant.
struct NonspeculativeReport {
    bool falsified = false;
    std::optional<MonotonicityWitness> witness;
    bool strict_falsified = false;
    std::optional<MonotonicityWitness> strict_witness;
    int samples = 0;
    int strict_samples = 0;
    std::uint64_t seed = 0;
};

/// Draws ordered wealth pairs V <= V' in the box and tests componentwise
/// monotonicity of the per-firm map. A witness is a falsification; absence
/// of one is only evidence. Deterministic for a fixed seed.
NonspeculativeReport check_nonspeculative(const LiabilitySpec& spec, int sample_count,
                                          std::uint64_t seed = 0x5eed);

enum class DiagnosisVerdict { FixedPointFound, ConclusiveNonexistence, Inconclusive };

const char* to_string(DiagnosisVerdict verdict);

/// Record for one indicator pattern of the branch enumeration. `exhausted`
/// means no fixed point of the branch system can satisfy the pattern, which
/// is certified through the branch's extremal solutions.
struct BranchRecord {
    std::vector<bool> pattern;
    Vector wealths;  // representative branch solution (greatest when available)
    bool solved = false;
    bool consistent = false;
    bool exhausted = false;
    bool extremal_certified = false;
    std::string note;
};

struct NonexistenceDiagnosis {
    DiagnosisVerdict verdict = DiagnosisVerdict::Inconclusive;
    ClearingResult solution;     // valid when verdict == FixedPointFound
    std::vector<Vector> cycle;   // alternating states detected by iteration
    int period = 0;
    std::vector<BranchRecord> branches;
    std::vector<Vector> trace;   // tail of iterates when inconclusive
};

/// Diagnoses why plain iteration failed. Runs cycle detection, retries from
/// the cycle mean, and for systems whose only discontinuities are digital
/// indicators enumerates every indicator pattern. All branches inconsistent
/// is a conclusive nonexistence certificate; a consistent branch yields the
/// fixed point instead.
NonexistenceDiagnosis detect_nonexistence(const LiabilitySpec& spec, const SolveOptions& opts = {});

}  // namespace contagion
