// Almost-sure finiteness verdicts for perpetual integrals int_0^T f(Z_s) ds
// of one-dimensional diffusions, decided through the scale/speed dichotomy:
// the path integral up to absorption is a.s. finite iff the deterministic
// integral of s*f*m converges at the absorbing boundary. Includes the n-th
// moment bound n!*(int s f m)^n and the population-genetics specialisations
// (fixation-before-extinction, drift-perturbation reduction).
#pragma once

#include <string>
#include <vector>

#include "perpint/scale_speed.hpp"

namespace perpint {

enum class Outcome { FiniteAS, InfiniteAS, Inconclusive };

const char* outcome_name(Outcome o);

struct Verdict {
    Outcome outcome = Outcome::Inconclusive;
    std::string decisive_integral;   // human-readable description of the test integral
    double value = 0.0;              // integral value when convergent,
                                     // per-octave divergence rate otherwise
    DecisionMethod method = DecisionMethod::SymbolicExponent;
    std::vector<double> ladder;      // cumulative cutoff-ladder diagnostics
    std::string note;
};

struct MomentBound {
    int order = 1;
    double integral = 0.0;           // int_0^inf s f m (dy), +inf when divergent
    double bound = 0.0;              // n! * integral^n
};

// Dichotomy at the absorbing lower boundary of a diffusion on (lo, inf):
// decides int_{lo+} f s / (s' sigma^2) dy. FiniteAS iff convergent.
// Requires the process to be absorbed in finite time a.s.; throws SpecError
// ("criterion inapplicable") when the boundary report certifies it is not.
Verdict classify_perpetual_zero(const DiffusionSpec& spec, const CoefficientExpr& f);

// Bounded-interval variant: on the event that the process exits through the
// requested boundary, decides int (s - s(bdry)) f m near that boundary.
Verdict classify_perpetual_two_sided(const DiffusionSpec& spec,
                                     const CoefficientExpr& f, Side boundary);

// E_z[(int_0^{T0} f)^n] <= n! * (int_lo^hi s f m)^n.
MomentBound moment_bound(const DiffusionSpec& spec, const CoefficientExpr& f, int n);

// Coupled system dN = sigma_N(N) dB, dX = sqrt(X(1-X)/f(N)) dW on natural
// scale: fixation precedes extinction a.s. iff int_{0+} y/(sigma^2 f) dy
// diverges. InfiniteAS = divergent = fixation a.s. first.
Verdict classify_fixation_natural_scale(const CoefficientExpr& sigma_N,
                                        const CoefficientExpr& f_timechange);

// General-drift variant of the same criterion: int_{0+} s/(s' sigma^2 f) dy.
Verdict classify_fixation_general(const DiffusionSpec& spec,
                                  const CoefficientExpr& f_timechange);

// Hypotheses on the perturbed process that are not decidable from the
// coefficients alone; the caller must assert them explicitly.
struct GirsanovAssertions {
    bool t0_finite_as = false;       // T_0 < inf a.s. for the perturbed process
    bool no_explosion = false;       // T_k -> inf, i.e. no finite-time explosion
};

// Drift perturbation b + q removed by change of measure: after verifying the
// sufficient condition sup_{(0,k)} |q/sigma| < inf on a ladder of compacts,
// the verdict is that of the unperturbed (sigma, b) pair. Throws SpecError
// when the condition cannot be verified or an assertion is missing.
Verdict girsanov_reduce(const DiffusionSpec& spec, const CoefficientExpr& q,
                        const GirsanovAssertions& assertions,
                        const CoefficientExpr& f);

}  // namespace perpint
