// Convergent-or-divergent decisions for improper integrals at a boundary:
// exact decision from a power-law exponent when one is available, otherwise
// extrapolation over a geometric cutoff ladder. Decisions may come back
// Unknown; callers surface that as an Inconclusive verdict rather than
// guessing.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "perpint/expr.hpp"

namespace perpint {

enum class Tri { Yes, No, Unknown };

inline Tri tri_and(Tri a, Tri b) {
    if (a == Tri::No || b == Tri::No) return Tri::No;
    if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
    return Tri::Yes;
}

inline Tri tri_or(Tri a, Tri b) {
    if (a == Tri::Yes || b == Tri::Yes) return Tri::Yes;
    if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
    return Tri::No;
}

inline Tri tri_not(Tri a) {
    if (a == Tri::Yes) return Tri::No;
    if (a == Tri::No) return Tri::Yes;
    return Tri::Unknown;
}

enum class DecisionMethod { SymbolicExponent, NumericExtrapolation };

struct ImproperDecision {
    Tri convergent = Tri::Unknown;
    DecisionMethod method = DecisionMethod::SymbolicExponent;
    // value of the integral when convergent (ladder estimate incl. tail),
    // per-octave increment when divergent
    double value = 0.0;
    double rate = 0.0;
    std::vector<double> ladder;   // cumulative cutoff-ladder values I_k
    std::string note;
};

// Decision from the integrand's local exponent. At a finite boundary the
// exponent is w.r.t. the distance h; divergent iff exponent <= -1. At
// +infinity the exponent is w.r.t. y; divergent iff exponent >= -1.
// Fitted (non-exact) exponents inside the border band come back Unknown.
ImproperDecision exponent_decide(const AsymptoticExponent& a, bool at_infinity,
                                 double border_band = 0.05);

// Cutoff-ladder decision for a non-negative integrand given numerically.
// Finite boundary: I_k = integral over [point + span*2^-k, anchor] (span =
// |anchor - point|); at infinity: I_k = integral over [anchor, anchor*2^k].
ImproperDecision ladder_decide(const std::function<double(double)>& integrand,
                               const Boundary& boundary, double anchor,
                               int k_min = 8, int k_max = 40);

// Exponent rule first, ladder fallback.
ImproperDecision decide_improper(const AsymptoticExponent& a,
                                 const std::function<double(double)>& integrand,
                                 const Boundary& boundary, double anchor);

// Numeric value of a convergent improper integral from boundary to anchor
// (tail handled by the ladder's geometric extrapolation).
double improper_value(const std::function<double(double)>& integrand,
                      const Boundary& boundary, double anchor);

}  // namespace perpint
