#include "perpint/classifier.hpp"

#include <cmath>

#include "perpint/quadrature.hpp"

namespace perpint {

namespace {

Verdict from_decision(const ImproperDecision& d, std::string description) {
    Verdict v;
    v.decisive_integral = std::move(description);
    v.method = d.method;
    v.ladder = d.ladder;
    v.note = d.note;
    switch (d.convergent) {
        case Tri::Yes:
            v.outcome = Outcome::FiniteAS;
            v.value = d.value;
            break;
        case Tri::No:
            v.outcome = Outcome::InfiniteAS;
            v.value = d.rate;
            break;
        case Tri::Unknown:
            v.outcome = Outcome::Inconclusive;
            break;
    }
    return v;
}

// Exponent of f * (s - s(bdry)) / (s' sigma^2) in the boundary distance:
// (s - s(bdry)) ~ h^{p+1} and 1/s' ~ h^{-p} cancel to a single power of h,
// so the exponent is e_f + 1 - 2 e_sigma whenever all pieces are exact.
AsymptoticExponent compose_integrand_exponent(const SprimeAsym& sprime,
                                              const AsymptoticExponent& ef,
                                              const AsymptoticExponent& esig) {
    AsymptoticExponent out;
    if (!(sprime.known && sprime.power_law && sprime.exact)) return out;
    if (!esig.has_exponent || !esig.exact) return out;
    if (ef.identically_zero) {
        out.identically_zero = true;
        out.exact = true;
        return out;
    }
    if (ef.super_decay || ef.super_growth) {
        out.super_decay = ef.super_decay;
        out.super_growth = ef.super_growth;
        out.exact = ef.exact;
        return out;
    }
    if (!ef.has_exponent) return out;
    out.has_exponent = true;
    out.exact = ef.exact;
    out.exponent = ef.exponent + 1.0 - 2.0 * esig.exponent;
    out.leading_coeff = 1.0;
    return out;
}

void check_nonnegative(const CoefficientExpr& f, const DiffusionSpec& spec) {
    const double span = spec.ref - spec.lo;
    for (int k = 0; k <= 40; ++k) {
        const double y = spec.lo + span * std::ldexp(1.0, -k);
        double v;
        if (f.try_eval(y, v) && v < 0.0)
            throw SpecError("integrand f must be non-negative (f(" +
                            std::to_string(y) + ") < 0)");
    }
    const double upper = spec.hi_finite() ? spec.hi : spec.ref + 64.0 * span;
    for (int i = 1; i < 64; ++i) {
        const double y = spec.ref + (upper - spec.ref) * i / 64.0;
        double v;
        if (y < spec.hi && f.try_eval(y, v) && v < 0.0)
            throw SpecError("integrand f must be non-negative (f(" +
                            std::to_string(y) + ") < 0)");
    }
}

Verdict classify_at_side(const ScaleSpeed& ss, const BoundaryReport& rep,
                         const CoefficientExpr& f, Side side,
                         std::string description) {
    const DiffusionSpec& spec = ss.spec();
    const Boundary bnd = side == Side::Lower ? Boundary::finite_above(spec.lo)
                                             : Boundary::finite_below(spec.hi);
    const BoundarySideReport& srep = side == Side::Lower ? rep.left : rep.right;
    if (srep.s_finite == Tri::No)
        throw SpecError("criterion inapplicable: scale diverges at the requested "
                        "boundary, which is therefore never reached");

    const SprimeAsym sprime = sprime_asymptotics(spec, side);
    const AsymptoticExponent ef = exponent_at(f, bnd);
    const AsymptoticExponent esig = exponent_at(spec.sigma, bnd);
    const AsymptoticExponent composed = compose_integrand_exponent(sprime, ef, esig);

    const double s_bdry = side == Side::Lower ? 0.0 : srep.s_at_boundary;
    auto g = [&ss, &f, s_bdry, side](double y) {
        const double d = side == Side::Lower ? ss.s(y) : s_bdry - ss.s(y);
        return f.eval(y) * d * ss.m_density(y);
    };
    ImproperDecision dec = decide_improper(composed, g, bnd, spec.ref);
    return from_decision(dec, std::move(description));
}

}  // namespace

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::FiniteAS: return "FiniteAS";
        case Outcome::InfiniteAS: return "InfiniteAS";
        default: return "Inconclusive";
    }
}

Verdict classify_perpetual_zero(const DiffusionSpec& spec, const CoefficientExpr& f) {
    if (spec.hi_finite())
        throw SpecError("classify_perpetual_zero expects a domain (lo, inf); "
                        "use the two-sided classifier on bounded intervals");
    check_nonnegative(f, spec);
    const ScaleSpeed ss = ScaleSpeed::build(spec);
    const BoundaryReport rep = classify_boundaries(ss);
    if (rep.absorbed_in_finite_time == Tri::No)
        throw SpecError("criterion inapplicable: process is not absorbed at the "
                        "lower boundary in finite time a.s.");
    Verdict v = classify_at_side(ss, rep, f, Side::Lower,
                                 "int_{lo+} f(y) s(y) / (s'(y) sigma^2(y)) dy");
    if (rep.absorbed_in_finite_time == Tri::Unknown) {
        v.outcome = Outcome::Inconclusive;
        v.note = "absorption in finite time could not be certified; " + v.note;
    }
    return v;
}

Verdict classify_perpetual_two_sided(const DiffusionSpec& spec,
                                     const CoefficientExpr& f, Side boundary) {
    if (!spec.hi_finite())
        throw SpecError("two-sided classifier requires a bounded interval");
    check_nonnegative(f, spec);
    const ScaleSpeed ss = ScaleSpeed::build(spec);
    const BoundaryReport rep = classify_boundaries(ss);
    if (rep.absorbed_in_finite_time == Tri::No)
        throw SpecError("criterion inapplicable: none of the accessibility "
                        "conditions holds on this interval");
    const std::string desc =
        boundary == Side::Lower
            ? "int_{a+} (s(y) - s(a)) f(y) m(y) dy"
            : "int^{b-} (s(b) - s(y)) f(y) m(y) dy";
    Verdict v = classify_at_side(ss, rep, f, boundary, desc);
    if (rep.absorbed_in_finite_time == Tri::Unknown) {
        v.outcome = Outcome::Inconclusive;
        v.note = "exit in finite time could not be certified; " + v.note;
    }
    return v;
}

MomentBound moment_bound(const DiffusionSpec& spec, const CoefficientExpr& f, int n) {
    if (n < 1) throw SpecError("moment order must be >= 1");
    check_nonnegative(f, spec);
    const ScaleSpeed ss = ScaleSpeed::build(spec);
    const BoundaryReport rep = classify_boundaries(ss);
    if (rep.absorbed_in_finite_time == Tri::No)
        throw SpecError("criterion inapplicable: process is not absorbed at the "
                        "lower boundary in finite time a.s.");

    auto g = [&ss, &f](double y) { return ss.s(y) * f.eval(y) * ss.m_density(y); };

    const Boundary lo_b = Boundary::finite_above(spec.lo);
    const SprimeAsym sp_lo = sprime_asymptotics(spec, Side::Lower);
    const AsymptoticExponent comp_lo = compose_integrand_exponent(
        sp_lo, exponent_at(f, lo_b), exponent_at(spec.sigma, lo_b));
    ImproperDecision d_lo = decide_improper(comp_lo, g, lo_b, spec.ref);

    const Boundary hi_b = spec.hi_finite() ? Boundary::finite_below(spec.hi)
                                           : Boundary::infinity();
    AsymptoticExponent comp_hi;  // symbolic route only for power-law scale at infinity
    if (!spec.hi_finite()) {
        const SprimeAsym sp_hi = sprime_asymptotics(spec, Side::Upper);
        if (sp_hi.known && sp_hi.power_law && sp_hi.exact &&
            sp_hi.exponent > -1.0 + 1e-9)
            comp_hi = compose_integrand_exponent(sp_hi, exponent_at(f, hi_b),
                                                 exponent_at(spec.sigma, hi_b));
    } else {
        const SprimeAsym sp_hi = sprime_asymptotics(spec, Side::Upper);
        comp_hi = compose_integrand_exponent(sp_hi, exponent_at(f, hi_b),
                                             exponent_at(spec.sigma, hi_b));
    }
    ImproperDecision d_hi = decide_improper(comp_hi, g, hi_b, spec.ref);

    MomentBound mb;
    mb.order = n;
    if (d_lo.convergent == Tri::No || d_hi.convergent == Tri::No) {
        mb.integral = INFINITY;
        mb.bound = INFINITY;
        return mb;
    }
    if (d_lo.convergent == Tri::Unknown || d_hi.convergent == Tri::Unknown)
        throw SpecError("moment bound undetermined: improper integral of s f m "
                        "could not be decided");
    mb.integral = improper_value(g, lo_b, spec.ref) + improper_value(g, hi_b, spec.ref);
    mb.bound = std::tgamma(n + 1.0) * std::pow(mb.integral, n);
    return mb;
}

Verdict classify_fixation_natural_scale(const CoefficientExpr& sigma_N,
                                        const CoefficientExpr& f_timechange) {
    // fixation precedes extinction a.s. iff int_{0+} y/(sigma^2 f) dy = +inf
    const CoefficientExpr g = expr_div(
        expr_var(), expr_mul(expr_mul(sigma_N, sigma_N), f_timechange));
    const Boundary bnd = Boundary::zero();
    const AsymptoticExponent a = exponent_at(g, bnd);
    auto eval = [&g](double y) { return g.eval(y); };
    ImproperDecision dec = decide_improper(a, eval, bnd, 1.0);
    Verdict v = from_decision(dec, "int_{0+} y / (sigma^2(y) f(y)) dy");
    if (v.outcome == Outcome::InfiniteAS)
        v.note = "divergent: fixation occurs before extinction a.s.";
    else if (v.outcome == Outcome::FiniteAS)
        v.note = "convergent: extinction before fixation has positive probability";
    return v;
}

Verdict classify_fixation_general(const DiffusionSpec& spec,
                                  const CoefficientExpr& f_timechange) {
    const ScaleSpeed ss = ScaleSpeed::build(spec);
    const Boundary bnd = Boundary::finite_above(spec.lo);
    const SprimeAsym sprime = sprime_asymptotics(spec, Side::Lower);

    // s/(s' sigma^2 f) ~ h^{1 - 2 e_sigma - e_f}
    AsymptoticExponent composed;
    const AsymptoticExponent ef = exponent_at(f_timechange, bnd);
    const AsymptoticExponent esig = exponent_at(spec.sigma, bnd);
    if (sprime.known && sprime.power_law && sprime.exact && ef.has_exponent &&
        ef.exact && esig.has_exponent && esig.exact) {
        composed.has_exponent = true;
        composed.exact = true;
        composed.leading_coeff = 1.0;
        composed.exponent = 1.0 - 2.0 * esig.exponent - ef.exponent;
    }
    auto g = [&ss, &f_timechange](double y) {
        const double sig = ss.spec().sigma.eval(y);
        return ss.s(y) / (ss.s_prime(y) * sig * sig * f_timechange.eval(y));
    };
    ImproperDecision dec = decide_improper(composed, g, bnd, spec.ref);
    Verdict v = from_decision(dec, "int_{lo+} s(y) / (s'(y) sigma^2(y) f(y)) dy");
    if (v.outcome == Outcome::InfiniteAS)
        v.note = "divergent: fixation occurs before extinction a.s.";
    else if (v.outcome == Outcome::FiniteAS)
        v.note = "convergent: extinction before fixation has positive probability";
    return v;
}

Verdict girsanov_reduce(const DiffusionSpec& spec, const CoefficientExpr& q,
                        const GirsanovAssertions& assertions,
                        const CoefficientExpr& f) {
    if (!assertions.t0_finite_as)
        throw SpecError("girsanov reduction requires the caller to assert "
                        "T_0 < inf a.s. for the perturbed process");
    if (!assertions.no_explosion)
        throw SpecError("girsanov reduction requires the caller to assert "
                        "T_k -> inf (no explosion) for the perturbed process");

    // sufficient condition: sup_{(lo, k)} |q/sigma| < inf for every k
    const CoefficientExpr qs = expr_div(q, spec.sigma);
    const AsymptoticExponent a = exponent_at(qs, Boundary::finite_above(spec.lo));
    const double neg_band = a.exact ? 1e-9 : 0.02;
    if (a.super_growth || (a.has_exponent && a.exponent < -neg_band))
        throw SpecError("Novikov-type condition not verifiable: |q/sigma| is "
                        "unbounded near the lower boundary");
    const double span = spec.ref - spec.lo;
    for (double k = 1.0; k <= 1024.0; k *= 2.0) {
        const double upper = spec.hi_finite() ? std::min(spec.lo + k, spec.hi)
                                              : spec.lo + k;
        for (int i = 0; i <= 200; ++i) {
            const double y = i < 100
                                 ? spec.lo + span * std::ldexp(1.0, -(i % 100) / 2 - 1)
                                 : spec.lo + (upper - spec.lo) * (i - 99) / 101.0;
            if (y <= spec.lo || y >= upper) continue;
            double v;
            if (!qs.try_eval(y, v) || !std::isfinite(v) || std::fabs(v) > 1e12)
                throw SpecError("Novikov-type condition not verifiable: |q/sigma| "
                                "exceeds the bound check near y=" + std::to_string(y));
        }
        if (spec.hi_finite() && upper == spec.hi) break;
    }

    Verdict v = classify_perpetual_zero(spec, f);
    v.note = "verdict transferred from the unperturbed (sigma, b) pair by "
             "removal of the drift perturbation q" +
             (v.note.empty() ? "" : "; " + v.note);
    return v;
}

}  // namespace perpint
