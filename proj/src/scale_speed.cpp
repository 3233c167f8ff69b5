#include "perpint/scale_speed.hpp"

#include <algorithm>
#include <cmath>

#include "perpint/quadrature.hpp"

namespace perpint {

namespace {

constexpr double kGridStep = 0.02;    // log-coordinate node spacing
constexpr int kGridDepth = 46;        // boundary approach: span * 2^-46
constexpr double kInnerSat = 300.0;   // |inner| beyond which s' saturates

double clamped_exp(double x) {
    if (x > 700.0) return INFINITY;
    if (x < -700.0) return 0.0;
    return std::exp(x);
}

// geometric-tail extrapolation of a monotone node sequence toward a
// boundary; returns the limit, +-inf when the increments do not vanish
double extrapolate_limit(const std::vector<double>& vals, Tri& finite) {
    // vals: value at distances span*2^-k for increasing k (toward boundary)
    std::vector<double> incr;
    for (std::size_t i = 1; i < vals.size(); ++i)
        incr.push_back(std::fabs(vals[i] - vals[i - 1]));
    const std::size_t n = incr.size();
    if (n < 8) { finite = Tri::Unknown; return vals.back(); }
    std::vector<double> ratios;
    for (std::size_t i = n - 6; i < n; ++i) {
        if (incr[i - 1] <= 0) {  // already converged
            finite = Tri::Yes;
            return vals.back();
        }
        ratios.push_back(incr[i] / incr[i - 1]);
    }
    std::sort(ratios.begin(), ratios.end());
    const double med = ratios[ratios.size() / 2];
    const double scale = 1.0 + std::fabs(vals.back());
    if (incr[n - 1] < 1e-10 * scale) {
        finite = Tri::Yes;
        return vals.back();
    }
    if (med <= 0.98) {
        finite = Tri::Yes;
        const double sign = vals[1] > vals[0] ? 1.0 : -1.0;
        (void)sign;
        const double step = vals[vals.size() - 1] - vals[vals.size() - 2];
        return vals.back() + step * med / (1.0 - med);
    }
    if (med >= 0.99) {
        finite = Tri::No;
        return vals.back() > vals.front() ? INFINITY : -INFINITY;
    }
    finite = Tri::Unknown;
    return vals.back();
}

AsymptoticExponent to_exponent(const SprimeAsym& a) {
    AsymptoticExponent r;
    if (!a.known) return r;
    if (a.super_growth) { r.super_growth = true; r.exact = a.exact; return r; }
    if (a.super_decay) { r.super_decay = true; r.exact = a.exact; return r; }
    r.has_exponent = true;
    r.exponent = a.exponent;
    r.leading_coeff = 1.0;
    r.exact = a.exact;
    return r;
}

}  // namespace

void DiffusionSpec::validate() const {
    if (!std::isfinite(lo)) throw SpecError("lower boundary must be finite");
    if (!(lo < hi)) throw SpecError("domain interval is empty");
    if (!(ref > lo) || !(ref < hi)) throw SpecError("ref_point must lie inside the domain");
    const double upper = hi_finite() ? hi : std::max(2.0 * ref - lo, lo + 100.0);
    for (int i = 1; i < 64; ++i) {
        const double t = i / 64.0;
        // grid biased toward the boundaries, where degeneracy would hide
        const double y = lo + (upper - lo) * t * t * (3 - 2 * t);
        if (y <= lo || y >= hi) continue;
        double sv;
        if (!sigma.try_eval(y, sv) || !(sv > 0.0))
            throw SpecError("sigma must be positive on the interior (fails near y=" +
                            std::to_string(y) + ")");
        double bv;
        if (!drift.try_eval(y, bv))
            throw SpecError("drift not evaluable at interior point y=" + std::to_string(y));
    }
}

SprimeAsym sprime_asymptotics(const DiffusionSpec& spec, Side side) {
    SprimeAsym out;
    const CoefficientExpr ratio =
        expr_div(spec.drift, expr_mul(spec.sigma, spec.sigma));
    Boundary b = side == Side::Lower
                     ? Boundary::finite_above(spec.lo)
                     : (spec.hi_finite() ? Boundary::finite_below(spec.hi)
                                         : Boundary::infinity());
    const AsymptoticExponent a = exponent_at(ratio, b);
    if (a.identically_zero) {
        out.known = out.power_law = out.exact = true;
        out.exponent = 0.0;
        return out;
    }
    if (a.super_decay) {  // ratio negligible: inner integral converges
        out.known = out.power_law = true;
        out.exact = a.exact;
        out.exponent = 0.0;
        return out;
    }
    if (!a.has_exponent) return out;

    const double q = a.exponent, w = a.leading_coeff;
    const double band = a.exact ? 1e-9 : 0.05;
    const bool at_inf = !spec.hi_finite() && side == Side::Upper;
    out.exact = a.exact;

    if (std::fabs(q + 1.0) <= band) {
        // b/sigma^2 ~ w/h: s' picks up an exact power of the distance
        out.known = out.power_law = true;
        if (side == Side::Lower) out.exponent = -2.0 * w;
        else if (at_inf) out.exponent = -2.0 * w;
        else out.exponent = 2.0 * w;
        return out;
    }
    const bool integrable_side = at_inf ? (q < -1.0) : (q > -1.0);
    if (integrable_side) {
        out.known = out.power_law = true;
        out.exponent = 0.0;
        return out;
    }
    // inner integral diverges at the boundary: s' beats every power
    out.known = true;
    bool inner_to_plus_inf;
    if (side == Side::Lower) inner_to_plus_inf = w < 0;
    else inner_to_plus_inf = w > 0;
    if (inner_to_plus_inf) out.super_decay = true;   // s' = exp(-2*inner) -> 0
    else out.super_growth = true;
    return out;
}

// ---------------------------------------------------------------------------
// ScaleSpeed

double ScaleSpeed::ratio(double y) const {
    return spec_.drift.eval(y) / (spec_.sigma.eval(y) * spec_.sigma.eval(y));
}

double ScaleSpeed::hermite(const std::vector<double>& f, double d0, double d1,
                           std::size_t i, double y) const {
    const double h = nodes_[i + 1] - nodes_[i];
    const double t = (y - nodes_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f[i] + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * f[i + 1] + (t3 - t2) * h * d1;
}

ScaleSpeed ScaleSpeed::build(const DiffusionSpec& spec) {
    spec.validate();
    ScaleSpeed ss;
    ss.spec_ = spec;

    const double span_l = spec.ref - spec.lo;
    std::vector<double> nodes;
    // lower side, hugging lo
    {
        const double u_hi = std::log(span_l);
        const double u_lo = u_hi - kGridDepth * std::log(2.0);
        for (double u = u_lo; u < u_hi - 1e-12; u += kGridStep)
            nodes.push_back(spec.lo + std::exp(u));
    }
    nodes.push_back(spec.ref);
    if (spec.hi_finite()) {
        const double span_r = spec.hi - spec.ref;
        const double u_hi = std::log(span_r);
        const double u_lo = u_hi - kGridDepth * std::log(2.0);
        std::vector<double> right;
        for (double u = u_lo; u < u_hi - 1e-12; u += kGridStep)
            right.push_back(spec.hi - std::exp(u));
        std::sort(right.begin(), right.end());
        nodes.insert(nodes.end(), right.begin(), right.end());
    } else {
        const double y_max = std::max({1e6, 100.0 * spec.ref, spec.lo + 100.0 * span_l});
        const double u_max = std::log((y_max - spec.lo) / span_l);
        for (double u = kGridStep; u <= u_max; u += kGridStep)
            nodes.push_back(spec.lo + span_l * std::exp(u));
    }
    ss.nodes_ = std::move(nodes);

    const std::size_t n = ss.nodes_.size();
    ss.inner_.assign(n, 0.0);
    ss.s_.assign(n, 0.0);

    auto r = [&](double y) { return ss.ratio(y); };
    const std::size_t iref =
        std::lower_bound(ss.nodes_.begin(), ss.nodes_.end(), spec.ref) - ss.nodes_.begin();

    // cumulative inner integral outward from ref
    for (std::size_t i = iref; i-- > 0;)
        ss.inner_[i] = ss.inner_[i + 1] - integrate(r, ss.nodes_[i], ss.nodes_[i + 1], 1e-10, 200);
    std::size_t upper_cap = n - 1;
    for (std::size_t i = iref; i + 1 < n; ++i) {
        ss.inner_[i + 1] = ss.inner_[i] + integrate(r, ss.nodes_[i], ss.nodes_[i + 1], 1e-10, 200);
        if (!spec.hi_finite() && std::fabs(ss.inner_[i + 1]) > kInnerSat) {
            upper_cap = i + 1;
            break;
        }
    }
    if (upper_cap + 1 < n) {
        ss.nodes_.resize(upper_cap + 1);
        ss.inner_.resize(upper_cap + 1);
        ss.s_.resize(upper_cap + 1);
    }
    const std::size_t m = ss.nodes_.size();

    // cumulative scale integral, interpolating inner within each segment
    auto sp_on_segment = [&](std::size_t i) {
        return [&, i](double y) {
            const double v = ss.hermite(ss.inner_, ss.ratio(ss.nodes_[i]),
                                        ss.ratio(ss.nodes_[i + 1]), i, y);
            return clamped_exp(-2.0 * v);
        };
    };
    for (std::size_t i = iref; i-- > 0;)
        ss.s_[i] = ss.s_[i + 1] - integrate(sp_on_segment(i), ss.nodes_[i], ss.nodes_[i + 1], 1e-10, 200);
    for (std::size_t i = iref; i + 1 < m; ++i)
        ss.s_[i + 1] = ss.s_[i] + integrate(sp_on_segment(i), ss.nodes_[i], ss.nodes_[i + 1], 1e-10, 200);

    // lower scale limit: symbolic exponent first, tail extrapolation for the value
    const SprimeAsym asym_lo = sprime_asymptotics(spec, Side::Lower);
    std::vector<double> deep;
    for (int k = 20; k <= kGridDepth - 1; ++k) {
        const double y = spec.lo + span_l * std::ldexp(1.0, -k);
        const std::size_t i =
            std::upper_bound(ss.nodes_.begin(), ss.nodes_.end(), y) - ss.nodes_.begin();
        if (i == 0 || i >= m) continue;
        deep.push_back(ss.s_[i - 1]);
    }
    Tri numeric_finite = Tri::Unknown;
    const double limit = extrapolate_limit(deep, numeric_finite);
    if (asym_lo.known) {
        if (asym_lo.super_growth) ss.s_lo_finite_ = Tri::No;
        else if (asym_lo.super_decay) ss.s_lo_finite_ = Tri::Yes;
        else ss.s_lo_finite_ = asym_lo.exponent > -1.0 ? Tri::Yes : Tri::No;
        if (!asym_lo.exact && ss.s_lo_finite_ != numeric_finite &&
            numeric_finite != Tri::Unknown)
            ss.s_lo_finite_ = Tri::Unknown;
    } else {
        ss.s_lo_finite_ = numeric_finite;
    }
    ss.s_offset_ = ss.s_lo_finite_ == Tri::Yes ? limit : 0.0;
    return ss;
}

double ScaleSpeed::inner(double y) const {
    if (y <= nodes_.front()) {
        auto r = [&](double z) { return ratio(z); };
        return inner_.front() - integrate_log(r, y, nodes_.front(), spec_.lo, 1e-9);
    }
    if (y >= nodes_.back()) {
        if (y == nodes_.back()) return inner_.back();
        auto r = [&](double z) { return ratio(z); };
        return inner_.back() + integrate(r, nodes_.back(), y, 1e-9);
    }
    const std::size_t i =
        std::upper_bound(nodes_.begin(), nodes_.end(), y) - nodes_.begin() - 1;
    return hermite(inner_, ratio(nodes_[i]), ratio(nodes_[i + 1]), i, y);
}

double ScaleSpeed::s_prime(double y) const { return clamped_exp(-2.0 * inner(y)); }

double ScaleSpeed::s(double y) const {
    double raw;
    if (y <= nodes_.front()) {
        auto sp = [&](double z) { return s_prime(z); };
        raw = s_.front() - integrate_log(sp, y, nodes_.front(), spec_.lo, 1e-8);
    } else if (y > nodes_.back()) {
        if (std::fabs(inner_.back()) >= kInnerSat) return INFINITY;
        auto sp = [&](double z) { return s_prime(z); };
        try {
            raw = s_.back() + integrate(sp, nodes_.back(), y, 1e-8);
        } catch (const QuadratureError&) {
            return INFINITY;
        }
    } else {
        const std::size_t i =
            std::upper_bound(nodes_.begin(), nodes_.end(), y) - nodes_.begin() - 1;
        if (std::fabs(inner_[i + 1] - inner_[i]) < 0.5) {
            raw = hermite(s_, clamped_exp(-2.0 * inner_[i]),
                          clamped_exp(-2.0 * inner_[i + 1]), i, y);
        } else {
            // s' varies by orders of magnitude inside this segment: a cubic
            // through the s nodes overshoots, so integrate s' locally instead
            // (inner itself is smooth and safe to interpolate)
            const double d0 = ratio(nodes_[i]), d1 = ratio(nodes_[i + 1]);
            auto sp = [&](double z) {
                return clamped_exp(-2.0 * hermite(inner_, d0, d1, i, z));
            };
            double total = 0.0;
            const int panels = 8;
            for (int p = 0; p < panels; ++p) {
                double err;
                total += quad_detail::gk15(sp, nodes_[i] + (y - nodes_[i]) * p / panels,
                                           nodes_[i] + (y - nodes_[i]) * (p + 1) / panels,
                                           err);
            }
            raw = s_[i] + total;
        }
    }
    return raw - s_offset_;
}

double ScaleSpeed::m_density(double y) const {
    const double sv = spec_.sigma.eval(y);
    return 2.0 / (s_prime(y) * sv * sv);
}

// ---------------------------------------------------------------------------
// Boundary classification

namespace {

BoundarySideReport classify_side(const ScaleSpeed& ss, Side side) {
    const DiffusionSpec& spec = ss.spec();
    BoundarySideReport rep;
    const bool at_inf = side == Side::Upper && !spec.hi_finite();
    const Boundary bnd = side == Side::Lower
                             ? Boundary::finite_above(spec.lo)
                             : (at_inf ? Boundary::infinity()
                                       : Boundary::finite_below(spec.hi));

    // is s finite at the boundary, i.e. does int s' converge there?
    const SprimeAsym asym = sprime_asymptotics(spec, side);
    auto sp = [&ss](double y) { return ss.s_prime(y); };
    ImproperDecision sdec =
        decide_improper(to_exponent(asym), sp, bnd, spec.ref);
    rep.s_finite = sdec.convergent;
    rep.method = sdec.method;
    if (rep.s_finite == Tri::Yes) {
        if (side == Side::Lower) {
            rep.s_at_boundary = 0.0;  // convention s(lo) = 0
        } else {
            Tri fin = Tri::Unknown;
            std::vector<double> vals;
            for (int k = 8; k <= 40; ++k) {
                const double y = at_inf ? spec.ref * std::ldexp(1.0, k)
                                        : spec.hi - (spec.hi - spec.ref) * std::ldexp(1.0, -k);
                if (at_inf && y > ss.grid_hi()) break;
                vals.push_back(ss.s(y));
            }
            rep.s_at_boundary = extrapolate_limit(vals, fin);
        }
    } else if (rep.s_finite == Tri::No) {
        rep.s_at_boundary = side == Side::Lower ? -INFINITY : INFINITY;
    }

    if (at_inf) {
        // accessibility in the sense of (2.2) concerns only the lower
        // boundary; at +infinity the report carries the scale behaviour.
        rep.accessible = Tri::No;
        rep.integral_finite = Tri::Unknown;
        return rep;
    }

    if (rep.s_finite != Tri::Yes) {
        rep.accessible = rep.s_finite == Tri::No ? Tri::No : Tri::Unknown;
        return rep;
    }

    // int (s - s(boundary)) m near the boundary
    AsymptoticExponent ig;
    const AsymptoticExponent sig_e = exponent_at(spec.sigma, bnd);
    if (asym.known && asym.power_law && asym.exact && sig_e.has_exponent && sig_e.exact) {
        // (s - s(bdry)) ~ h^{p+1}, m ~ h^{-p} / sigma^2: exponent 1 - 2*sig_e
        ig.has_exponent = true;
        ig.exact = true;
        ig.leading_coeff = 1.0;
        ig.exponent = 1.0 - 2.0 * sig_e.exponent;
    }
    const double s_bdry = rep.s_at_boundary;
    auto g = [&ss, s_bdry, side](double y) {
        const double d = side == Side::Lower ? ss.s(y) - s_bdry : s_bdry - ss.s(y);
        return d * ss.m_density(y);
    };
    ImproperDecision idec = decide_improper(ig, g, bnd, spec.ref);
    rep.integral_finite = idec.convergent;
    rep.integral_s_m = idec.convergent == Tri::Yes ? idec.value : INFINITY;
    if (idec.method == DecisionMethod::NumericExtrapolation)
        rep.method = DecisionMethod::NumericExtrapolation;
    rep.accessible = tri_and(rep.s_finite, rep.integral_finite);
    return rep;
}

}  // namespace

BoundaryReport classify_boundaries(const ScaleSpeed& ss) {
    BoundaryReport rep;
    rep.left = classify_side(ss, Side::Lower);
    rep.right = classify_side(ss, Side::Upper);
    if (!ss.spec().hi_finite()) {
        // condition (2.2): s(inf) = inf, s(lo) > -inf, int (s - s(lo)) m < inf
        const Tri s_inf_infinite = tri_not(rep.right.s_finite);
        rep.absorbed_in_finite_time =
            tri_and(s_inf_infinite, rep.left.accessible);
    } else {
        // accessibility conditions (i)-(iii) on a bounded interval
        const Tri i1 = tri_and(rep.left.accessible, rep.right.accessible);
        const Tri i2 = tri_and(rep.left.accessible, tri_not(rep.right.s_finite));
        const Tri i3 = tri_and(rep.right.accessible, tri_not(rep.left.s_finite));
        rep.absorbed_in_finite_time = tri_or(i1, tri_or(i2, i3));
    }
    return rep;
}

double green_expected_integral(const ScaleSpeed& ss, const CoefficientExpr& f,
                               double x) {
    const double sx = ss.s(x);
    auto below = [&](double y) { return ss.s(y) * f.eval(y) * ss.m_density(y); };
    auto above = [&](double y) { return f.eval(y) * ss.m_density(y); };
    const double lower = improper_value(below, Boundary::finite_above(ss.spec().lo), x);
    const double upper = ss.spec().hi_finite()
                             ? integrate(above, x, ss.spec().hi, 1e-9)
                             : improper_value(above, Boundary::infinity(), x);
    return lower + sx * upper;
}

}  // namespace perpint
