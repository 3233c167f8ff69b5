#include "perpint/improper.hpp"

#include <algorithm>
#include <cmath>

#include "perpint/quadrature.hpp"

namespace perpint {

namespace {

constexpr double kHuge = 1e100;

// octave [a, b] hugging the boundary; returns +inf on blow-up. A fixed
// composite rule (no adaptivity) in the log coordinate: the integrand is a
// tabulated function whose interpolation noise would defeat tight adaptive
// tolerances, while an octave in log space is smooth enough that a few
// Kronrod panels deliver far more accuracy than the ladder needs.
double octave_integral(const std::function<double(double)>& g, double a, double b,
                       bool toward_infinity, double shift) {
    for (double t : {0.05, 0.5, 0.95}) {
        const double y = a + t * (b - a);
        const double v = g(y);
        if (!std::isfinite(v) || std::fabs(v) > kHuge) return INFINITY;
    }
    const bool log_coord = toward_infinity || a - shift > 0;
    double total = 0.0;
    const int panels = 8;
    if (log_coord) {
        const double ua = std::log(a - shift), ub = std::log(b - shift);
        auto h = [&](double u) {
            const double y = shift + std::exp(u);
            return g(y) * (y - shift);
        };
        for (int i = 0; i < panels; ++i) {
            double err;
            total += quad_detail::gk15(h, ua + (ub - ua) * i / panels,
                                       ua + (ub - ua) * (i + 1) / panels, err);
        }
    } else {
        for (int i = 0; i < panels; ++i) {
            double err;
            total += quad_detail::gk15(g, a + (b - a) * i / panels,
                                       a + (b - a) * (i + 1) / panels, err);
        }
    }
    return std::isfinite(total) ? total : INFINITY;
}

}  // namespace

ImproperDecision exponent_decide(const AsymptoticExponent& a, bool at_infinity,
                                 double border_band) {
    ImproperDecision d;
    d.method = DecisionMethod::SymbolicExponent;
    if (a.identically_zero) {
        d.convergent = Tri::Yes;
        d.value = 0.0;
        return d;
    }
    if (a.super_growth) {
        d.convergent = Tri::No;
        return d;
    }
    if (a.super_decay) {
        d.convergent = Tri::Yes;
        return d;
    }
    if (!a.has_exponent) return d;
    const double p = a.exponent;
    const bool divergent = at_infinity ? (p >= -1.0) : (p <= -1.0);
    if (!a.exact && std::fabs(p + 1.0) < border_band) {
        d.note = "fitted exponent inside border band";
        return d;
    }
    if (!a.exact) d.method = DecisionMethod::NumericExtrapolation;
    d.convergent = divergent ? Tri::No : Tri::Yes;
    return d;
}

ImproperDecision ladder_decide(const std::function<double(double)>& g,
                               const Boundary& boundary, double anchor,
                               int k_min, int k_max) {
    ImproperDecision d;
    d.method = DecisionMethod::NumericExtrapolation;

    auto cut = [&](int k) -> double {  // integration limit at ladder index k
        if (boundary.at_infinity) return anchor * std::ldexp(1.0, k);
        const double span = std::fabs(anchor - boundary.point);
        const double h = span * std::ldexp(1.0, -k);
        return boundary.from_above ? boundary.point + h : boundary.point - h;
    };
    const double shift = boundary.at_infinity ? 0.0
                        : (boundary.from_above ? boundary.point : -boundary.point);
    // For a right boundary approached from below we integrate in the
    // mirrored coordinate so the log substitution still hugs the boundary.
    auto gm = boundary.from_above || boundary.at_infinity
                  ? g
                  : std::function<double(double)>([&g](double y) { return g(-y); });

    double I = 0.0;
    std::vector<double> incr;
    for (int k = k_min; k <= k_max; ++k) {
        const double prev = (k == k_min) ? anchor : cut(k - 1);
        const double lo_y = std::min(prev, cut(k));
        const double hi_y = std::max(prev, cut(k));
        const double piece =
            (!boundary.from_above && !boundary.at_infinity)
                ? octave_integral(gm, -hi_y, -lo_y, false, shift)
                : octave_integral(gm, lo_y, hi_y, boundary.at_infinity, shift);
        if (k == k_min) {
            I = piece;
        } else {
            incr.push_back(piece);
            I += piece;
        }
        d.ladder.push_back(I);
        if (!std::isfinite(I) || I > kHuge) {
            d.convergent = Tri::No;
            d.rate = INFINITY;
            d.note = "ladder overflow";
            return d;
        }
    }

    const std::size_t n = incr.size();
    if (n < 12) return d;
    const double scale = 1.0 + std::fabs(I);

    bool tiny = true;
    for (std::size_t i = n - 5; i < n; ++i)
        if (incr[i] > 1e-8 * scale) tiny = false;
    if (tiny) {
        d.convergent = Tri::Yes;
        d.value = I;
        return d;
    }

    // increment ratios over the last 10 octaves
    std::vector<double> ratios;
    for (std::size_t i = n - 10; i < n; ++i) {
        const double prev = incr[i - 1], cur = incr[i];
        if (prev <= 0 || cur < 0) return d;  // not a clean one-signed tail
        ratios.push_back(cur / prev);
    }
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    const double r_head = (ratios[0] + ratios[1] + ratios[2]) / 3.0;
    const double r_tail = (ratios[7] + ratios[8] + ratios[9]) / 3.0;

    if (med >= 0.99 && incr[n - 1] > 1e-12 * scale) {
        // increments constant or growing per octave: at least log divergence
        d.convergent = Tri::No;
        d.rate = incr[n - 1];
        return d;
    }
    if (med <= 0.98 && r_tail <= r_head + 0.004) {
        d.convergent = Tri::Yes;
        d.value = I + incr[n - 1] * med / (1.0 - med);
        return d;
    }
    d.note = "ladder behaviour indeterminate (possible logarithmic border case)";
    return d;
}

ImproperDecision decide_improper(const AsymptoticExponent& a,
                                 const std::function<double(double)>& integrand,
                                 const Boundary& boundary, double anchor) {
    ImproperDecision d = exponent_decide(a, boundary.at_infinity);
    if (d.convergent != Tri::Unknown) {
        if (d.convergent == Tri::Yes && !a.identically_zero)
            d.value = improper_value(integrand, boundary, anchor);
        return d;
    }
    return ladder_decide(integrand, boundary, anchor);
}

double improper_value(const std::function<double(double)>& g,
                      const Boundary& boundary, double anchor) {
    ImproperDecision d = ladder_decide(g, boundary, anchor);
    if (d.convergent == Tri::Yes) return d.value;
    if (!d.ladder.empty()) return d.ladder.back();
    return NAN;
}

}  // namespace perpint
