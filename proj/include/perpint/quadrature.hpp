// Adaptive Gauss-Kronrod (G7/K15) quadrature with interval bisection.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace perpint {

struct QuadratureError : std::runtime_error {
    QuadratureError(const std::string& what, double lo, double hi)
        : std::runtime_error(what + " on subinterval [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]"),
          lo(lo), hi(hi) {}
    double lo, hi;
};

namespace quad_detail {

// abscissa, Gauss-7 weight, Kronrod-15 weight
inline constexpr double kNodes[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0,               0.204432940075298},
    {0.586087235467691, 0.0,               0.169004726639267},
    {0.864864423359769, 0.0,               0.104790010322250},
    {0.991455371120813, 0.0,               0.022935322010529},
};

template <class F>
double gk15(F&& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double g7 = kNodes[0][1] * f0;
    double k15 = kNodes[0][2] * f0;
    double kabs = kNodes[0][2] * std::fabs(f0);
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kNodes[i][0];
        const double fp = f(mid + dx);
        const double fm = f(mid - dx);
        g7 += kNodes[i][1] * (fp + fm);
        k15 += kNodes[i][2] * (fp + fm);
        kabs += kNodes[i][2] * (std::fabs(fp) + std::fabs(fm));
    }
    g7 *= half;
    k15 *= half;
    kabs *= std::fabs(half);
    const double diff = std::fabs(g7 - k15);
    // QUADPACK-style scaled estimate: relative to the L1 mass of the panel
    err = kabs > 0.0 ? kabs * std::min(1.0, std::pow(200.0 * diff / kabs, 1.5))
                     : diff;
    return k15;
}

}  // namespace quad_detail

// Integrates f over the finite interval [a, b] to the requested relative
// tolerance (with a small absolute floor). Throws QuadratureError when the
// subdivision budget is exhausted, naming the offending subinterval.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-9,
                 int max_intervals = 4000) {
    if (a == b) return 0.0;
    struct Seg { double a, b, val, err; };
    double err0;
    std::vector<Seg> segs{{a, b, quad_detail::gk15(f, a, b, err0), err0}};
    segs.reserve(64);
    for (int iter = 0; iter < max_intervals; ++iter) {
        double total = 0.0, toterr = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].val;
            toterr += segs[i].err;
            if (segs[i].err > segs[worst].err) worst = i;
        }
        if (!std::isfinite(total))
            throw QuadratureError("integrand not finite", segs[worst].a, segs[worst].b);
        if (toterr <= rel_tol * std::fabs(total) + 1e-300) return total;
        const Seg s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        if (mid <= s.a || mid >= s.b)
            throw QuadratureError("quadrature did not converge (integrand blow-up?)",
                                  s.a, s.b);
        double e1, e2;
        const double v1 = quad_detail::gk15(f, s.a, mid, e1);
        const double v2 = quad_detail::gk15(f, mid, s.b, e2);
        segs[worst] = {s.a, mid, v1, e1};
        segs.push_back({mid, s.b, v2, e2});
    }
    double wa = segs[0].a, wb = segs[0].b, we = segs[0].err;
    for (const auto& s : segs)
        if (s.err > we) { wa = s.a; wb = s.b; we = s.err; }
    throw QuadratureError("quadrature did not converge", wa, wb);
}

// Same integral computed in the log coordinate u = log(y - shift); suited
// to power-law integrands on intervals hugging a boundary at `shift`.
template <class F>
double integrate_log(F&& f, double a, double b, double shift = 0.0,
                     double rel_tol = 1e-9, int max_intervals = 4000) {
    if (a == b) return 0.0;
    const double ua = std::log(a - shift), ub = std::log(b - shift);
    return integrate(
        [&](double u) {
            const double y = shift + std::exp(u);
            return f(y) * (y - shift);
        },
        ua, ub, rel_tol, max_intervals);
}

}  // namespace perpint
