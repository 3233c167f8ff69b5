// Scale function s and speed-measure density m for a one-dimensional SDE
// dZ = sigma(Z) dB + b(Z) dt on an interval (lo, hi):
//   s'(y) = exp(-2 * int_ref^y b/sigma^2),   m(y) = 2 / (s'(y) sigma^2(y)).
// s is tabulated once on a boundary-hugging grid and interpolated with
// cubic Hermite segments using the exact derivative at the nodes, so the
// evaluators are cheap, read-only and safe to share across threads.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "perpint/expr.hpp"
#include "perpint/improper.hpp"

namespace perpint {

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DiffusionSpec {
    CoefficientExpr sigma;
    CoefficientExpr drift;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double ref = 1.0;   // interior reference point c of the scale integral

    bool hi_finite() const { return std::isfinite(hi); }
    void validate() const;
};

enum class Side { Lower, Upper };

// Local behaviour of s' at a boundary, derived from the series expansion
// of b/sigma^2 there. The power-law exponent is w.r.t. the distance to a
// finite boundary, and w.r.t. y itself at +infinity.
struct SprimeAsym {
    bool known = false;
    bool power_law = false;
    double exponent = 0.0;
    bool exact = false;
    bool super_growth = false;
    bool super_decay = false;
};

SprimeAsym sprime_asymptotics(const DiffusionSpec& spec, Side side);

class ScaleSpeed {
public:
    static ScaleSpeed build(const DiffusionSpec& spec);

    double inner(double y) const;     // int_ref^y b/sigma^2
    double s_prime(double y) const;
    double s(double y) const;         // s(lo) = 0 whenever s(lo) is finite
    double m_density(double y) const;

    Tri s_lo_finite() const { return s_lo_finite_; }
    const DiffusionSpec& spec() const { return spec_; }
    double grid_lo() const { return nodes_.front(); }
    double grid_hi() const { return nodes_.back(); }

private:
    DiffusionSpec spec_;
    std::vector<double> nodes_;       // ascending, hugging both boundaries
    std::vector<double> inner_;       // inner integral at the nodes
    std::vector<double> s_;           // raw scale at the nodes, s_raw(ref) = 0
    Tri s_lo_finite_ = Tri::Unknown;
    double s_offset_ = 0.0;           // s_raw value of the lower-boundary limit

    double ratio(double y) const;     // b/sigma^2
    double hermite(const std::vector<double>& f, double d0, double d1,
                   std::size_t i, double y) const;
};

struct BoundarySideReport {
    double s_at_boundary = 0.0;       // +-inf when the scale diverges there
    Tri s_finite = Tri::Unknown;
    double integral_s_m = 0.0;        // int (s - s(boundary)) m near the boundary
    Tri integral_finite = Tri::Unknown;
    Tri accessible = Tri::Unknown;
    DecisionMethod method = DecisionMethod::SymbolicExponent;
};

struct BoundaryReport {
    BoundarySideReport left, right;
    Tri absorbed_in_finite_time = Tri::Unknown;
};

BoundaryReport classify_boundaries(const ScaleSpeed& ss);

// E_x[int_0^{T_lo} f(Z_t) dt] for a process absorbed at the lower boundary
// with s(hi) = +inf: quadrature of the Green formula
//   int min(s(x), s(y)) f(y) m(y) dy   (s normalized to s(lo) = 0).
double green_expected_integral(const ScaleSpeed& ss, const CoefficientExpr& f,
                               double x);

}  // namespace perpint
