// Monte Carlo SDE engine: Euler-Maruyama with full truncation, threshold
// absorption, proactive power-of-two step adaptation near boundaries, and
// running trapezoid path integrals. Covers single diffusions dZ = sigma dB
// + b dt, the coupled population/frequency system (N, X), the L-allele
// Wright-Fisher system via its nested-ratio representation, and the random
// time change inverting A(u) = int_0^u 1/f(N_s) ds.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "perpint/scale_speed.hpp"

namespace perpint {

inline constexpr std::uint64_t kDefaultSeed = 0xD1FF0510ull;

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scheme { EulerFullTruncation, EulerReflected };

struct SimConfig {
    double dt = 1e-3;             // base time step
    double dt_max = 0.0;          // far-from-boundary cap; 0 means no growth past dt
    double eta = 0.1;             // step scale as a fraction of boundary distance
    double absorption_eps = 1e-6; // declare absorption within eps of a boundary
    double t_budget = 1e4;
    std::uint64_t seed = kDefaultSeed;
    Scheme scheme = Scheme::EulerFullTruncation;
    int max_halvings = 30;        // dt refinement floor dt * 2^-max_halvings
    std::uint64_t context = 1;    // RNG stream context id
    std::uint64_t trajectory = 0; // RNG stream trajectory index
    bool store_path = false;
    std::uint64_t path_stride = 1;
    int snapshot_levels = 0;      // geometric distance levels for truncated integrals
};

enum class BoundaryHit { None, Lower, Upper };

struct Trajectory {
    BoundaryHit absorbed = BoundaryHit::None;
    double absorption_time = 0.0;
    std::uint64_t absorption_step = 0;
    double final_time = 0.0;
    double final_state = 0.0;
    std::uint64_t steps = 0;
    std::vector<double> integrals;               // one running total per integrand
    std::vector<double> snapshot_distances;      // d0 * 2^-j, j = 1..snapshot_levels
    std::vector<std::vector<double>> snapshots;  // [integrand][level], NaN = not crossed
    std::vector<double> times, states;           // sampled path when store_path
    std::vector<std::vector<double>> integral_path;  // [integrand][sample]
};

Trajectory simulate_1d(const DiffusionSpec& spec, double x0, const SimConfig& cfg,
                       const std::vector<CoefficientExpr>& integrands);

// dN = sigma_N(N) dB + b_N(N) dt,  dX = selection*X(1-X) dt + sqrt(X(1-X)/f(N)) dW
struct CoupledSpec {
    CoefficientExpr sigma_N;
    CoefficientExpr drift_N;
    CoefficientExpr f;            // time-change integrand, typically f(y) = y
    double selection = 0.0;
};

enum class RaceOutcome { FixationFirst, ExtinctionFirst, Undecided };

struct CoupledTrajectory {
    RaceOutcome outcome = RaceOutcome::Undecided;
    double event_time = 0.0;      // time of the deciding event
    double final_time = 0.0;
    double final_n = 0.0, final_x = 0.0;
    std::uint64_t steps = 0;
    std::vector<double> times, n_path, x_path;   // when store_path
};

CoupledTrajectory simulate_coupled(const CoupledSpec& spec, const SimConfig& cfg,
                                   double n0, double x0);

// Monotone piecewise-linear inverse of A(u) = int_0^u 1/f(N_s) ds along a
// stored path: tau(t) is the unique u with A(u) = t.
struct TimeChange {
    std::vector<double> u;        // path times
    std::vector<double> A;        // A(u) at those times, strictly increasing
    double tau(double t) const;       // inverse: A(tau(t)) = t
    double forward(double uq) const;  // A evaluated by interpolation
    double t_max() const { return A.back(); }
};

TimeChange build_time_change(const std::vector<double>& times,
                             const std::vector<double>& n_path,
                             const CoefficientExpr& f);

struct ExtinctionEvent {
    double time = 0.0;
    std::uint64_t step = 0;
    int allele = -1;              // 0-based id of the allele lost at this event
};

struct MultiTrajectory {
    bool fixed = false;
    int fixed_allele = -1;
    std::vector<ExtinctionEvent> events;  // ordered; L-1 of them when fixed
    double final_time = 0.0;
    std::uint64_t steps = 0;
    double max_simplex_error = 0.0;       // max over steps of |sum X_i - 1|
    std::vector<double> times;            // when store_path
    std::vector<std::vector<double>> x_path;  // [allele][sample]
};

// Nested-ratio scheme: ratio i = X^i / (1 - X^1 - ... - X^{i-1}) carries its
// own noise stream; the simplex constraint holds by construction. At most
// one ratio absorbs per step, and a ratio may absorb at 1 only after every
// deeper ratio is frozen, so extinction events land on distinct steps.
MultiTrajectory simulate_multiallele(int L, const std::vector<double>& x0,
                                     const SimConfig& cfg);

// Empirical check that Y^i = X^i / (1 - X^L), run in the clock with
// dtau = dt / (1 - X^L), has the quadratic variation of an (L-2)-type
// Wright-Fisher: diagonal Y^i(1-Y^i), off-diagonal -Y^i Y^j.
struct NestedReductionReport {
    int L = 0;
    std::size_t samples = 0;
    std::vector<std::vector<double>> qv;  // empirical d<Y^i,Y^j>/dtau
    std::vector<std::vector<double>> wf;  // path-averaged reference values
    double max_rel_error = 0.0;           // over entries with |ref| > 1e-3
};

NestedReductionReport nested_reduction_check(const MultiTrajectory& traj);

}  // namespace perpint
