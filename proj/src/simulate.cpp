#include "perpint/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perpint/rng.hpp"

namespace perpint {

namespace {

double eval_or_throw(const CoefficientExpr& e, double y, const char* what) {
    double v;
    if (!e.try_eval(y, v))
        throw SimulationError(std::string(what) + " not evaluable at y=" +
                              std::to_string(y));
    return v;
}

// Power-of-two step selection: sigma*sqrt(dt) and |b|*dt both kept below
// eta times the distance to the nearest boundary. Deterministic in the
// state, so identical seeds reproduce identical paths.
double choose_dt(const SimConfig& cfg, double dist, double sig, double b,
                 double remaining) {
    const double cap = cfg.dt_max > cfg.dt ? cfg.dt_max : cfg.dt;
    double target = cap;
    if (sig > 0.0) {
        const double s = cfg.eta * dist / sig;
        target = std::min(target, s * s);
    }
    const double ab = std::fabs(b);
    if (ab > 0.0) target = std::min(target, cfg.eta * dist / ab);
    double dt = cfg.dt;
    if (target < dt) {
        for (int h = 0; dt > target && h < cfg.max_halvings; ++h) dt *= 0.5;
    } else {
        while (dt * 2.0 <= target) dt *= 2.0;
    }
    return std::min(dt, remaining);
}

}  // namespace

Trajectory simulate_1d(const DiffusionSpec& spec, double x0, const SimConfig& cfg,
                       const std::vector<CoefficientExpr>& integrands) {
    if (!(x0 > spec.lo) || !(x0 < spec.hi))
        throw SimulationError("initial condition outside the open domain");
    if (!(cfg.absorption_eps > 0.0) || !(cfg.dt > 0.0) || cfg.dt > cfg.t_budget)
        throw SimulationError("invalid simulation config");

    const double eps = cfg.absorption_eps;
    const bool two_sided = spec.hi_finite();
    auto dist_to_boundary = [&](double z) {
        double d = z - spec.lo;
        if (two_sided) d = std::min(d, spec.hi - z);
        return d;
    };
    auto clamp_f = [&](double z) {
        double lo = spec.lo + eps, hi = two_sided ? spec.hi - eps : z;
        return std::min(std::max(z, lo), std::max(lo, hi));
    };

    RngStream rng(cfg.seed, make_stream(cfg.context, cfg.trajectory, 0));

    Trajectory out;
    out.integrals.assign(integrands.size(), 0.0);
    const double d0 = dist_to_boundary(x0);
    if (!(d0 > eps)) throw SimulationError("absorption_eps exceeds the initial distance");
    for (int j = 1; j <= cfg.snapshot_levels; ++j)
        out.snapshot_distances.push_back(d0 * std::ldexp(1.0, -j));
    out.snapshots.assign(integrands.size(),
                         std::vector<double>(out.snapshot_distances.size(), NAN));
    std::size_t next_level = 0;

    std::vector<double> f_old(integrands.size());
    for (std::size_t i = 0; i < integrands.size(); ++i)
        f_old[i] = eval_or_throw(integrands[i], clamp_f(x0), "integrand");

    double z = x0, t = 0.0;
    auto sample = [&]() {
        out.times.push_back(t);
        out.states.push_back(z);
        for (std::size_t i = 0; i < integrands.size(); ++i)
            out.integral_path[i].push_back(out.integrals[i]);
    };
    if (cfg.store_path) {
        out.integral_path.assign(integrands.size(), {});
        sample();
    }
    while (t < cfg.t_budget) {
        const double zt = std::min(std::max(z, spec.lo),
                                   two_sided ? spec.hi : z);  // full truncation
        const double sig = eval_or_throw(spec.sigma, zt, "sigma");
        const double b = eval_or_throw(spec.drift, zt, "drift");
        const double dist = std::max(dist_to_boundary(z), eps);
        const double h = choose_dt(cfg, dist, sig, b, cfg.t_budget - t);
        double zn = z + b * h + sig * std::sqrt(h) * rng.normal();
        if (cfg.scheme == Scheme::EulerReflected) {
            if (zn < spec.lo) zn = 2.0 * spec.lo - zn;
            if (two_sided && zn > spec.hi) zn = 2.0 * spec.hi - zn;
        }
        t += h;
        ++out.steps;

        for (std::size_t i = 0; i < integrands.size(); ++i) {
            const double fn = eval_or_throw(integrands[i], clamp_f(zn), "integrand");
            out.integrals[i] += 0.5 * (f_old[i] + fn) * h;
            f_old[i] = fn;
        }
        z = zn;
        if (cfg.store_path && out.steps % cfg.path_stride == 0) sample();

        const double d = dist_to_boundary(z);
        while (next_level < out.snapshot_distances.size() &&
               d < out.snapshot_distances[next_level]) {
            for (std::size_t i = 0; i < integrands.size(); ++i)
                out.snapshots[i][next_level] = out.integrals[i];
            ++next_level;
        }

        if (z < spec.lo + eps) {
            out.absorbed = BoundaryHit::Lower;
            out.absorption_time = t;
            out.absorption_step = out.steps;
            z = spec.lo;  // frozen at the boundary
            break;
        }
        if (two_sided && z > spec.hi - eps) {
            out.absorbed = BoundaryHit::Upper;
            out.absorption_time = t;
            out.absorption_step = out.steps;
            z = spec.hi;
            break;
        }
    }
    out.final_time = t;
    out.final_state = z;
    return out;
}

CoupledTrajectory simulate_coupled(const CoupledSpec& spec, const SimConfig& cfg,
                                   double n0, double x0) {
    if (!(n0 > 0.0) || !(x0 >= 0.0) || !(x0 <= 1.0))
        throw SimulationError("coupled system needs n0 > 0 and x0 in [0, 1]");
    const double eps = cfg.absorption_eps;
    RngStream rng_b(cfg.seed, make_stream(cfg.context, cfg.trajectory, 0));
    RngStream rng_w(cfg.seed, make_stream(cfg.context, cfg.trajectory, 1));

    CoupledTrajectory out;
    double n = n0, x = x0, t = 0.0;
    if (x <= eps || x >= 1.0 - eps) {
        // fixation already holds at t = 0; the race is trivially won
        out.outcome = RaceOutcome::FixationFirst;
        out.final_n = n0;
        out.final_x = x0;
        return out;
    }
    if (cfg.store_path) {
        out.times.push_back(t);
        out.n_path.push_back(n);
        out.x_path.push_back(x);
    }
    while (t < cfg.t_budget) {
        const double np = std::max(n, 0.0);
        const double sig_n = eval_or_throw(spec.sigma_N, np, "sigma_N");
        const double b_n = eval_or_throw(spec.drift_N, np, "drift_N");
        const double xc = std::min(std::max(x, 0.0), 1.0);
        const double fn = eval_or_throw(spec.f, std::max(np, eps), "f");
        if (!(fn > 0.0))
            throw SimulationError("time-change integrand f must stay positive");
        const double sig_x = std::sqrt(std::max(xc * (1.0 - xc), 0.0) / fn);
        const double b_x = spec.selection * xc * (1.0 - xc);

        const double dist_n = std::max(n, eps);
        const double dist_x = std::max(std::min(x, 1.0 - x), eps);
        const double h_n = choose_dt(cfg, dist_n, sig_n, b_n, cfg.t_budget - t);
        const double h_x = choose_dt(cfg, dist_x, sig_x, b_x, cfg.t_budget - t);
        const double h = std::min(h_n, h_x);
        const double rt = std::sqrt(h);

        n += b_n * h + sig_n * rt * rng_b.normal();
        x += b_x * h + sig_x * rt * rng_w.normal();
        x = std::min(std::max(x, 0.0), 1.0);
        t += h;
        ++out.steps;
        if (cfg.store_path && out.steps % cfg.path_stride == 0) {
            out.times.push_back(t);
            out.n_path.push_back(std::max(n, 0.0));
            out.x_path.push_back(x);
        }

        if (x <= eps || x >= 1.0 - eps) {
            out.outcome = RaceOutcome::FixationFirst;
            out.event_time = t;
            break;
        }
        if (n <= eps) {
            out.outcome = RaceOutcome::ExtinctionFirst;
            out.event_time = t;
            n = 0.0;
            break;
        }
    }
    out.final_time = t;
    out.final_n = std::max(n, 0.0);
    out.final_x = x;
    return out;
}

double TimeChange::tau(double t) const {
    if (t <= A.front()) return u.front();
    if (t >= A.back()) return u.back();
    const auto it = std::upper_bound(A.begin(), A.end(), t);
    const std::size_t i = it - A.begin() - 1;
    const double w = (t - A[i]) / (A[i + 1] - A[i]);
    return u[i] + w * (u[i + 1] - u[i]);
}

double TimeChange::forward(double uq) const {
    if (uq <= u.front()) return A.front();
    if (uq >= u.back()) return A.back();
    const auto it = std::upper_bound(u.begin(), u.end(), uq);
    const std::size_t i = it - u.begin() - 1;
    const double w = (uq - u[i]) / (u[i + 1] - u[i]);
    return A[i] + w * (A[i + 1] - A[i]);
}

TimeChange build_time_change(const std::vector<double>& times,
                             const std::vector<double>& n_path,
                             const CoefficientExpr& f) {
    if (times.size() != n_path.size() || times.size() < 2)
        throw SimulationError("time change needs a sampled path of length >= 2");
    TimeChange tc;
    tc.u = times;
    tc.A.resize(times.size());
    tc.A[0] = 0.0;
    double g_old = 1.0 / eval_or_throw(f, n_path[0], "time-change integrand");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double fv = eval_or_throw(f, n_path[i], "time-change integrand");
        if (!(fv > 0.0) || !std::isfinite(fv))
            throw SimulationError("time-change integrand must stay positive "
                                  "and finite along the path");
        const double g = 1.0 / fv;
        tc.A[i] = tc.A[i - 1] + 0.5 * (g_old + g) * (times[i] - times[i - 1]);
        g_old = g;
        if (!(tc.A[i] > tc.A[i - 1]))
            throw SimulationError("A(u) is not strictly increasing along the path");
    }
    return tc;
}

MultiTrajectory simulate_multiallele(int L, const std::vector<double>& x0,
                                     const SimConfig& cfg) {
    if (L < 2 || static_cast<int>(x0.size()) != L)
        throw SimulationError("need L >= 2 proportions");
    double sum = 0.0;
    for (double v : x0) {
        if (!(v > 0.0)) throw SimulationError("initial proportions must be interior");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw SimulationError("initial proportions must sum to 1");

    const int m = L - 1;  // number of ratios
    const double eps = cfg.absorption_eps;
    std::vector<double> r(m);
    {
        double rem = 1.0;
        for (int i = 0; i < m; ++i) {
            r[i] = x0[i] / rem;
            rem -= x0[i];
        }
    }
    std::vector<char> frozen(m, 0);
    std::vector<char> alive(L, 1);
    std::vector<RngStream> rng;
    rng.reserve(m);
    for (int i = 0; i < m; ++i)
        rng.emplace_back(cfg.seed, make_stream(cfg.context, cfg.trajectory, i));

    auto proportions = [&](std::vector<double>& x) {
        x.assign(L, 0.0);
        double rem = 1.0;
        for (int i = 0; i < m; ++i) {
            x[i] = r[i] * rem;
            rem *= 1.0 - r[i];
        }
        x[m] = rem;
    };

    MultiTrajectory out;
    double t = 0.0;
    int n_frozen = 0;
    std::vector<double> x, c(m), rnew(m);
    if (cfg.store_path) {
        proportions(x);
        out.times.push_back(t);
        out.x_path.assign(L, {});
        for (int i = 0; i < L; ++i) out.x_path[i].push_back(x[i]);
    }

    while (t < cfg.t_budget && n_frozen < m) {
        // diffusion coefficients and the common step
        double target_dist_ratio = INFINITY;
        double rem = 1.0;
        for (int i = 0; i < m; ++i) {
            if (frozen[i]) {
                c[i] = 0.0;
            } else {
                c[i] = std::sqrt(std::max(r[i] * (1.0 - r[i]), 0.0) /
                                 std::max(rem, 1e-300));
                const double dist = std::max(std::min(r[i], 1.0 - r[i]), eps);
                if (c[i] > 0.0)
                    target_dist_ratio = std::min(target_dist_ratio, dist / c[i]);
            }
            rem *= 1.0 - r[i];
        }
        double h = cfg.dt;
        if (std::isfinite(target_dist_ratio)) {
            const double s = cfg.eta * target_dist_ratio;
            const double target = s * s;
            for (int k = 0; h > target && k < cfg.max_halvings; ++k) h *= 0.5;
        }
        h = std::min(h, cfg.t_budget - t);
        const double rt = std::sqrt(h);

        for (int i = 0; i < m; ++i) {
            if (frozen[i]) {
                rnew[i] = r[i];
                continue;
            }
            rnew[i] = std::min(std::max(r[i] + c[i] * rt * rng[i].normal(), 0.0), 1.0);
        }
        t += h;
        ++out.steps;

        // at most one absorption per step: the deepest eligible candidate
        int absorb = -1;
        bool absorb_high = false;
        double best_overshoot = -1.0;
        for (int i = 0; i < m; ++i) {
            if (frozen[i]) continue;
            if (rnew[i] < eps) {
                const double over = eps - rnew[i];
                if (over > best_overshoot) {
                    best_overshoot = over;
                    absorb = i;
                    absorb_high = false;
                }
            } else if (rnew[i] > 1.0 - eps) {
                bool deeper_done = true;
                for (int j = i + 1; j < m; ++j)
                    if (!frozen[j]) deeper_done = false;
                if (!deeper_done) continue;  // hold: clip below, absorb later
                const double over = rnew[i] - (1.0 - eps);
                if (over > best_overshoot) {
                    best_overshoot = over;
                    absorb = i;
                    absorb_high = true;
                }
            }
        }
        for (int i = 0; i < m; ++i) {
            if (frozen[i]) continue;
            if (i == absorb) {
                r[i] = absorb_high ? 1.0 : 0.0;
                frozen[i] = 1;
                ++n_frozen;
                ExtinctionEvent ev;
                ev.time = t;
                ev.step = out.steps;
                if (!absorb_high) {
                    ev.allele = i;
                } else {
                    // ratio i took the whole remainder: the single allele
                    // still alive beyond i dies
                    ev.allele = -1;
                    for (int j = i + 1; j < L; ++j)
                        if (alive[j]) ev.allele = j;
                }
                alive[ev.allele] = 0;
                out.events.push_back(ev);
            } else {
                r[i] = std::min(std::max(rnew[i], eps), 1.0 - eps);
            }
        }

        proportions(x);
        double s = 0.0;
        for (double v : x) s += v;
        out.max_simplex_error = std::max(out.max_simplex_error, std::fabs(s - 1.0));
        if (cfg.store_path && out.steps % cfg.path_stride == 0) {
            out.times.push_back(t);
            for (int i = 0; i < L; ++i) out.x_path[i].push_back(x[i]);
        }
    }

    out.final_time = t;
    out.fixed = n_frozen == m;
    if (out.fixed) {
        for (int i = 0; i < L; ++i)
            if (alive[i]) out.fixed_allele = i;
    }
    return out;
}

NestedReductionReport nested_reduction_check(const MultiTrajectory& traj) {
    const int L = static_cast<int>(traj.x_path.size());
    if (L < 3 || traj.times.size() < 3)
        throw SimulationError("nested reduction check needs a stored path with L >= 3");
    const int d = L - 2;  // free coordinates of the reduced process

    NestedReductionReport rep;
    rep.L = L;
    rep.qv.assign(d, std::vector<double>(d, 0.0));
    rep.wf.assign(d, std::vector<double>(d, 0.0));

    // trim to the stretch where 1 - X^L is bounded away from 0 so the
    // time change stays well conditioned
    std::size_t n = traj.times.size();
    std::vector<double> rem(n);
    std::size_t last = 0;
    for (; last < n; ++last) {
        rem[last] = 1.0 - traj.x_path[L - 1][last];
        if (rem[last] < 1e-3) break;
    }
    if (last < 3) throw SimulationError("1 - X^L collapses too early for the check");

    std::vector<double> y_old(d), y_new(d);
    for (int i = 0; i < d; ++i) y_old[i] = traj.x_path[i][0] / rem[0];
    for (std::size_t s = 0; s + 1 < last; ++s) {
        const double du = traj.times[s + 1] - traj.times[s];
        const double dtau = 0.5 * (1.0 / rem[s] + 1.0 / rem[s + 1]) * du;
        if (!(dtau > 0.0)) continue;
        for (int i = 0; i < d; ++i)
            y_new[i] = traj.x_path[i][s + 1] / rem[s + 1];
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                rep.qv[i][j] += (y_new[i] - y_old[i]) * (y_new[j] - y_old[j]) / dtau;
                rep.wf[i][j] += i == j ? y_old[i] * (1.0 - y_old[i])
                                       : -y_old[i] * y_old[j];
            }
        y_old = y_new;
        ++rep.samples;
    }
    if (rep.samples == 0) throw SimulationError("no usable increments");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            rep.qv[i][j] /= static_cast<double>(rep.samples);
            rep.wf[i][j] /= static_cast<double>(rep.samples);
            if (std::fabs(rep.wf[i][j]) > 1e-3)
                rep.max_rel_error =
                    std::max(rep.max_rel_error,
                             std::fabs(rep.qv[i][j] - rep.wf[i][j]) /
                                 std::fabs(rep.wf[i][j]));
        }
    return rep;
}

}  // namespace perpint
