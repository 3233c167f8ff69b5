#include "perpint/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace perpint {

namespace {

constexpr double kZ99 = 2.3263478740408408;  // one-sided 1% normal quantile

std::string fmt(double v) { return format_csv_double(v); }

CoefficientExpr expr(const std::string& s) { return CoefficientExpr::parse(s); }

// sigma_N = y^{(1-eps)/2}, drift_N = r*y - c*y^2
CoupledSpec coupled_spec(double eps, double r, double c, double selection) {
    CoupledSpec cs;
    cs.sigma_N = expr("y^" + fmt(0.5 * (1.0 - eps)));
    cs.drift_N = expr("(" + fmt(r) + ")*y + (" + fmt(-c) + ")*y^2");
    cs.f = expr("y");
    cs.selection = selection;
    return cs;
}

// Budget-doubling classification of a truncated path integral: compare the
// value at full ladder depth J against half depth J/2 (doubling the number
// of resolution octaves). Divergent integrands keep depositing mass in the
// deep half (>= 5% relative); convergent ones leave a geometrically small
// tail there. +1 grow, 0 stabilize, -1 unresolved (ladder not completed).
int snapshot_trend(const std::vector<double>& snaps) {
    if (snaps.size() < 4) return -1;
    const int deepest = static_cast<int>(snaps.size()) - 1;
    if (std::isnan(snaps[deepest])) return -1;  // budget ran out mid-ladder
    const double a = snaps[deepest / 2], b = snaps[deepest];
    if (!(b > 0.0)) return -1;
    return (b - a) / b >= 0.05 ? 1 : 0;
}

// one-sided two-proportion z-test that p2 > p1, at level 1%
bool significantly_greater(int k2, int k1, int n) {
    if (k2 <= k1) return false;
    const double p1 = static_cast<double>(k1) / n;
    const double p2 = static_cast<double>(k2) / n;
    const double pp = 0.5 * (p1 + p2);
    const double se = std::sqrt(pp * (1.0 - pp) * 2.0 / n);
    if (se == 0.0) return true;
    return (p2 - p1) / se > kZ99;
}

}  // namespace

std::string format_csv_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

EnsembleStats run_figure2_sweep(const ExperimentConfig& cfg) {
    if (cfg.grid.empty()) throw std::invalid_argument("figure2 needs an eps grid");
    EnsembleStats out;
    out.preset = "figure2";
    out.csv = "eps,extinction_first,fixation_first,undecided,total,n0,x0\n";

    for (std::size_t ci = 0; ci < cfg.grid.size(); ++ci) {
        const double eps = cfg.grid[ci];
        const auto cs = coupled_spec(eps, cfg.r, cfg.c, 0.0);
        std::vector<RaceOutcome> res(cfg.trajectories);
        for_each_index(res.size(), cfg.jobs, cfg.mode, [&](std::size_t k) {
            SimConfig sc = cfg.sim;
            sc.context = 10 + ci;
            sc.trajectory = k;
            res[k] = simulate_coupled(cs, sc, cfg.n0, cfg.x0).outcome;
        });
        CellStats cell;
        cell.param = eps;
        cell.total = cfg.trajectories;
        for (auto o : res) {
            if (o == RaceOutcome::ExtinctionFirst) ++cell.extinction_first;
            else if (o == RaceOutcome::FixationFirst) ++cell.fixation_first;
            else ++cell.undecided;
        }
        if (cell.undecided * 10 > cell.total)
            out.warnings.push_back("eps=" + fmt(eps) +
                                   ": undecided fraction exceeds 10%");
        out.csv += fmt(eps) + "," + std::to_string(cell.extinction_first) + "," +
                   std::to_string(cell.fixation_first) + "," +
                   std::to_string(cell.undecided) + "," +
                   std::to_string(cell.total) + "," + fmt(cfg.n0) + "," +
                   fmt(cfg.x0) + "\n";
        out.cells.push_back(cell);
    }

    out.monotone = out.cells.size() >= 2;
    for (std::size_t i = 0; i + 1 < out.cells.size(); ++i)
        if (!significantly_greater(out.cells[i + 1].extinction_first,
                                   out.cells[i].extinction_first,
                                   cfg.trajectories))
            out.monotone = false;
    return out;
}

EnsembleStats run_criterion_validation(const ExperimentConfig& cfg) {
    if (cfg.grid.empty() || cfg.grid2.empty())
        throw std::invalid_argument("criterion validation needs beta and alpha grids");
    EnsembleStats out;
    out.preset = "criterion";
    out.csv = "beta,alpha,analytic,empirical,grow,stabilize,unresolved,total,agreement\n";

    std::size_t ci = 0;
    for (double w : cfg.grid) {
        for (double alpha : cfg.grid2) {
            DiffusionSpec spec;
            spec.sigma = expr("sqrt(y)");
            spec.drift = expr(fmt(w));
            const auto f = expr("y^" + fmt(-alpha));
            const auto verdict = classify_perpetual_zero(spec, f);

            std::vector<int> trend(cfg.trajectories);
            for_each_index(trend.size(), cfg.jobs, cfg.mode, [&](std::size_t k) {
                SimConfig sc = cfg.sim;
                sc.context = 100 + ci;
                sc.trajectory = k;
                trend[k] = snapshot_trend(
                    simulate_1d(spec, cfg.n0, sc, {f}).snapshots[0]);
            });
            CellStats cell;
            cell.param = w;
            cell.param2 = alpha;
            cell.total = cfg.trajectories;
            for (int t : trend) {
                if (t > 0) ++cell.grow;
                else if (t == 0) ++cell.stabilize;
                else ++cell.unresolved;
            }
            const int resolved = cell.grow + cell.stabilize;
            cell.analytic = outcome_name(verdict.outcome);
            cell.empirical = "Undecided";
            if (resolved > 0) {
                if (cell.grow >= 0.95 * resolved) cell.empirical = "InfiniteAS";
                else if (cell.stabilize >= 0.95 * resolved) cell.empirical = "FiniteAS";
            }
            cell.agreement = !(verdict.outcome != Outcome::Inconclusive &&
                               cell.empirical != "Undecided" &&
                               cell.analytic != cell.empirical);
            if (!cell.agreement) out.agreement_ok = false;
            out.csv += fmt(w) + "," + fmt(alpha) + "," + cell.analytic + "," +
                       cell.empirical + "," + std::to_string(cell.grow) + "," +
                       std::to_string(cell.stabilize) + "," +
                       std::to_string(cell.unresolved) + "," +
                       std::to_string(cell.total) + "," +
                       (cell.agreement ? "yes" : "no") + "\n";
            out.cells.push_back(cell);
            ++ci;
        }
    }
    return out;
}

EnsembleStats run_fixation_integral_growth(const ExperimentConfig& cfg) {
    // grid entries are selection strengths; 0 is the neutral case
    const std::vector<double> sels = cfg.grid.empty() ? std::vector<double>{0.0}
                                                      : cfg.grid;
    EnsembleStats out;
    out.preset = "fixation-growth";
    out.csv = "selection,retained,grow,stabilize,unresolved,total,x0\n";

    for (std::size_t ci = 0; ci < sels.size(); ++ci) {
        DiffusionSpec spec;
        spec.sigma = expr("sqrt(y*(1-y))");
        spec.drift = expr(fmt(sels[ci]) + "*y*(1-y)");
        spec.lo = 0.0;
        spec.hi = 1.0;
        spec.ref = 0.5;
        const auto f = expr("1/(1-y)");

        struct R { int trend; bool retained; };
        std::vector<R> res(cfg.trajectories);
        for_each_index(res.size(), cfg.jobs, cfg.mode, [&](std::size_t k) {
            SimConfig sc = cfg.sim;
            sc.context = 200 + ci;
            sc.trajectory = k;
            const auto tr = simulate_1d(spec, cfg.x0, sc, {f});
            res[k] = {snapshot_trend(tr.snapshots[0]),
                      tr.absorbed == BoundaryHit::Upper};
        });
        CellStats cell;
        cell.param = sels[ci];
        cell.total = cfg.trajectories;
        int retained = 0;
        for (const auto& r : res) {
            if (!r.retained) continue;  // condition on T1 < T0
            ++retained;
            if (r.trend > 0) ++cell.grow;
            else if (r.trend == 0) ++cell.stabilize;
            else ++cell.unresolved;
        }
        cell.fixation_first = retained;
        out.csv += fmt(sels[ci]) + "," + std::to_string(retained) + "," +
                   std::to_string(cell.grow) + "," +
                   std::to_string(cell.stabilize) + "," +
                   std::to_string(cell.unresolved) + "," +
                   std::to_string(cell.total) + "," + fmt(cfg.x0) + "\n";
        out.cells.push_back(cell);
    }
    return out;
}

EnsembleStats run_selection_case(const ExperimentConfig& cfg) {
    EnsembleStats out;
    out.preset = "selection";
    const auto cs = coupled_spec(0.0, cfg.r1, cfg.c, cfg.r2 - cfg.r1);

    std::vector<RaceOutcome> res(cfg.trajectories);
    for_each_index(res.size(), cfg.jobs, cfg.mode, [&](std::size_t k) {
        SimConfig sc = cfg.sim;
        sc.context = 300;
        sc.trajectory = k;
        res[k] = simulate_coupled(cs, sc, cfg.n0, cfg.x0).outcome;
    });
    CellStats cell;
    cell.param = cfg.r1;
    cell.param2 = cfg.r2;
    cell.total = cfg.trajectories;
    for (auto o : res) {
        if (o == RaceOutcome::FixationFirst) ++cell.fixation_first;
        else if (o == RaceOutcome::ExtinctionFirst) ++cell.extinction_first;
        else ++cell.undecided;
    }
    cell.mean = static_cast<double>(cell.fixation_first) / cell.total;
    cell.se = std::sqrt(cell.mean * (1.0 - cell.mean) / cell.total);

    // Girsanov reduction for the same parameters: the selection drift enters
    // the frequency clock as the perturbation q(y) = (r2 - r1) y
    DiffusionSpec base;
    base.sigma = expr("sqrt(y)");
    base.drift = expr("(" + fmt(cfg.r1) + ")*y + (" + fmt(-cfg.c) + ")*y^2");
    // fixation before extinction is a.s. iff the frequency clock
    // int_0^{T0} 1/N_s ds diverges
    const auto v = girsanov_reduce(base, expr(fmt(cfg.r2 - cfg.r1) + "*y"),
                                   {true, true}, expr("1/y"));
    cell.analytic = outcome_name(v.outcome);

    out.csv = "r1,r2,c,fixation_first,extinction_first,undecided,total,"
              "frequency,se,girsanov_verdict,n0,x0\n";
    out.csv += fmt(cfg.r1) + "," + fmt(cfg.r2) + "," + fmt(cfg.c) + "," +
               std::to_string(cell.fixation_first) + "," +
               std::to_string(cell.extinction_first) + "," +
               std::to_string(cell.undecided) + "," +
               std::to_string(cell.total) + "," + fmt(cell.mean) + "," +
               fmt(cell.se) + "," + cell.analytic + "," + fmt(cfg.n0) + "," +
               fmt(cfg.x0) + "\n";
    out.cells.push_back(cell);
    return out;
}

EnsembleStats run_successive_extinctions(int L, const ExperimentConfig& cfg) {
    if (L < 2) throw std::invalid_argument("need L >= 2");
    EnsembleStats out;
    out.preset = "successive";
    out.csv = "path,fixed,fixed_allele,min_step_gap";
    for (int e = 1; e < L; ++e) out.csv += ",event_time_" + std::to_string(e);
    out.csv += "\n";

    const std::vector<double> x0(L, 1.0 / L);
    std::vector<MultiTrajectory> res(cfg.trajectories);
    for_each_index(res.size(), cfg.jobs, cfg.mode, [&](std::size_t k) {
        SimConfig sc = cfg.sim;
        sc.context = 400 + static_cast<std::uint64_t>(L);
        sc.trajectory = k;
        res[k] = simulate_multiallele(L, x0, sc);
    });

    int fixed = 0, simultaneous = 0;
    std::vector<int> gap_hist;  // bucket k counts min gaps in [2^k, 2^{k+1})
    for (std::size_t k = 0; k < res.size(); ++k) {
        const auto& tr = res[k];
        if (tr.fixed) ++fixed;
        long long min_gap = -1;
        for (std::size_t e = 1; e < tr.events.size(); ++e) {
            const long long g =
                static_cast<long long>(tr.events[e].step - tr.events[e - 1].step);
            if (min_gap < 0 || g < min_gap) min_gap = g;
        }
        if (min_gap == 0) ++simultaneous;
        if (min_gap > 0) {
            const int bucket = static_cast<int>(std::log2(static_cast<double>(min_gap)));
            if (bucket >= static_cast<int>(gap_hist.size()))
                gap_hist.resize(bucket + 1, 0);
            ++gap_hist[bucket];
        }
        out.csv += std::to_string(k) + "," + (tr.fixed ? "1" : "0") + "," +
                   std::to_string(tr.fixed_allele) + "," +
                   std::to_string(min_gap);
        for (int e = 0; e < L - 1; ++e)
            out.csv += "," + (e < static_cast<int>(tr.events.size())
                                  ? fmt(tr.events[e].time)
                                  : std::string("nan"));
        out.csv += "\n";
    }
    CellStats agg;
    agg.param = L;
    agg.total = cfg.trajectories;
    agg.fixation_first = fixed;
    agg.undecided = cfg.trajectories - fixed;
    agg.grow = simultaneous;  // must stay 0: extinctions are never simultaneous
    out.cells.push_back(agg);
    for (std::size_t b = 0; b < gap_hist.size(); ++b) {
        CellStats h;
        h.param = std::ldexp(1.0, static_cast<int>(b));  // bucket lower bound
        h.total = gap_hist[b];
        out.cells.push_back(h);
    }
    if (simultaneous > 0)
        out.warnings.push_back("simultaneous extinction events detected");
    return out;
}

void write_experiment_outputs(const ExperimentConfig& cfg,
                              const EnsembleStats& stats,
                              const std::string& out_path) {
    const std::string manifest_path = out_path + ".manifest.json";
    nlohmann::json man;
    man["tool"] = kToolVersion;
    man["preset"] = stats.preset;
    man["data_file"] = out_path;
    man["status"] = "incomplete";
    man["seed"] = cfg.sim.seed;
    man["jobs"] = cfg.jobs;
    man["config"] = {
        {"grid", cfg.grid},         {"grid2", cfg.grid2},
        {"trajectories", cfg.trajectories},
        {"n0", cfg.n0},             {"x0", cfg.x0},
        {"r", cfg.r},               {"c", cfg.c},
        {"r1", cfg.r1},             {"r2", cfg.r2},
        {"dt", cfg.sim.dt},         {"dt_max", cfg.sim.dt_max},
        {"eta", cfg.sim.eta},       {"absorption_eps", cfg.sim.absorption_eps},
        {"t_budget", cfg.sim.t_budget},
        {"snapshot_levels", cfg.sim.snapshot_levels},
    };
    man["warnings"] = stats.warnings;

    const auto t0 = std::chrono::steady_clock::now();
    {
        std::ofstream mf(manifest_path, std::ios::binary | std::ios::trunc);
        if (!mf) throw std::runtime_error("cannot write " + manifest_path);
        mf << man.dump(2) << "\n";
    }
    {
        std::ofstream df(out_path, std::ios::binary | std::ios::trunc);
        if (!df) throw std::runtime_error("cannot write " + out_path);
        df << stats.csv;
    }
    man["status"] = "complete";
    man["write_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::ofstream mf(manifest_path, std::ios::binary | std::ios::trunc);
    mf << man.dump(2) << "\n";
}

}  // namespace perpint
