// Command-line front end: classify | boundary | simulate | experiment |
// moment-bound. Exit codes: 0 decided/ok, 2 config or parse error,
// 3 inconclusive verdict, 4 simulation error, 5 analytic-vs-empirical
// mismatch.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "perpint/experiments.hpp"

using namespace perpint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitSimulation = 4;
constexpr int kExitMismatch = 5;

const char* tri_name(Tri t) {
    switch (t) {
        case Tri::Yes: return "yes";
        case Tri::No: return "no";
        default: return "unknown";
    }
}

void print_verdict(const Verdict& v) {
    std::cout << "verdict: " << outcome_name(v.outcome) << "\n"
              << "decisive integral: " << v.decisive_integral << "\n"
              << "method: "
              << (v.method == DecisionMethod::SymbolicExponent
                      ? "symbolic exponent"
                      : "numeric extrapolation")
              << "\n";
    if (v.outcome == Outcome::FiniteAS)
        std::cout << "integral value: " << format_csv_double(v.value) << "\n";
    if (!v.ladder.empty()) {
        std::cout << "ladder:";
        for (double x : v.ladder) std::cout << " " << format_csv_double(x);
        std::cout << "\n";
    }
    if (!v.note.empty()) std::cout << "note: " << v.note << "\n";
}

// manifest-first protocol shared by the simulate subcommands
void write_manifest(const std::string& out, const nlohmann::json& config,
                    std::uint64_t seed, const std::string& status) {
    nlohmann::json man;
    man["tool"] = kToolVersion;
    man["subcommand"] = "simulate";
    man["data_file"] = out;
    man["status"] = status;
    man["seed"] = seed;
    man["config"] = config;
    std::ofstream mf(out + ".manifest.json", std::ios::binary | std::ios::trunc);
    if (!mf) throw std::runtime_error("cannot write " + out + ".manifest.json");
    mf << man.dump(2) << "\n";
}

struct CommonOpts {
    std::uint64_t seed = kDefaultSeed;
    int jobs = 0;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--seed", c.seed, "master RNG seed");
    cmd->add_option("--jobs", c.jobs, "worker count (0 = logical cores)");
    cmd->add_option("--out", c.out, "output file path");
    // placeholder for --help; files are spliced into the args before parsing
    cmd->add_option("--config", "flat key=value config file (expressions quoted)")
        ->type_name("FILE")
        ->expected(0, 1);
}

// Replace every `--config FILE` with the file's key=value pairs, spliced in
// place so the keys bind to the subcommand they were given under.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::vector<std::string> out;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        std::string file;
        if (a == "--config" && i + 1 < argc) file = argv[++i];
        else if (a.rfind("--config=", 0) == 0) file = a.substr(9);
        else { out.push_back(a); continue; }
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot read config file " + file);
        std::string line;
        while (std::getline(in, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[')
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line is not key=value: " + line);
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (val.size() >= 2 && (val.front() == '"' || val.front() == '\'') &&
                val.back() == val.front())
                val = val.substr(1, val.size() - 2);
            out.push_back("--" + key);
            out.push_back(val);
        }
    }
    return out;
}

DiffusionSpec spec_from(const std::string& sigma, const std::string& drift,
                        const std::vector<double>& domain) {
    DiffusionSpec spec;
    spec.sigma = CoefficientExpr::parse(sigma);
    spec.drift = CoefficientExpr::parse(drift);
    if (!domain.empty()) {
        if (domain.size() != 2 || !(domain[0] < domain[1]))
            throw std::invalid_argument("--domain wants lo,hi with lo < hi");
        spec.lo = domain[0];
        spec.hi = domain[1];
        spec.ref = std::isfinite(spec.hi) ? 0.5 * (spec.lo + spec.hi)
                                          : spec.lo + 1.0;
    }
    spec.validate();
    return spec;
}

int exit_for(const Verdict& v) {
    return v.outcome == Outcome::Inconclusive ? kExitInconclusive : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perpetual-integral toolkit: analytic finiteness criteria "
                 "and Monte Carlo cross-validation for 1-d diffusions"};
    app.require_subcommand(1);

    // ---- classify ----------------------------------------------------
    std::string cl_sigma, cl_drift, cl_f;
    std::vector<double> cl_domain;
    double cl_boundary = 0.0;
    auto* classify = app.add_subcommand(
        "classify", "a.s. finiteness of int f(Z_s) ds up to absorption");
    classify->add_option("--sigma", cl_sigma, "diffusion coefficient")->required();
    classify->add_option("--drift", cl_drift, "drift coefficient")->required();
    classify->add_option("--f", cl_f, "integrand")->required();
    classify->add_option("--domain", cl_domain, "state interval lo,hi")
        ->delimiter(',');
    classify->add_option("--boundary", cl_boundary,
                         "absorbing boundary the criterion is applied at");
    CommonOpts cl_common;
    add_common(classify, cl_common);

    // ---- boundary ----------------------------------------------------
    std::string bd_sigma, bd_drift;
    std::vector<double> bd_domain;
    auto* boundary = app.add_subcommand(
        "boundary", "scale/speed boundary classification and absorption");
    boundary->add_option("--sigma", bd_sigma)->required();
    boundary->add_option("--drift", bd_drift)->required();
    boundary->add_option("--domain", bd_domain)->delimiter(',');
    CommonOpts bd_common;
    add_common(boundary, bd_common);

    // ---- simulate ----------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "sample one trajectory");
    simulate->require_subcommand(1);
    SimConfig sim;
    double sm_x0 = 0.5, sm_n0 = 1.0;
    auto add_sim_opts = [&](CLI::App* cmd) {
        cmd->add_option("--dt", sim.dt, "base time step");
        cmd->add_option("--dt-max", sim.dt_max, "far-from-boundary step cap");
        cmd->add_option("--absorption-eps", sim.absorption_eps,
                        "absorption threshold");
        cmd->add_option("--budget", sim.t_budget, "time budget");
        cmd->add_option("--stride", sim.path_stride, "path sampling stride");
    };
    std::string s1_sigma, s1_drift;
    std::vector<std::string> s1_f;
    std::vector<double> s1_domain;
    auto* sim1d = simulate->add_subcommand("1d", "single diffusion");
    sim1d->add_option("--sigma", s1_sigma)->required();
    sim1d->add_option("--drift", s1_drift)->required();
    sim1d->add_option("--f", s1_f, "running path integrands");
    sim1d->add_option("--domain", s1_domain)->delimiter(',');
    sim1d->add_option("--x0", sm_x0, "initial state");
    add_sim_opts(sim1d);
    CommonOpts s1_common;
    add_common(sim1d, s1_common);

    double sc_eps = 0.4, sc_r = -1.0, sc_c = 0.1, sc_sel = 0.0;
    auto* simco = simulate->add_subcommand(
        "coupled", "population/frequency pair (N, X)");
    simco->add_option("--eps", sc_eps, "noise exponent: sigma_N = y^{(1-eps)/2}");
    simco->add_option("--r", sc_r, "growth rate");
    simco->add_option("--c", sc_c, "competition rate");
    simco->add_option("--selection", sc_sel, "selection drift on X");
    simco->add_option("--x0", sm_x0);
    simco->add_option("--n0", sm_n0);
    add_sim_opts(simco);
    CommonOpts sc_common;
    add_common(simco, sc_common);

    int ml_L = 3;
    std::vector<double> ml_x0;
    auto* simml = simulate->add_subcommand("multiallele", "L-allele system");
    simml->add_option("--L", ml_L, "number of alleles");
    simml->add_option("--x0", ml_x0, "initial proportions")->delimiter(',');
    add_sim_opts(simml);
    CommonOpts ml_common;
    add_common(simml, ml_common);

    // ---- experiment --------------------------------------------------
    std::string ex_preset;
    ExperimentConfig ex;
    int ex_L = 3;
    auto* experiment = app.add_subcommand(
        "experiment", "ensemble campaigns: figure2 | criterion | fixation | "
                      "selection | successive");
    experiment->add_option("preset", ex_preset, "campaign preset")->required();
    experiment->add_option("--eps", ex.grid, "figure2 eps grid")->delimiter(',');
    experiment->add_option("--beta", ex.grid, "criterion beta/sigma^2 grid")
        ->delimiter(',');
    experiment->add_option("--alpha", ex.grid2, "criterion alpha grid")
        ->delimiter(',');
    experiment->add_option("--n", ex.trajectories, "trajectories per cell");
    experiment->add_option("--L", ex_L, "allele count (successive)");
    experiment->add_option("--x0", ex.x0, "initial frequency");
    experiment->add_option("--n0", ex.n0, "initial population");
    experiment->add_option("--r", ex.r);
    experiment->add_option("--c", ex.c);
    experiment->add_option("--r1", ex.r1);
    experiment->add_option("--r2", ex.r2);
    experiment->add_option("--dt", ex.sim.dt);
    experiment->add_option("--dt-max", ex.sim.dt_max);
    experiment->add_option("--absorption-eps", ex.sim.absorption_eps);
    experiment->add_option("--budget", ex.sim.t_budget);
    experiment->add_option("--snapshot-levels", ex.sim.snapshot_levels);
    experiment->add_option("--max-halvings", ex.sim.max_halvings);
    CommonOpts ex_common;
    add_common(experiment, ex_common);

    // ---- moment-bound ------------------------------------------------
    std::string mb_sigma, mb_drift, mb_f;
    std::vector<double> mb_domain;
    int mb_n = 1;
    auto* moment = app.add_subcommand(
        "moment-bound", "n-th moment bound n!*(int s f m)^n");
    moment->add_option("--sigma", mb_sigma)->required();
    moment->add_option("--drift", mb_drift)->required();
    moment->add_option("--f", mb_f)->required();
    moment->add_option("--domain", mb_domain)->delimiter(',');
    moment->add_option("--n", mb_n, "moment order");
    CommonOpts mb_common;
    add_common(moment, mb_common);

    try {
        auto args = expand_config_args(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 vector API order
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*classify) {
            const auto spec = spec_from(cl_sigma, cl_drift, cl_domain);
            Verdict v;
            if (spec.hi_finite()) {
                const Side side = cl_boundary >= 0.5 * (spec.lo + spec.hi)
                                      ? Side::Upper
                                      : Side::Lower;
                v = classify_perpetual_two_sided(
                    spec, CoefficientExpr::parse(cl_f), side);
            } else {
                v = classify_perpetual_zero(spec, CoefficientExpr::parse(cl_f));
            }
            print_verdict(v);
            return exit_for(v);
        }

        if (*boundary) {
            const auto spec = spec_from(bd_sigma, bd_drift, bd_domain);
            const auto ss = ScaleSpeed::build(spec);
            const auto rep = classify_boundaries(ss);
            auto show = [&](const char* name, const BoundarySideReport& r) {
                std::cout << name << ": accessible=" << tri_name(r.accessible)
                          << " s_finite=" << tri_name(r.s_finite)
                          << " integral_s_m_finite="
                          << tri_name(r.integral_finite) << "\n";
            };
            show("lower", rep.left);
            show("upper", rep.right);
            std::cout << "absorbed_in_finite_time: "
                      << tri_name(rep.absorbed_in_finite_time) << "\n";
            return rep.absorbed_in_finite_time == Tri::Unknown
                       ? kExitInconclusive
                       : kExitOk;
        }

        if (*simulate) {
            CommonOpts* common = &s1_common;
            nlohmann::json config;
            sim.store_path = true;
            Trajectory tr;
            CoupledTrajectory ctr;
            MultiTrajectory mtr;
            int mode = 0;
            if (*sim1d) {
                sim.seed = s1_common.seed;
                std::vector<CoefficientExpr> fs;
                for (const auto& s : s1_f) fs.push_back(CoefficientExpr::parse(s));
                const auto spec = spec_from(s1_sigma, s1_drift, s1_domain);
                config = {{"mode", "1d"},       {"sigma", s1_sigma},
                          {"drift", s1_drift},  {"x0", sm_x0},
                          {"dt", sim.dt},       {"budget", sim.t_budget}};
                tr = simulate_1d(spec, sm_x0, sim, fs);
                mode = 1;
            } else if (*simco) {
                common = &sc_common;
                sim.seed = sc_common.seed;
                CoupledSpec cs;
                cs.sigma_N = CoefficientExpr::parse(
                    "y^" + format_csv_double(0.5 * (1.0 - sc_eps)));
                cs.drift_N = CoefficientExpr::parse(
                    "(" + format_csv_double(sc_r) + ")*y + (" +
                    format_csv_double(-sc_c) + ")*y^2");
                cs.f = CoefficientExpr::parse("y");
                cs.selection = sc_sel;
                config = {{"mode", "coupled"}, {"eps", sc_eps}, {"r", sc_r},
                          {"c", sc_c},         {"n0", sm_n0},   {"x0", sm_x0},
                          {"dt", sim.dt},      {"budget", sim.t_budget}};
                ctr = simulate_coupled(cs, sim, sm_n0, sm_x0);
                mode = 2;
            } else {
                common = &ml_common;
                sim.seed = ml_common.seed;
                if (ml_x0.empty())
                    ml_x0.assign(ml_L, 1.0 / ml_L);
                config = {{"mode", "multiallele"}, {"L", ml_L},
                          {"x0", ml_x0},           {"dt", sim.dt},
                          {"budget", sim.t_budget}};
                mtr = simulate_multiallele(ml_L, ml_x0, sim);
                mode = 3;
            }
            if (common->out.empty()) {
                std::cout << "no --out given; trajectory discarded after "
                             "simulation\n";
                return kExitOk;
            }
            write_manifest(common->out, config, sim.seed, "incomplete");
            std::ofstream df(common->out, std::ios::binary | std::ios::trunc);
            if (!df) throw std::runtime_error("cannot write " + common->out);
            if (mode == 1) {
                df << "t,state";
                for (std::size_t i = 0; i < tr.integrals.size(); ++i)
                    df << ",integral_" << i;
                df << ",absorbed\n";
                for (std::size_t k = 0; k < tr.times.size(); ++k) {
                    df << format_csv_double(tr.times[k]) << ","
                       << format_csv_double(tr.states[k]);
                    for (std::size_t i = 0; i < tr.integrals.size(); ++i)
                        df << "," << format_csv_double(tr.integral_path[i][k]);
                    const bool last = k + 1 == tr.times.size();
                    df << "," << (last && tr.absorbed != BoundaryHit::None ? "1" : "0")
                       << "\n";
                }
            } else if (mode == 2) {
                df << "t,n,x,absorbed\n";
                for (std::size_t k = 0; k < ctr.times.size(); ++k) {
                    const bool last = k + 1 == ctr.times.size();
                    df << format_csv_double(ctr.times[k]) << ","
                       << format_csv_double(ctr.n_path[k]) << ","
                       << format_csv_double(ctr.x_path[k]) << ","
                       << (last && ctr.outcome != RaceOutcome::Undecided ? "1"
                                                                         : "0")
                       << "\n";
                }
            } else {
                df << "t";
                for (int i = 0; i < ml_L; ++i) df << ",x" << i;
                df << ",absorbed\n";
                for (std::size_t k = 0; k < mtr.times.size(); ++k) {
                    df << format_csv_double(mtr.times[k]);
                    for (int i = 0; i < ml_L; ++i)
                        df << "," << format_csv_double(mtr.x_path[i][k]);
                    const bool last = k + 1 == mtr.times.size();
                    df << "," << (last && mtr.fixed ? "1" : "0") << "\n";
                }
            }
            df.close();
            write_manifest(common->out, config, sim.seed, "complete");
            return kExitOk;
        }

        if (*experiment) {
            ex.jobs = ex_common.jobs;
            ex.sim.seed = ex_common.seed;
            ex.mode = ex_common.jobs == 1 ? ExecMode::Serial : ExecMode::OpenMP;
            EnsembleStats st;
            if (ex_preset == "figure2") {
                if (ex.grid.empty()) ex.grid = {0.1, 0.25, 0.4};
                st = run_figure2_sweep(ex);
            } else if (ex_preset == "criterion" || ex_preset == "example2.1") {
                if (ex.grid.empty()) ex.grid = {0.1, 0.25, 0.4};
                if (ex.grid2.empty()) ex.grid2 = {0.5, 0.9, 1.0, 1.1, 2.0};
                st = run_criterion_validation(ex);
            } else if (ex_preset == "fixation") {
                if (ex.grid.empty()) ex.grid = {0.0};
                st = run_fixation_integral_growth(ex);
            } else if (ex_preset == "selection") {
                st = run_selection_case(ex);
            } else if (ex_preset == "successive") {
                st = run_successive_extinctions(ex_L, ex);
            } else {
                std::cerr << "unknown preset: " << ex_preset << "\n";
                return kExitConfig;
            }
            for (const auto& w : st.warnings)
                std::cerr << "warning: " << w << "\n";
            if (!ex_common.out.empty())
                write_experiment_outputs(ex, st, ex_common.out);
            else
                std::cout << st.csv;
            if (!st.agreement_ok) {
                std::cerr << "analytic and empirical verdicts disagree\n";
                return kExitMismatch;
            }
            return kExitOk;
        }

        if (*moment) {
            const auto spec = spec_from(mb_sigma, mb_drift, mb_domain);
            const auto mb =
                moment_bound(spec, CoefficientExpr::parse(mb_f), mb_n);
            std::cout << "order: " << mb.order << "\n"
                      << "integral: " << format_csv_double(mb.integral) << "\n"
                      << "bound: " << format_csv_double(mb.bound) << "\n";
            return std::isfinite(mb.bound) ? kExitOk : kExitInconclusive;
        }
    } catch (const SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
