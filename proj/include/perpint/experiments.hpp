// Ensemble campaigns: the extinction-vs-fixation sweep over the noise
// exponent, analytic-vs-empirical cross-validation of the perpetual-integral
// criterion, the Lotka-Volterra selection case, and multi-allele successive
// extinctions. Trajectories run in parallel; aggregation is ordered by cell
// then trajectory index, so output bytes do not depend on the worker count.
#pragma once

#include <string>
#include <vector>

#include "perpint/classifier.hpp"
#include "perpint/parallel.hpp"
#include "perpint/simulate.hpp"

namespace perpint {

inline constexpr const char* kToolVersion = "perpint 0.1.0";

struct ExperimentConfig {
    std::vector<double> grid;      // preset parameter list (eps, beta/sigma^2, ...)
    std::vector<double> grid2;     // second axis where a preset needs one (alpha)
    int trajectories = 2000;
    SimConfig sim;
    int jobs = 1;
    ExecMode mode = ExecMode::OpenMP;
    double n0 = 1.0, x0 = 0.5;     // defaults, recorded in every output
    double r = -1.0, c = 0.1;      // coupled-system drift N(r - cN)
    double r1 = -1.0, r2 = -0.8;   // Lotka-Volterra growth rates
};

struct CellStats {
    double param = 0.0, param2 = 0.0;
    int total = 0;
    int fixation_first = 0, extinction_first = 0, undecided = 0;
    int grow = 0, stabilize = 0, unresolved = 0;
    std::string analytic, empirical;
    bool agreement = true;
    double mean = 0.0, se = 0.0;   // preset-specific statistic
};

struct EnsembleStats {
    std::string preset;
    std::vector<CellStats> cells;
    std::vector<std::string> warnings;
    bool monotone = false;         // figure2: significant strict increase
    bool agreement_ok = true;
    std::string csv;               // header + records, LF endings
};

// counts extinction-before-fixation per eps in cfg.grid for the coupled
// system dN = N^{(1-eps)/2} dB + N(r - cN) dt, dX = sqrt(X(1-X)/N) dW
EnsembleStats run_figure2_sweep(const ExperimentConfig& cfg);

// grid = beta/sigma^2 values, grid2 = alpha values; analytic verdict for
// int_0^{T0} Z^-alpha vs per-path truncated-integral ladder classification
EnsembleStats run_criterion_validation(const ExperimentConfig& cfg);

// neutral Wright-Fisher, f = 1/(1-y), paths retained on T1 < T0: the
// truncated integrals must grow at every snapshot doubling
EnsembleStats run_fixation_integral_growth(const ExperimentConfig& cfg);

// transformed Lotka-Volterra (N, X): fixation-first frequency with CI plus
// the Girsanov-reduction verdict for the same parameters
EnsembleStats run_selection_case(const ExperimentConfig& cfg);

// per-path fixation flag, ordered extinction times, minimum step gap
EnsembleStats run_successive_extinctions(int L, const ExperimentConfig& cfg);

// manifest-first output protocol: writes <out>.manifest.json marked
// incomplete, then the CSV at <out>, then rewrites the manifest complete
void write_experiment_outputs(const ExperimentConfig& cfg,
                              const EnsembleStats& stats,
                              const std::string& out_path);

std::string format_csv_double(double v);

}  // namespace perpint
