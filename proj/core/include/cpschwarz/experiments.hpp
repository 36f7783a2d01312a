#pragma once

#include <vector>

#include "cpschwarz/runconfig.hpp"

namespace cps {

// Drivers behind the command line subcommands.  Each creates the output
// directory named in the config, saves the canonical config next to its
// results, and returns the headline numbers so callers can print or test
// them without re-reading the CSV files.

struct SolveSummary {
    int unknowns = 0;
    double length = 0.0;
    double residual = 0.0;      ///< measured |b - Au| / |b|
    double max_abs_err = 0.0;   ///< against the closed form; NaN when none applies
};

/// Single-domain solve; writes solution.csv (s,u) sampled along the curve
/// and, when a closed-form solution exists for the configuration, error.csv.
SolveSummary run_solve(const RunConfig& cfg);

struct RasSummary {
    int unknowns = 0;
    double length = 0.0;
    int iterations = 0;
    bool converged = false;
    double kappa_observed = 0.0;  ///< NaN when the history is too short
    double kappa_bound = 0.0;
    double rho = 0.0;             ///< spectral radius of the 1D error matrix
    std::vector<double> error_history;
};

/// Two-subdomain Schwarz run; writes history.csv, subdomains.csv and
/// convergence.svg.
RasSummary run_ras(const RunConfig& cfg);

struct MobiusRun {
    double h = 0.0;
    int unknowns = 0;
    int iterations = 0;
    bool converged = false;
    double kappa_observed = 0.0;
    std::vector<double> error_history;
};

struct MobiusResult {
    double length = 0.0;
    double kappa_bound = 0.0;
    double rho = 0.0;
    std::vector<MobiusRun> runs;
};

/// Schwarz convergence on the Mobius strip boundary for a 1:2 arclength
/// split with 0.1 L overlaps, swept over h in {0.05, 0.02, 0.01}; writes
/// per-h histories, a summary table, the subdomain geometry at the finest h
/// and a convergence plot.  Ignores the config's curve/h/split/overlap.
MobiusResult run_mobius_experiment(const RunConfig& cfg);

struct OverlapRow {
    double h = 0.0;
    double delta_fraction = 0.0;  ///< overlap as a fraction of L
    double kappa_observed = 0.0;  ///< NaN when the combination is infeasible
    double kappa_theory = 0.0;
};

struct CircleOverlapResult {
    std::vector<OverlapRow> rows;
};

/// Observed versus predicted contraction on the unit circle, equal split,
/// overlaps 0.02 L .. 0.2 L, h in {0.05, 0.01, 0.005}; writes
/// circle_overlap.csv and circle_overlap.svg.
CircleOverlapResult run_circle_overlap_experiment(const RunConfig& cfg);

}  // namespace cps
