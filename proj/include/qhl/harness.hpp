// harness.hpp — experiment drivers: (N_t, N_c) scaling studies over seeds,
// empirical-Hessian convexity probes, and cross-run aggregation utilities.

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qhl/learn.hpp"
#include "qhl/metrics.hpp"

namespace qhl {

// ------------------------------ scaling study ------------------------------

// Grid of (N_t, N_c) cells; every cell is trained seeds_per_cell times.
// Seeds are derived from (master_seed, seed index) only — independent of the
// cell — so seed index s names one problem instance (truth draw, time draw,
// outcome stream, initializer stream) shared by every cell. Cells then differ
// only in how much of that instance's data they see, which is the paired
// design a sample-size rate regression needs: per-instance constants cancel
// along the N_c axis instead of adding cross-cell noise.
struct StudyConfig {
    std::vector<int> N_t_values{30};
    std::vector<int> N_c_values{2000};
    int seeds_per_cell = 5;
    std::uint64_t master_seed = 0;
    SynthConfig synth;  // n / t_max / w_max template; N_t, N_c, seed set per cell
    TrainConfig train;  // optimizer template; seed set per run
    int restarts = 1;   // independent inits per run; the fit with the lowest
                        // full-dataset NLL is kept (approximate empirical-risk
                        // minimization; 1 = plain single-descent training)
    int threads = 1;
};

struct StudyRun {
    int N_t = 0, N_c = 0;
    int seed_index = 0;
    std::uint64_t gen_seed = 0, train_seed = 0;
    bool ok = false;
    std::string error;  // failure description when !ok
    Metrics metrics;
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    double w_l2_err = std::numeric_limits<double>::quiet_NaN();  // ‖ŵ − w*‖₂
};

// Median / IQR of each metric over the cell's successful runs.
struct StudyCell {
    int N_t = 0, N_c = 0;
    int completed = 0;
    Metrics median, iqr;
    double median_w_l2_err = std::numeric_limits<double>::quiet_NaN();
};

struct StudyResult {
    std::vector<StudyRun> runs;    // cell-major (N_t outer, N_c inner), then run
    std::vector<StudyCell> cells;  // same cell order
};

StudyConfig study_config_from_json_file(const std::string& path);
std::string study_config_to_json(const StudyConfig& cfg);

// Runs every (cell, seed) job on a bounded worker pool. Results are placed
// by job index, so the outcome is identical for any thread count.
StudyResult run_scaling_study(const StudyConfig& cfg);

void write_study_runs_csv(const StudyResult& result, const std::string& path);
void write_study_cells_csv(const StudyResult& result, const std::string& path);

// ----------------------------- convexity probe -----------------------------

struct ConvexityReport {
    double min_eigenvalue = 0.0;  // smallest eigenvalue of the symmetrized Hessian
    double asymmetry = 0.0;       // max |H − Hᵀ| before symmetrization
    double hessian_norm = 0.0;    // max |H| (scale reference)
    int N_t = 0, N_c = 0;
};

// Empirical NLL Hessian in w at `params` (c ≤ 30 guard inherited).
ConvexityReport convexity_probe(const Dataset& data, const ModelParams& params,
                                const SingleQubitPOVM& povm);

// ------------------------------- aggregation -------------------------------

// Type-7 (linear-interpolation) quantile, p ∈ [0,1]; values need not be sorted.
double quantile(std::vector<double> values, double p);
double median(const std::vector<double>& values);
double interquartile_range(const std::vector<double>& values);

// Least-squares slope of log(y) against log(x); inputs must be positive.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Entrywise coefficient of variation std/|mean| (sample std) over run weight
// matrices; entries with zero spread report 0 (covers structural zeros).
RealMatrix coefficient_of_variation(const std::vector<RealMatrix>& runs);

}  // namespace qhl
