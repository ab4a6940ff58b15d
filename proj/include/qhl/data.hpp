// data.hpp — data pipeline: four-level discretization of normalized
// expression, equal-population pseudotime binning, base-4 outcome encoding,
// dataset file I/O, and the Beta-distribution dequantizer.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qhl/model.hpp"

namespace qhl {

// ------------------------------ domain types ------------------------------

// Bin edges b_0 < ... < b_4 with b_0 = 0, b_4 = 1 and interior edges the
// midpoints of consecutive expression scores.
struct DiscretizationBins {
    std::array<double, 5> edges;
};

// Equal-population partition of cells by pseudotime rank.
struct PseudotimeBinning {
    int N_t = 0;
    std::vector<int> assignment;              // cell → bin
    std::vector<std::vector<int>> bin_cells;  // bin → original cell indices (time order)
    RealVector representative;                // median pseudotime per bin
};

// Per-level Beta(α_i, β_i) with interior mode at the normalized score
// position γ_i and concentration c_i solved for the 0.99 central mass.
struct BetaBinModel {
    std::array<double, 4> gamma, concentration, alpha, beta;
};

// ------------------------------- operations -------------------------------

// Edges from the midpoint rule b_i = (τ_{i−1} + τ_i)/2.
DiscretizationBins make_bins(const std::array<double, 4>& scores);

// Half-open assignment: label i iff b_i ≤ x < b_{i+1}; x = 1 maps to 3.
int discretize(double value, const DiscretizationBins& bins);

// Sort cells by pseudotime (stable; ties keep original order), split into
// N_t contiguous near-equal groups (larger groups first), median per group.
PseudotimeBinning bin_pseudotime(const std::vector<double>& pseudotimes, int N_t);

// M = Σ_i m^(i)·4^{i−1} (gene 1 least significant) and its inverse.
std::uint64_t encode_base4(const std::vector<int>& m);
std::vector<int> decode_base4(std::uint64_t M, int n);

// Smallest-c solution of mass(Beta(1+γ(c−2), 1+(1−γ)(c−2)); [0.025, 0.975])
// = 0.99, found by bisection on c ∈ (2, 1e6] (mass is increasing in c).
double solve_beta_concentration(double gamma);

// Per-level Beta models for the given scores/bins.
BetaBinModel make_beta_models(const std::array<double, 4>& scores,
                              const DiscretizationBins& bins);

// One continuous value in [b_i, b_{i+1}] for a label: x = b_i + z·(b_{i+1}−b_i),
// z ~ Beta(α_i, β_i).
double dequantize(int label, const DiscretizationBins& bins, const BetaBinModel& model, Rng& rng);

// ----------------------- special functions (internal) ---------------------

// Regularized incomplete beta I_x(a, b) by Lentz continued fraction.
double incomplete_beta(double a, double b, double x);
// ∫_lo^hi Beta(z; a, b) dz.
double beta_mass(double a, double b, double lo, double hi);

// ------------------------------- file I/O ---------------------------------
// Dataset = manifest JSON {format_version: 1, n, N_t, N_c, times} at
// <dir>/dataset.json plus CSV body (time_index, cell_index, m_1..m_n) at
// <dir>/dataset.csv.

void write_dataset(const Dataset& data, const std::string& dir);
Dataset read_dataset(const std::string& dir);

// Ground truth / learned parameters: weight JSON with θ, φ arrays appended.
void write_model_params_json(const ModelParams& params, const std::string& path);
ModelParams read_model_params_json(const std::string& path);

// Expression table: header gene_1..gene_n[, pseudotime], one row per cell.
struct ExpressionTable {
    RealMatrix values;        // cells × genes
    std::vector<double> pseudotime;  // empty when the column is absent
};
ExpressionTable read_expression_csv(const std::string& path, bool require_pseudotime);
void write_expression_csv(const ExpressionTable& table, const std::string& path);

// Full ingestion: read expression CSV (values must lie in [0,1]), bin by
// pseudotime, discretize through the POVM's bins, truncate every bin to the
// smallest bin population so N_c is uniform.
Dataset ingest_expression(const std::string& path, const SingleQubitPOVM& povm, int N_t);

// Dequantized export: every dataset outcome mapped back to a continuous
// value; pseudotime column = the representative time of the cell's bin.
ExpressionTable dequantize_dataset(const Dataset& data, const SingleQubitPOVM& povm, Rng& rng);

}  // namespace qhl
