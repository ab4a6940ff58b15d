// model.hpp — the forward model: separable initial state, unitary pseudotime
// evolution, outcome probabilities through the product POVM, outcome
// sampling, and synthetic dataset generation.
//
// Gene i is qubit i (MSB-first basis ordering, see qcore.hpp). Outcome
// vectors m list one label in {0,1,2,3} per gene; the probability of m at
// time t is (1/2^n)|⟨v_{m_1}⊗...⊗v_{m_n}|ψ_t⟩|² via the rank-1 factors.

#pragma once

#include <cstdint>
#include <vector>

#include "qhl/hamiltonian.hpp"
#include "qhl/povm.hpp"
#include "qhl/rng.hpp"

namespace qhl {

// ------------------------------ domain types ------------------------------

struct ModelParams {
    WeightMatrix weights;
    RealVector thetas;  // n polar angles
    RealVector phis;    // n azimuthal phases
};

// Discretized outcomes for N_t time bins × N_c cells × n genes, plus the
// representative time of each bin (ascending, strictly positive).
struct Dataset {
    int n = 0;
    RealVector times;  // length N_t
    std::vector<Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>>
        outcomes;  // N_t entries, each N_c × n

    int num_times() const { return static_cast<int>(times.size()); }
    int num_cells() const { return outcomes.empty() ? 0 : static_cast<int>(outcomes[0].rows()); }
};

// Synthetic-generation configuration. Ground truth is drawn as
// w ~ U[−w_max, w_max] (off-diagonal), θ ~ U[0, π], φ ~ U[0, 2π], and the
// N_t measurement times are uniform on (0, t_max], sorted ascending.
struct SynthConfig {
    int n = 4;
    int N_t = 30;
    int N_c = 2000;
    double t_max = 1.0;
    double w_max = 1.0;
    std::uint64_t seed = 0;
};

// ------------------------------- operations -------------------------------

// ⊗_i (cos θ_i |0⟩ + e^{iφ_i} sin θ_i |1⟩).
QuantumState prepare_initial_state(const RealVector& thetas, const RealVector& phis);

// Single-qubit factor and its θ/φ derivatives.
Eigen::Vector2cd qubit_state(double theta, double phi);
Eigen::Vector2cd qubit_state_dtheta(double theta, double phi);
Eigen::Vector2cd qubit_state_dphi(double theta, double phi);

// Product measurement vector ⊗_j v_{m_j} for an outcome vector m.
Vector outcome_vector(const Rank1Factor& factor, const std::vector<int>& m);

// φ(m|t, params) = tr(Λ_m ρ_t) evaluated as a rank-1 inner product.
double likelihood(const ModelParams& params, double t, const std::vector<int>& m,
                  const SingleQubitPOVM& povm);

// All 4^n outcome probabilities at time t, indexed by the base-4 encoding
// M = Σ_i m^(i) 4^{i−1} (gene 1 = least significant digit). Guarded to
// n ≤ n_enum.
RealVector full_distribution(const ModelParams& params, double t, const SingleQubitPOVM& povm,
                             int n_enum = 8);
// Same, for a precomputed evolved state.
RealVector full_distribution(const Vector& psi_t, const Rank1Factor& factor, int n_enum = 8);

// count i.i.d. outcome vectors from φ(·|t, params) by sequential conditional
// single-qubit sampling (exact; no enumeration). Deterministic given rng.
std::vector<std::vector<int>> sample_outcomes(const ModelParams& params, double t, int count,
                                              const SingleQubitPOVM& povm, Rng& rng);
// Same, for a precomputed evolved state.
std::vector<int> sample_outcome(const Vector& psi_t, const Rank1Factor& factor, Rng& rng);

// Draw ground truth per SynthConfig, sample times, then N_c outcomes per
// time. Per-time sampling uses child streams split_seed(seed, time index),
// so the result is independent of evaluation order.
std::pair<Dataset, ModelParams> generate_synthetic(const SynthConfig& cfg,
                                                   const SingleQubitPOVM& povm);

}  // namespace qhl
