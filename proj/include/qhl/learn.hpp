// learn.hpp — likelihood gradients, empirical Hessian, Adam, and the
// mini-batch maximum-likelihood training loop.
//
// Gradient route: with H = V diag(λ) V† and a local term H_k, the exact
// time-ordered integral behind ∂U_t/∂w_k collapses in the eigenbasis to
//   ∂U_t/∂w_k = −i · U_t · V (A_k ∘ Φ) V†,  A_k = V† H_k V,
//   Φ_ab = (e^{i(λ_a−λ_b)t} − 1)/(i(λ_a−λ_b)),  Φ_aa = t,
// with the degenerate rule Φ_ab = t when |λ_a − λ_b|·t < 1e−10. Initial-
// state gradients differentiate the product state factor-by-factor.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qhl/metrics.hpp"
#include "qhl/model.hpp"

namespace qhl {

// ------------------------------ domain types ------------------------------

struct TrainConfig {
    int epochs = 2500;
    int batch = 20;                // B cells per time bin per step
    double base_lr = 0.85;         // synthetic profile; 0.085 = expression-data profile
    enum class Schedule { adaptive, constant } schedule = Schedule::adaptive;
    double w_max = 1.0;
    double p_floor = 1e-12;        // likelihood clamp; clamped samples give zero gradient
    bool learn_initial_state = true;
    std::uint64_t seed = 0;
    double w_init_lo = -0.5, w_init_hi = 0.5;  // w̃ initialization range
    double theta_init_lo = M_PI / 4, theta_init_hi = 3 * M_PI / 4;
    double phi_init_lo = M_PI / 2, phi_init_hi = 3 * M_PI / 2;
    double theta_fixed = M_PI / 2, phi_fixed = 0.0;  // used when not learning θ, φ
};

TrainConfig train_config_from_json_file(const std::string& path);
TrainConfig train_config_from_json_text(const std::string& text);
std::string train_config_to_json(const TrainConfig& cfg);

// Unconstrained optimization variables; w = w_max · tanh(w̃).
struct LatentParams {
    RealVector w_tilde;  // length c
    RealVector theta, phi;  // length n
};

ModelParams to_model_params(const LatentParams& latent, int n, double w_max);

struct TrainReport {
    std::vector<double> loss;  // batch NLL per epoch (evaluated before the update)
    std::vector<double> lr;
    ModelParams final_params;
    // Per-epoch recovery histories; empty when no ground truth is supplied.
    std::vector<double> max_abs_w_err, recovery_rate, rel_err_w, rel_err_theta, rel_err_phi,
        state_fidelity;
    int epochs = 0;
    double wall_seconds = 0.0;  // reported in the run log, not serialized
};

// A batch is a per-time-bin list of cell row indices into a Dataset.
using BatchSelection = std::vector<std::vector<int>>;
BatchSelection full_batch(const Dataset& data);

struct GradLikelihood {
    double value = 0.0;     // φ(m|t, params)
    RealVector dw;          // ∂φ/∂w_k, TermIndex order (length c)
    RealVector dtheta, dphi;
};

struct NllGradient {
    double loss = 0.0;
    RealVector dw;          // latent (w̃) or natural (w) depending on the entry point
    RealVector dtheta, dphi;
};

struct HessianResult {
    RealMatrix matrix;   // symmetrized, c×c
    double asymmetry;    // max |H − Hᵀ| before symmetrization
    double norm;         // max |H| (scale for the asymmetry check)
};

// ------------------------------- operations -------------------------------

// −(1/(B·N_t)) Σ_bins Σ_cells log max(φ, p_floor).
double nll_batch(const ModelParams& params, const Dataset& data, const BatchSelection& batch,
                 const SingleQubitPOVM& povm, double p_floor = 1e-12);
double nll_full(const ModelParams& params, const Dataset& data, const SingleQubitPOVM& povm,
                double p_floor = 1e-12);

// Exact gradient of the likelihood itself (not the loss) in natural
// coordinates (w, θ, φ).
GradLikelihood grad_likelihood(const ModelParams& params, double t, const std::vector<int>& m,
                               const SingleQubitPOVM& povm);

// NLL gradient in natural coordinates over a batch (one eigendecomposition,
// reused across bins). Clamped samples contribute zero gradient.
NllGradient grad_nll_natural(const ModelParams& params, const Dataset& data,
                             const BatchSelection& batch, const SingleQubitPOVM& povm,
                             double p_floor = 1e-12);

// NLL gradient in latent coordinates: natural gradient chained through
// dw/dw̃ = w_max(1 − tanh²(w̃)).
NllGradient grad_nll_batch(const LatentParams& latent, const Dataset& data,
                           const BatchSelection& batch, const SingleQubitPOVM& povm,
                           double w_max, double p_floor = 1e-12);

// Hessian of the full-dataset NLL in the unconstrained natural weights w,
// by central finite differences of the analytic gradient (relative step
// 1e−4), symmetrized. Guarded to c ≤ 30.
HessianResult empirical_hessian(const ModelParams& params, const Dataset& data,
                                const SingleQubitPOVM& povm, double p_floor = 1e-12);

// Adam with bias correction; β1 = 0.9, β2 = 0.999, ε = 1e−8.
struct AdamState {
    RealVector m, v;
    long step = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};
void adam_step(AdamState& state, RealVector& params, const RealVector& grad, double lr);

// base / √(epoch/4 + 1).
double lr_schedule(int epoch, double base);

// Mini-batch maximum-likelihood training. Per epoch, one batch of B cells
// per time bin: sequentially from an independent per-bin permutation until
// that bin's cells are all visited once, uniformly at random afterwards.
// `init` overrides the random initialization (e.g. stationarity probes).
TrainReport train_vqnet(const Dataset& data, const TrainConfig& cfg, const SingleQubitPOVM& povm,
                        const ModelParams* truth = nullptr,
                        const LatentParams* init = nullptr);

// Latent coordinates of given model parameters: w̃ = atanh(w / w_max).
// Requires |w| < w_max.
LatentParams to_latent_params(const ModelParams& params, double w_max);

// Expected NLL at the given parameters: (1/N_t) Σ_i H(φ(·|t_i)) in nats.
// Exact mode enumerates 4^n outcomes (n ≤ n_enum).
double oracle_loss(const ModelParams& params, const RealVector& times,
                   const SingleQubitPOVM& povm, int n_enum = 8);
// Monte Carlo mode: `samples` outcome draws per time point.
double oracle_loss_mc(const ModelParams& params, const RealVector& times,
                      const SingleQubitPOVM& povm, long samples, std::uint64_t seed);

}  // namespace qhl
