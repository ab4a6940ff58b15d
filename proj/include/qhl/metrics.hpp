// metrics.hpp — recovery metrics between learned and ground-truth
// parameters (part of the experiment harness).

#pragma once

#include "qhl/model.hpp"

namespace qhl {

struct Metrics {
    double max_abs_w_err = 0.0;   // max_{(i,j)} |ŵ − w*| over off-diagonal entries
    double recovery_rate = 0.0;   // fraction of weights with |ŵ − w*| ≤ 0.1
    double rel_err_w = 0.0;       // ‖ŵ − w*‖₂ / ‖w*‖₂ (flattened)
    double rel_err_theta = 0.0;
    double rel_err_phi = 0.0;
    double state_fidelity = 0.0;  // |⟨ψ₀(learned)|ψ₀(truth)⟩|²; gauge-invariant
};

// Tolerance defining a "recovered" weight.
inline constexpr double recovery_tolerance = 0.1;

Metrics compute_metrics(const ModelParams& learned, const ModelParams& truth);

}  // namespace qhl
