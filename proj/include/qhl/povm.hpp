// povm.hpp — single-qubit four-outcome IC-POVM construction, validation,
// expression scores, and rank-1 factorization.
//
// Every element is parameterized by a Bloch vector: Λ_m = ¼(I + r_m·σ).
// A valid measurement needs Σ_m Λ_m = I (equivalently Σ_m r_m = 0) and,
// for informational completeness, the 4×4 matrix R whose columns are
// (1, r_m) must have full rank.

#pragma once

#include <array>

#include "qhl/qcore.hpp"

namespace qhl {

// ------------------------------ domain types ------------------------------

struct SingleQubitPOVM {
    std::array<Eigen::Vector3d, 4> bloch;  // unit Bloch vectors r_m
    std::array<Matrix, 4> elements;        // Λ_m = ¼(I + r_m·σ), 2×2
    std::array<double, 4> scores;          // expression scores τ_m = (1 - r_{m,z})/2
};

// Λ_m = weight_m |v_m⟩⟨v_m| with unit vectors v_m; exists exactly when all
// Bloch vectors have unit length (then every weight is ½).
struct Rank1Factor {
    std::array<double, 4> weights;
    std::array<Eigen::Vector2cd, 4> vectors;
};

// Choice of transverse (x, y) components in the angle-based construction.
// The default reproduces the reference solution: the outer angle pair
// (m = 0, 3) gets equal x and zero y; the inner pair (m = 1, 2) gets equal
// x and opposite y with r_1 taking the negative branch. `rotation` turns
// all four transverse components about z (the solution family is invariant
// under this), `swap_inner_y` exchanges the inner pair's y signs.
struct TransverseChoice {
    double rotation = 0.0;
    bool swap_inner_y = false;
};

// Validation summary, printed by the validate-povm subcommand.
struct PovmValidation {
    double completeness_residual;           // max |Σ Λ_m − I|
    std::array<double, 4> min_eigenvalues;  // per-element PSD check
    std::array<double, 4> bloch_norms;
    double bloch_sum_norm;                  // ‖Σ r_m‖₂
    double smallest_singular_value;         // of R (informational completeness)
    std::array<double, 4> scores;
};

// ------------------------------- operations -------------------------------

// The default four-element IC-POVM: Bloch vectors
//   r_0 = ( 1/2, 0,      √3/2), r_1 = (−1/2, −1/√2,  1/2),
//   r_2 = (−1/2, 1/√2,  −1/2),  r_3 = ( 1/2, 0,     −√3/2),
// polar angles (π/6, 2π/6, 4π/6, 5π/6), scores ≈ (0.067, 0.25, 0.75, 0.933).
SingleQubitPOVM build_default_icpovm();

// General construction: z-components fixed to cos α_m, transverse components
// solved under unit norm and zero sum following the TransverseChoice pattern.
// Throws ConstructionInfeasible when the angle set admits no solution or the
// resulting R is rank-deficient (e.g. α = {0, π/3, 2π/3, π}).
SingleQubitPOVM build_icpovm_from_angles(const std::array<double, 4>& alphas,
                                         const TransverseChoice& xy = {});

// Tetrahedral SIC-POVM: r_0 = (0,0,1) and three vectors at z = −1/3.
// Informationally complete, but scores degenerate: τ = (0, 2/3, 2/3, 2/3).
SingleQubitPOVM build_sic_povm();

// τ_m = tr(|1⟩⟨1| Λ_m) / tr(Λ_m) = (1 − r_{m,z})/2.
std::array<double, 4> expression_scores(const SingleQubitPOVM& povm);

// Rank-1 factorization Λ_m = ½|v_m⟩⟨v_m| (v_m the +1 eigenvector of r_m·σ).
// Throws NotRankOne if some ‖r_m‖ < 1 − 1e−8.
Rank1Factor rank1_factor(const SingleQubitPOVM& povm);

// Joint n-qubit element Λ_m = Λ_{m_1} ⊗ ... ⊗ Λ_{m_n} (qubit 0 leftmost).
// Guarded to n ≤ 10 (dense 2^n × 2^n output).
Matrix joint_element(const SingleQubitPOVM& povm, const std::vector<int>& m);

// Diagnostics for an already-constructed POVM (no thresholds applied).
PovmValidation validate_povm(const SingleQubitPOVM& povm);

}  // namespace qhl
