// qcore.hpp — dense complex linear algebra and quantum primitives: Pauli
// operators, tensor embedding, Hermitian eigendecomposition, unitary
// time evolution.
//
// Qubit-ordering convention (used consistently across the whole library):
// qubit 0 is the MOST significant bit of the computational-basis index.
// A basis state |b_0 b_1 ... b_{n-1}⟩ has index Σ_q b_q · 2^{n-1-q}, and
// tensor products compose left-to-right: kron(A_0, A_1, ..., A_{n-1}).

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qhl/errors.hpp"

namespace qhl {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// ------------------------------ domain types ------------------------------

// Normalized pure state of n qubits (2^n amplitudes, MSB-first ordering).
struct QuantumState {
    int n = 0;
    Vector amplitudes;

    Eigen::Index dim() const { return amplitudes.size(); }
};

// Hermitian eigendecomposition H = V diag(λ) V†, eigenvalues ascending.
struct EigenDecomposition {
    RealVector eigenvalues;
    Matrix eigenvectors;  // unitary; columns are eigenvectors

    Eigen::Index dim() const { return eigenvalues.size(); }
};

// ------------------------------- operations -------------------------------

enum class PauliCode { I, X, Y, Z };

// The 2×2 identity / Pauli matrices.
Matrix pauli(PauliCode code);

// Kronecker product (row-major qubit composition, left factor most
// significant).
Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

// Tensor product of n single-qubit states, qubit 0 leftmost.
Vector kron_chain(const std::vector<Eigen::Vector2cd>& factors);

// Operator acting as A on qubit i, B on qubit j (i ≠ j), identity elsewhere.
Matrix embed_pair(const Matrix& a, const Matrix& b, int i, int j, int n);

// Largest |M - M†| entry, for Hermiticity checks.
double hermiticity_residual(const Matrix& m);

// Hermitian eigendecomposition. Throws NumericalError if the symmetry
// residual exceeds 1e-8 relative to the largest entry (construction bug
// guard).
EigenDecomposition eig_hermitian(const Matrix& h);

// ψ(t) = V diag(e^{-i t λ}) V† ψ(0); norm preserved.
QuantumState evolve(const EigenDecomposition& decomp, double t, const QuantumState& psi0);
Vector evolve_vector(const EigenDecomposition& decomp, double t, const Vector& psi0);

// Phase vector e^{-i t λ} for reuse across states at the same time.
Vector evolution_phases(const EigenDecomposition& decomp, double t);

}  // namespace qhl
