// hamiltonian.hpp — the parameterized regulatory Hamiltonian
//   H(w) = Σ_{i≠j} w_ij · ½(I − Z_i) ⊗ Y_j
// plus the generic linear form H(w) = Σ_k w_k H_k consumed by the learner.
//
// Parameter flattening is row-major over ordered pairs (i, j), i ≠ j:
// (0,1), (0,2), ..., (0,n−1), (1,0), (1,2), ..., (n−1,n−2); c = n(n−1).

#pragma once

#include <Eigen/SparseCore>
#include <string>
#include <utility>
#include <vector>

#include "qhl/qcore.hpp"

namespace qhl {

// ------------------------------ domain types ------------------------------

// n×n real weight matrix, zero diagonal, |w_ij| ≤ w_max.
struct WeightMatrix {
    int n = 0;
    RealMatrix w;
    double w_max = 1.0;
};

// Fixed bijection between off-diagonal pairs (i, j) and positions in the
// flattened parameter vector.
struct TermIndex {
    int n = 0;
    std::vector<std::pair<int, int>> pairs;  // row-major, length n(n−1)

    int count() const { return static_cast<int>(pairs.size()); }
};

using SparseComplex = Eigen::SparseMatrix<Complex>;

// Generic parameterized Hamiltonian H(w) = Σ_k w_k · terms[k]; the learner
// consumes this form, so it is not tied to the regulatory term family.
struct TermList {
    Eigen::Index dim = 0;
    std::vector<SparseComplex> terms;  // Hermitian, one per parameter

    int count() const { return static_cast<int>(terms.size()); }
};

// ------------------------------- operations -------------------------------

TermIndex make_term_index(int n);

// H_ij = ½(I − Z_i) ⊗ Y_j = |1⟩⟨1|_i ⊗ Y_j embedded in 2^n dimensions.
Matrix local_term(int i, int j, int n);

// H(w) = Σ w_ij H_ij (dense).
Matrix build_hamiltonian(const WeightMatrix& wm);

// Row-major flattening between WeightMatrix and the parameter vector w ∈ R^c.
RealVector flatten(const WeightMatrix& wm);
WeightMatrix unflatten(const RealVector& v, int n, double w_max = 1.0);

// Validate WeightMatrix invariants (zero diagonal, |w| ≤ w_max); throws
// DataError on violation.
void check_weights(const WeightMatrix& wm);

// The regulatory term family as a generic TermList (sparse, TermIndex order).
TermList grn_term_list(int n);

// Generic TermList from explicit (coefficient, Hermitian term) pairs.
TermList make_term_list(const std::vector<Matrix>& terms);

// H(w) = Σ_k w_k terms[k] as a dense matrix.
Matrix assemble(const TermList& terms, const RealVector& w);

// ----------------------------- serialization ------------------------------
// CSV: first line the integer n, then n rows of n values at 17 significant
// digits (exact round-trip). JSON: {"n", "w_max", "weights": [[...], ...]}.

void write_weights_csv(const WeightMatrix& wm, const std::string& path);
WeightMatrix read_weights_csv(const std::string& path, double w_max = 1.0);
void write_weights_json(const WeightMatrix& wm, const std::string& path);
WeightMatrix read_weights_json(const std::string& path);

}  // namespace qhl
