// qcore.cpp — quantum primitives over dense Eigen types.

#include "qhl/qcore.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qhl {

Matrix pauli(PauliCode code) {
    Matrix m(2, 2);
    const Complex i(0.0, 1.0);
    switch (code) {
        case PauliCode::I:
            m << 1, 0, 0, 1;
            break;
        case PauliCode::X:
            m << 0, 1, 1, 0;
            break;
        case PauliCode::Y:
            m << 0, -i, i, 0;
            break;
        case PauliCode::Z:
            m << 1, 0, 0, -1;
            break;
    }
    return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index r = 0; r < a.size(); ++r)
        out.segment(r * b.size(), b.size()) = a(r) * b;
    return out;
}

Vector kron_chain(const std::vector<Eigen::Vector2cd>& factors) {
    Vector out = Vector::Ones(1);
    for (const auto& f : factors) {
        Vector next(out.size() * 2);
        for (Eigen::Index r = 0; r < out.size(); ++r) {
            next(2 * r) = out(r) * f(0);
            next(2 * r + 1) = out(r) * f(1);
        }
        out.swap(next);
    }
    return out;
}

Matrix embed_pair(const Matrix& a, const Matrix& b, int i, int j, int n) {
    if (i == j) throw UsageError("embed_pair: qubit indices must differ");
    if (i < 0 || j < 0 || i >= n || j >= n)
        throw UsageError("embed_pair: qubit index out of range");
    if (a.rows() != 2 || a.cols() != 2 || b.rows() != 2 || b.cols() != 2)
        throw UsageError("embed_pair: factors must be 2x2");

    const Matrix id = pauli(PauliCode::I);
    Matrix out = Matrix::Ones(1, 1);
    for (int q = 0; q < n; ++q) {
        const Matrix& slot = (q == i) ? a : (q == j) ? b : id;
        out = kron(out, slot);
    }
    return out;
}

double hermiticity_residual(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

EigenDecomposition eig_hermitian(const Matrix& h) {
    if (h.rows() != h.cols()) throw NumericalError("eig_hermitian: matrix not square");
    const double scale = h.cwiseAbs().maxCoeff();
    if (scale > 0 && hermiticity_residual(h) > 1e-8 * scale)
        throw NumericalError("eig_hermitian: input is not Hermitian within tolerance");

    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eig_hermitian: eigensolver failed to converge");

    EigenDecomposition decomp;
    decomp.eigenvalues = solver.eigenvalues();
    decomp.eigenvectors = solver.eigenvectors();
    return decomp;
}

Vector evolution_phases(const EigenDecomposition& decomp, double t) {
    const Complex mi(0.0, -1.0);
    return (mi * t * decomp.eigenvalues.cast<Complex>().array()).exp().matrix();
}

Vector evolve_vector(const EigenDecomposition& decomp, double t, const Vector& psi0) {
    if (psi0.size() != decomp.dim())
        throw UsageError("evolve: state dimension does not match decomposition");
    const Vector y = decomp.eigenvectors.adjoint() * psi0;
    return decomp.eigenvectors * evolution_phases(decomp, t).cwiseProduct(y);
}

QuantumState evolve(const EigenDecomposition& decomp, double t, const QuantumState& psi0) {
    return QuantumState{psi0.n, evolve_vector(decomp, t, psi0.amplitudes)};
}

}  // namespace qhl
