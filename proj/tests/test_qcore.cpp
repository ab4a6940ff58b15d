// test_qcore.cpp — quantum primitives: Paulis, embedding, eig, evolution.

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qhl/errors.hpp"
#include "qhl/qcore.hpp"

using namespace qhl;

TEST_SUITE("qcore") {

TEST_CASE("pauli matrices match their standard definitions") {
    const Matrix Z = pauli(PauliCode::Z);
    CHECK(Z(0, 0) == Complex(1.0, 0.0));
    CHECK(Z(1, 1) == Complex(-1.0, 0.0));
    CHECK(Z(0, 1) == Complex(0.0, 0.0));

    const Matrix Y = pauli(PauliCode::Y);
    CHECK((Y * Y - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(std::abs((pauli(PauliCode::X) * Y).trace()) == doctest::Approx(0.0));

    for (auto code : {PauliCode::I, PauliCode::X, PauliCode::Y, PauliCode::Z})
        CHECK(hermiticity_residual(pauli(code)) == 0.0);
}

TEST_CASE("kron reproduces hand values and composes with vectors") {
    const Matrix ZI = kron(pauli(PauliCode::Z), pauli(PauliCode::I));
    for (int b = 0; b < 4; ++b)
        CHECK(ZI(b, b) == Complex(b < 2 ? 1.0 : -1.0, 0.0));

    Eigen::Vector2cd v0(1.0, 0.0), v1(0.0, 1.0);
    const Vector v01 = kron(Vector(v0), Vector(v1));
    CHECK(v01(1) == Complex(1.0, 0.0));
    CHECK(v01.cwiseAbs().sum() == doctest::Approx(1.0));

    const Vector chain = kron_chain({v1, v0, v1});  // |1⟩|0⟩|1⟩ → index 101₂ = 5
    CHECK(chain(5) == Complex(1.0, 0.0));
}

TEST_CASE("embed_pair places factors under the MSB-first convention") {
    const Matrix d = embed_pair(pauli(PauliCode::Z), pauli(PauliCode::I), 0, 1, 2);
    CHECK(d(0, 0).real() == doctest::Approx(1.0));
    CHECK(d(1, 1).real() == doctest::Approx(1.0));
    CHECK(d(2, 2).real() == doctest::Approx(-1.0));
    CHECK(d(3, 3).real() == doctest::Approx(-1.0));

    const Matrix eye = embed_pair(pauli(PauliCode::I), pauli(PauliCode::I), 0, 1, 3);
    CHECK((eye - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

    // X⊗X flips |00⟩ to |11⟩.
    const Matrix xx = embed_pair(pauli(PauliCode::X), pauli(PauliCode::X), 0, 1, 2);
    Vector e0 = Vector::Zero(4);
    e0(0) = 1.0;
    CHECK(((xx * e0).eval()(3)) == Complex(1.0, 0.0));

    // Hermiticity preservation for Hermitian factors.
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix A = oracle::random_hermitian(2, rng);
        const Matrix B = oracle::random_hermitian(2, rng);
        CHECK(hermiticity_residual(embed_pair(A, B, 1, 3, 4)) <= 1e-12);
    }

    CHECK_THROWS_AS(embed_pair(pauli(PauliCode::X), pauli(PauliCode::X), 1, 1, 2),
                    UsageError);
    CHECK_THROWS_AS(embed_pair(pauli(PauliCode::X), pauli(PauliCode::X), 0, 2, 2),
                    UsageError);
}

TEST_CASE("eig_hermitian solves hand instances and random residuals") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    const EigenDecomposition ed = eig_hermitian(d);
    CHECK(ed.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(ed.eigenvalues(1) == doctest::Approx(3.0));
    CHECK(std::abs(ed.eigenvectors(1, 0)) == doctest::Approx(1.0));  // permutation

    const EigenDecomposition ex = eig_hermitian(pauli(PauliCode::X));
    CHECK(ex.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(ex.eigenvalues(1) == doctest::Approx(1.0));
    for (int col = 0; col < 2; ++col)
        for (int row = 0; row < 2; ++row)
            CHECK(std::abs(ex.eigenvectors(row, col)) == doctest::Approx(1.0 / std::sqrt(2.0)));

    std::mt19937_64 rng(7);
    const Matrix H = oracle::random_hermitian(16, rng);
    const EigenDecomposition e16 = eig_hermitian(H);
    const Matrix resid = H * e16.eigenvectors -
                         e16.eigenvectors * e16.eigenvalues.asDiagonal().toDenseMatrix().cast<Complex>();
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-9 * H.cwiseAbs().maxCoeff());
    CHECK((e16.eigenvectors * e16.eigenvectors.adjoint() - Matrix::Identity(16, 16))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    for (int i = 1; i < 16; ++i) CHECK(e16.eigenvalues(i) >= e16.eigenvalues(i - 1));
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = Complex(1.0, 0.0);  // strictly upper, not Hermitian
    CHECK_THROWS_AS(eig_hermitian(bad), NumericalError);
}

TEST_CASE("evolve matches hand phases and the expm oracle") {
    // t = 0 is the identity.
    std::mt19937_64 rng(23);
    const Matrix H3 = oracle::random_hermitian(8, rng);
    const EigenDecomposition ed3 = eig_hermitian(H3);
    Vector psi = Vector::Zero(8);
    psi(0) = Complex(0.6, 0.0);
    psi(5) = Complex(0.0, 0.8);
    CHECK((evolve_vector(ed3, 0.0, psi) - psi).cwiseAbs().maxCoeff() < 1e-12);

    // H = Z on one qubit, t = π/2: |±⟩ phases e^{∓iπ/2}.
    const EigenDecomposition edz = eig_hermitian(pauli(PauliCode::Z));
    Vector plus(2);
    plus << Complex(1.0 / std::sqrt(2.0), 0.0), Complex(1.0 / std::sqrt(2.0), 0.0);
    const Vector rotated = evolve_vector(edz, M_PI / 2.0, plus);
    const Complex expected0 = std::exp(Complex(0.0, -M_PI / 2.0)) / std::sqrt(2.0);
    const Complex expected1 = std::exp(Complex(0.0, M_PI / 2.0)) / std::sqrt(2.0);
    CHECK(std::abs(rotated(0) - expected0) < 1e-12);
    CHECK(std::abs(rotated(1) - expected1) < 1e-12);

    // Random 3-qubit H vs the independent Padé exponential.
    const Vector psi_lib = evolve_vector(ed3, 0.73, psi);
    const Vector psi_oracle = oracle::evolve_expm(H3, 0.73, psi);
    CHECK((psi_lib - psi_oracle).norm() < 1e-8);

    // Unitarity and the group property.
    CHECK(std::abs(psi_lib.norm() - 1.0) <= 1e-10);
    const Vector two_step = evolve_vector(ed3, 0.4, evolve_vector(ed3, 0.33, psi));
    CHECK((two_step - psi_lib).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("evolve checks dimensions and preserves QuantumState norm") {
    const EigenDecomposition edz = eig_hermitian(pauli(PauliCode::Z));
    Vector wrong = Vector::Zero(4);
    CHECK_THROWS_AS(evolve_vector(edz, 1.0, wrong), UsageError);

    QuantumState state;
    state.n = 1;
    state.amplitudes.resize(2);
    state.amplitudes << Complex(0.8, 0.0), Complex(0.0, 0.6);
    const QuantumState out = evolve(edz, 2.0, state);
    CHECK(out.n == 1);
    CHECK(std::abs(out.amplitudes.norm() - 1.0) <= 1e-10);
}

}  // TEST_SUITE
