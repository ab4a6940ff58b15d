// test_hamiltonian.cpp — regulatory terms, assembly, flattening, serialization.

#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qhl/errors.hpp"
#include "qhl/hamiltonian.hpp"

using namespace qhl;

TEST_SUITE("hamiltonian") {

TEST_CASE("local_term is the projected Pauli-Y coupling") {
    // n=2: H_01 = |1⟩⟨1| ⊗ Y.
    const Matrix h01 = local_term(0, 1, 2);
    CHECK(h01.rows() == 4);
    const Matrix direct = kron(
        (Matrix(2, 2) << 0, 0, 0, 1).finished(), pauli(PauliCode::Y));
    CHECK((h01 - direct).cwiseAbs().maxCoeff() <= 1e-15);

    // H_01 |10⟩ = i |11⟩ (so the generator −iH maps |1⟩|0⟩ → +|1⟩|1⟩).
    Vector ket10 = Vector::Zero(4);
    ket10(2) = 1.0;  // |10⟩ under MSB-first indexing
    const Vector image = h01 * ket10;
    CHECK(std::abs(image(3) - Complex(0.0, 1.0)) <= 1e-15);
    CHECK(image.cwiseAbs().sum() == doctest::Approx(1.0));

    // Annihilates |0⟩ on the regulator qubit.
    Vector ket0x = Vector::Zero(4);
    ket0x(0) = 0.6;
    ket0x(1) = 0.8;
    CHECK((h01 * ket0x).cwiseAbs().maxCoeff() <= 1e-15);

    // Hermitian, unit spectral norm (eigenvalues in {−1, 0, 1}).
    CHECK(hermiticity_residual(h01) <= 1e-15);
    const EigenDecomposition ed = eig_hermitian(h01);
    CHECK(ed.eigenvalues.cwiseAbs().maxCoeff() == doctest::Approx(1.0));

    CHECK_THROWS_AS(local_term(1, 1, 2), UsageError);
    CHECK_THROWS_AS(local_term(0, 2, 2), UsageError);
}

TEST_CASE("build_hamiltonian: zero, single-term, and linearity") {
    WeightMatrix zero;
    zero.n = 3;
    zero.w = RealMatrix::Zero(3, 3);
    CHECK(build_hamiltonian(zero).cwiseAbs().maxCoeff() == 0.0);

    WeightMatrix single;
    single.n = 2;
    single.w = RealMatrix::Zero(2, 2);
    single.w(0, 1) = 0.7;
    const Matrix h = build_hamiltonian(single);
    CHECK((h - 0.7 * local_term(0, 1, 2)).cwiseAbs().maxCoeff() <= 1e-15);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    WeightMatrix a, b;
    a.n = b.n = 3;
    a.w = RealMatrix::Zero(3, 3);
    b.w = RealMatrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) {
                a.w(i, j) = unif(rng);
                b.w(i, j) = unif(rng);
            }
    WeightMatrix mix;
    mix.n = 3;
    mix.w = 0.3 * a.w + 0.6 * b.w;
    const Matrix lhs = build_hamiltonian(mix);
    const Matrix rhs = 0.3 * build_hamiltonian(a) + 0.6 * build_hamiltonian(b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(hermiticity_residual(lhs) <= 1e-12);
}

TEST_CASE("term index and flattening are row-major and inverse") {
    const TermIndex idx2 = make_term_index(2);
    REQUIRE(idx2.count() == 2);
    CHECK(idx2.pairs[0] == std::make_pair(0, 1));
    CHECK(idx2.pairs[1] == std::make_pair(1, 0));

    CHECK(make_term_index(12).count() == 132);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    RealVector v(6);
    for (int k = 0; k < 6; ++k) v(k) = unif(rng);
    const WeightMatrix wm = unflatten(v, 3);
    CHECK((flatten(wm) - v).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 3; ++i) CHECK(wm.w(i, i) == 0.0);

    // H from the flattened form equals H from the matrix form.
    const TermList terms = grn_term_list(3);
    const Matrix via_terms = assemble(terms, v);
    const Matrix via_matrix = build_hamiltonian(wm);
    CHECK((via_terms - via_matrix).cwiseAbs().maxCoeff() <= 1e-14);

    // Parameter vectors are data-carrying (serialized alongside weights).
    CHECK_THROWS_AS(unflatten(RealVector::Zero(5), 3), DataError);
}

TEST_CASE("grn_term_list matches dense local terms at n=4") {
    const TermList terms = grn_term_list(4);
    const TermIndex idx = make_term_index(4);
    REQUIRE(terms.count() == idx.count());
    for (int k = 0; k < idx.count(); ++k) {
        const auto [i, j] = idx.pairs[k];
        const Matrix dense = Matrix(terms.terms[k]);
        CHECK((dense - local_term(i, j, 4)).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("make_term_list validates Hermiticity") {
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = Complex(1.0, 0.0);
    CHECK_THROWS_AS(make_term_list({bad}), NumericalError);

    const TermList ok = make_term_list({pauli(PauliCode::X), pauli(PauliCode::Z)});
    RealVector coeff(2);
    coeff << 2.0, -1.0;
    const Matrix h = assemble(ok, coeff);
    CHECK(h(0, 0).real() == doctest::Approx(-1.0));
    CHECK(h(0, 1).real() == doctest::Approx(2.0));
}

TEST_CASE("check_weights enforces the box and zero diagonal") {
    WeightMatrix wm;
    wm.n = 2;
    wm.w_max = 1.0;
    wm.w = RealMatrix::Zero(2, 2);
    wm.w(0, 1) = 1.5;
    CHECK_THROWS_AS(check_weights(wm), DataError);
    wm.w(0, 1) = 0.5;
    wm.w(1, 1) = 0.1;
    CHECK_THROWS_AS(check_weights(wm), DataError);
    wm.w(1, 1) = 0.0;
    CHECK_NOTHROW(check_weights(wm));
}

TEST_CASE("weight serialization round-trips exactly") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qhl_test_weights";
    fs::create_directories(dir);

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    WeightMatrix wm;
    wm.n = 4;
    wm.w = RealMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) wm.w(i, j) = unif(rng);

    const std::string csv = (dir / "w.csv").string();
    write_weights_csv(wm, csv);
    const WeightMatrix back = read_weights_csv(csv);
    CHECK(back.n == 4);
    CHECK((back.w - wm.w).cwiseAbs().maxCoeff() == 0.0);

    const std::string json = (dir / "w.json").string();
    write_weights_json(wm, json);
    const WeightMatrix jback = read_weights_json(json);
    CHECK(jback.n == 4);
    CHECK((jback.w - wm.w).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(read_weights_csv((dir / "missing.csv").string()), DataError);
    fs::remove_all(dir);
}

}  // TEST_SUITE
