// hamiltonian.cpp — regulatory Hamiltonian construction and serialization.

#include "qhl/hamiltonian.hpp"

#include <cinttypes>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "qhl/format.hpp"

namespace qhl {

TermIndex make_term_index(int n) {
    TermIndex index;
    index.n = n;
    index.pairs.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) index.pairs.emplace_back(i, j);
    return index;
}

Matrix local_term(int i, int j, int n) {
    // ½(I − Z) = |1⟩⟨1|.
    const Matrix proj1 = 0.5 * (pauli(PauliCode::I) - pauli(PauliCode::Z));
    return embed_pair(proj1, pauli(PauliCode::Y), i, j, n);
}

void check_weights(const WeightMatrix& wm) {
    if (wm.w.rows() != wm.n || wm.w.cols() != wm.n)
        throw DataError("weights: matrix shape does not match n");
    for (int i = 0; i < wm.n; ++i) {
        if (wm.w(i, i) != 0.0) throw DataError("weights: diagonal must be identically zero");
        for (int j = 0; j < wm.n; ++j)
            if (std::abs(wm.w(i, j)) > wm.w_max + 1e-12)
                throw DataError("weights: |w_ij| exceeds w_max");
    }
}

Matrix build_hamiltonian(const WeightMatrix& wm) {
    check_weights(wm);
    const Eigen::Index dim = Eigen::Index(1) << wm.n;
    Matrix h = Matrix::Zero(dim, dim);
    for (int i = 0; i < wm.n; ++i)
        for (int j = 0; j < wm.n; ++j)
            if (i != j && wm.w(i, j) != 0.0) h += wm.w(i, j) * local_term(i, j, wm.n);
    return h;
}

RealVector flatten(const WeightMatrix& wm) {
    const TermIndex index = make_term_index(wm.n);
    RealVector v(index.count());
    for (int k = 0; k < index.count(); ++k)
        v(k) = wm.w(index.pairs[k].first, index.pairs[k].second);
    return v;
}

WeightMatrix unflatten(const RealVector& v, int n, double w_max) {
    const TermIndex index = make_term_index(n);
    if (v.size() != index.count())
        throw DataError("unflatten: parameter vector length does not equal n(n-1)");
    WeightMatrix wm{n, RealMatrix::Zero(n, n), w_max};
    for (int k = 0; k < index.count(); ++k)
        wm.w(index.pairs[k].first, index.pairs[k].second) = v(k);
    return wm;
}

TermList make_term_list(const std::vector<Matrix>& terms) {
    TermList list;
    if (terms.empty()) return list;
    list.dim = terms.front().rows();
    for (const Matrix& term : terms) {
        if (term.rows() != list.dim || term.cols() != list.dim)
            throw DataError("make_term_list: inconsistent term dimensions");
        if (hermiticity_residual(term) > 1e-12 * std::max(1.0, term.cwiseAbs().maxCoeff()))
            throw NumericalError("make_term_list: term is not Hermitian");
        list.terms.push_back(term.sparseView(1.0, 1e-300));
        list.terms.back().makeCompressed();
    }
    return list;
}

TermList grn_term_list(int n) {
    // Build each H_ij directly in sparse form: the only nonzeros are
    // ⟨b with bit j flipped| H_ij |b⟩ = ±i for basis states b with bit i set.
    TermList list;
    list.dim = Eigen::Index(1) << n;
    const TermIndex index = make_term_index(n);
    const Complex im(0.0, 1.0);
    for (const auto& [i, j] : index.pairs) {
        const Eigen::Index bit_i = Eigen::Index(1) << (n - 1 - i);  // qubit 0 = MSB
        const Eigen::Index bit_j = Eigen::Index(1) << (n - 1 - j);
        std::vector<Eigen::Triplet<Complex>> triplets;
        triplets.reserve(list.dim / 2);
        for (Eigen::Index b = 0; b < list.dim; ++b) {
            if (!(b & bit_i)) continue;
            // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩ on qubit j.
            const bool j_set = (b & bit_j) != 0;
            triplets.emplace_back(b ^ bit_j, b, j_set ? -im : im);
        }
        SparseComplex term(list.dim, list.dim);
        term.setFromTriplets(triplets.begin(), triplets.end());
        term.makeCompressed();
        list.terms.push_back(std::move(term));
    }
    return list;
}

Matrix assemble(const TermList& terms, const RealVector& w) {
    if (w.size() != terms.count())
        throw DataError("assemble: coefficient count does not match term count");
    Matrix h = Matrix::Zero(terms.dim, terms.dim);
    for (int k = 0; k < terms.count(); ++k) {
        if (w(k) == 0.0) continue;
        const SparseComplex& term = terms.terms[k];
        for (Eigen::Index col = 0; col < term.outerSize(); ++col)
            for (SparseComplex::InnerIterator it(term, col); it; ++it)
                h(it.row(), it.col()) += w(k) * it.value();
    }
    return h;
}

void write_weights_csv(const WeightMatrix& wm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << wm.n << "\n";
    for (int i = 0; i < wm.n; ++i) {
        for (int j = 0; j < wm.n; ++j) out << (j ? "," : "") << format_double(wm.w(i, j));
        out << "\n";
    }
}

WeightMatrix read_weights_csv(const std::string& path, double w_max) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": missing header row");
    int n = 0;
    try {
        n = std::stoi(line);
    } catch (const std::exception&) {
        throw DataError(path + ": header row must contain the integer n");
    }
    if (n <= 0) throw DataError(path + ": non-positive n");
    WeightMatrix wm{n, RealMatrix::Zero(n, n), w_max};
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw DataError(path + ": fewer than n weight rows");
        std::stringstream ss(line);
        std::string cell;
        for (int j = 0; j < n; ++j) {
            if (!std::getline(ss, cell, ',')) throw DataError(path + ": short weight row");
            wm.w(i, j) = std::stod(cell);
        }
    }
    check_weights(wm);
    return wm;
}

void write_weights_json(const WeightMatrix& wm, const std::string& path) {
    nlohmann::json j;
    j["n"] = wm.n;
    j["w_max"] = wm.w_max;
    std::vector<std::vector<double>> rows(wm.n, std::vector<double>(wm.n));
    for (int i = 0; i < wm.n; ++i)
        for (int c = 0; c < wm.n; ++c) rows[i][c] = wm.w(i, c);
    j["weights"] = rows;
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

WeightMatrix read_weights_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    if (!j.contains("n") || !j.contains("weights"))
        throw DataError(path + ": missing required field 'n' or 'weights'");
    WeightMatrix wm;
    wm.n = j.at("n").get<int>();
    wm.w_max = j.value("w_max", 1.0);
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != wm.n)
        throw DataError(path + ": weights row count does not match n");
    wm.w = RealMatrix::Zero(wm.n, wm.n);
    for (int i = 0; i < wm.n; ++i) {
        if (static_cast<int>(rows[i].size()) != wm.n)
            throw DataError(path + ": weights column count does not match n");
        for (int c = 0; c < wm.n; ++c) wm.w(i, c) = rows[i][c];
    }
    check_weights(wm);
    return wm;
}

}  // namespace qhl
