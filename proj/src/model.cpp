// model.cpp — forward model and synthetic data generation.

#include "qhl/model.hpp"

#include <algorithm>
#include <cmath>

namespace qhl {

Eigen::Vector2cd qubit_state(double theta, double phi) {
    return {Complex(std::cos(theta), 0.0), std::polar(std::sin(theta), phi)};
}

Eigen::Vector2cd qubit_state_dtheta(double theta, double phi) {
    return {Complex(-std::sin(theta), 0.0), std::polar(std::cos(theta), phi)};
}

Eigen::Vector2cd qubit_state_dphi(double theta, double phi) {
    // d/dφ e^{iφ} sin θ = i e^{iφ} sin θ.
    return {Complex(0.0, 0.0), Complex(0.0, 1.0) * std::polar(std::sin(theta), phi)};
}

QuantumState prepare_initial_state(const RealVector& thetas, const RealVector& phis) {
    if (thetas.size() != phis.size())
        throw DataError("prepare_initial_state: theta/phi length mismatch");
    const int n = static_cast<int>(thetas.size());
    std::vector<Eigen::Vector2cd> factors(n);
    for (int i = 0; i < n; ++i) factors[i] = qubit_state(thetas(i), phis(i));
    return QuantumState{n, kron_chain(factors)};
}

Vector outcome_vector(const Rank1Factor& factor, const std::vector<int>& m) {
    std::vector<Eigen::Vector2cd> factors(m.size());
    for (std::size_t q = 0; q < m.size(); ++q) {
        if (m[q] < 0 || m[q] > 3) throw DataError("outcome label out of range");
        factors[q] = factor.vectors[m[q]];
    }
    return kron_chain(factors);
}

namespace {

Vector evolved_state(const ModelParams& params, double t) {
    const QuantumState psi0 = prepare_initial_state(params.thetas, params.phis);
    const Matrix h = build_hamiltonian(params.weights);
    return evolve_vector(eig_hermitian(h), t, psi0.amplitudes);
}

}  // namespace

double likelihood(const ModelParams& params, double t, const std::vector<int>& m,
                  const SingleQubitPOVM& povm) {
    const Rank1Factor factor = rank1_factor(povm);
    const Vector psi_t = evolved_state(params, t);
    const Complex amp = outcome_vector(factor, m).dot(psi_t);
    return std::norm(amp) / std::ldexp(1.0, static_cast<int>(m.size()));
}

RealVector full_distribution(const Vector& psi_t, const Rank1Factor& factor, int n_enum) {
    const int n = static_cast<int>(std::log2(static_cast<double>(psi_t.size())) + 0.5);
    if (n > n_enum) throw UsageError("full_distribution: n exceeds the enumeration guard");

    // Depth-first partial contraction over qubits, MSB (qubit 0) first.
    // Qubit q contributes digit m_q · 4^q to the entry index.
    RealVector probs = RealVector::Zero(Eigen::Index(1) << (2 * n));
    const double weight = std::ldexp(1.0, -n);  // Π_j weights = 2^{−n}

    struct Frame {
        Vector state;
        int qubit;
        std::uint64_t base;
    };
    std::vector<Frame> stack;
    stack.push_back({psi_t, 0, 0});
    while (!stack.empty()) {
        Frame frame = std::move(stack.back());
        stack.pop_back();
        if (frame.qubit == n) {
            probs(frame.base) += weight * std::norm(frame.state(0));
            continue;
        }
        const Eigen::Index half = frame.state.size() / 2;
        const std::uint64_t stride = std::uint64_t(1) << (2 * frame.qubit);
        for (int m = 0; m < 4; ++m) {
            const Eigen::Vector2cd& v = factor.vectors[m];
            // ⟨v|_q applied to the leading qubit of the current block.
            Vector child = std::conj(v(0)) * frame.state.head(half) +
                           std::conj(v(1)) * frame.state.tail(half);
            stack.push_back({std::move(child), frame.qubit + 1, frame.base + m * stride});
        }
    }
    return probs;
}

RealVector full_distribution(const ModelParams& params, double t, const SingleQubitPOVM& povm,
                             int n_enum) {
    return full_distribution(evolved_state(params, t), rank1_factor(povm), n_enum);
}

std::vector<int> sample_outcome(const Vector& psi_t, const Rank1Factor& factor, Rng& rng) {
    const int n = static_cast<int>(std::log2(static_cast<double>(psi_t.size())) + 0.5);
    std::vector<int> m(n);
    Vector state = psi_t;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int q = 0; q < n; ++q) {
        const Eigen::Index half = state.size() / 2;
        // Unnormalized post-measurement states ⟨v_k|_q ψ and their masses
        // p_k = ½‖·‖²; the four masses sum to the current state's norm².
        std::array<Vector, 4> children;
        std::array<double, 4> mass;
        double total = 0.0;
        for (int k = 0; k < 4; ++k) {
            children[k] = std::conj(factor.vectors[k](0)) * state.head(half) +
                          std::conj(factor.vectors[k](1)) * state.tail(half);
            mass[k] = 0.5 * children[k].squaredNorm();
            total += mass[k];
        }
        if (total < 1e-12)
            throw NumericalError("sample_outcome: running norm underflow during conditioning");
        const double u = unif(rng) * total;
        int pick = 3;
        double cumulative = 0.0;
        for (int k = 0; k < 4; ++k) {
            cumulative += mass[k];
            if (u < cumulative) {
                pick = k;
                break;
            }
        }
        m[q] = pick;
        const double norm = children[pick].norm();
        if (norm < 1e-154)
            throw NumericalError("sample_outcome: collapsed state norm underflow");
        state = children[pick] / norm;
    }
    return m;
}

std::vector<std::vector<int>> sample_outcomes(const ModelParams& params, double t, int count,
                                              const SingleQubitPOVM& povm, Rng& rng) {
    if (count < 1) throw UsageError("sample_outcomes: count must be positive");
    const Rank1Factor factor = rank1_factor(povm);
    const Vector psi_t = evolved_state(params, t);
    std::vector<std::vector<int>> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) out.push_back(sample_outcome(psi_t, factor, rng));
    return out;
}

std::pair<Dataset, ModelParams> generate_synthetic(const SynthConfig& cfg,
                                                   const SingleQubitPOVM& povm) {
    if (cfg.n < 1 || cfg.N_t < 1 || cfg.N_c < 1 || cfg.t_max <= 0.0)
        throw UsageError("generate_synthetic: invalid configuration");

    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Ground truth: weights in TermIndex order, then θ, φ, then times.
    const TermIndex index = make_term_index(cfg.n);
    ModelParams truth;
    truth.weights = WeightMatrix{cfg.n, RealMatrix::Zero(cfg.n, cfg.n), cfg.w_max};
    for (const auto& [i, j] : index.pairs)
        truth.weights.w(i, j) = cfg.w_max * (2.0 * unif(rng) - 1.0);
    truth.thetas = RealVector(cfg.n);
    truth.phis = RealVector(cfg.n);
    for (int i = 0; i < cfg.n; ++i) truth.thetas(i) = M_PI * unif(rng);
    for (int i = 0; i < cfg.n; ++i) truth.phis(i) = 2.0 * M_PI * unif(rng);

    Dataset data;
    data.n = cfg.n;
    data.times = RealVector(cfg.N_t);
    for (int i = 0; i < cfg.N_t; ++i) data.times(i) = cfg.t_max * (1.0 - unif(rng));  // (0, t_max]
    std::sort(data.times.begin(), data.times.end());

    const Rank1Factor factor = rank1_factor(povm);
    const QuantumState psi0 = prepare_initial_state(truth.thetas, truth.phis);
    const EigenDecomposition eig = eig_hermitian(build_hamiltonian(truth.weights));

    data.outcomes.resize(cfg.N_t);
    for (int i = 0; i < cfg.N_t; ++i) {
        const Vector psi_t = evolve_vector(eig, data.times(i), psi0.amplitudes);
        Rng bin_rng(split_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        auto& block = data.outcomes[i];
        block.resize(cfg.N_c, cfg.n);
        for (int k = 0; k < cfg.N_c; ++k) {
            const std::vector<int> m = sample_outcome(psi_t, factor, bin_rng);
            for (int q = 0; q < cfg.n; ++q) block(k, q) = static_cast<std::uint8_t>(m[q]);
        }
    }
    return {std::move(data), std::move(truth)};
}

}  // namespace qhl
